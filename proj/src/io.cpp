#include "blowup/io.hpp"

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include <filesystem>
#include <fstream>

#include "blowup/errors.hpp"

namespace blowup {

namespace {

std::string optional_field(const std::optional<double>& v) { return v ? format_double(*v) : std::string(); }

}  // namespace

std::string format_double(double value) { return fmt::format("{}", value); }

void write_text(const std::string& path, const std::string& text) {
  const std::filesystem::path p(path);
  if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorCode::InvalidArgument, "cannot write " + path);
  out << text;
}

std::string field_to_csv(const ScalarField& field) {
  std::string out = "x,y,mask,u\n";
  const GridSpec& g = field.grid;
  for (int j = 0; j < g.ny; ++j) {
    for (int i = 0; i < g.nx; ++i) {
      const Point2 p = g.node(i, j);
      const std::size_t k = g.flat(i, j);
      out += fmt::format("{},{},{},{}\n", format_double(p.x()), format_double(p.y()), static_cast<int>(field.mask[k]),
                         format_double(field.u[k]));
    }
  }
  return out;
}

std::string field_to_json(const ScalarField& field) {
  nlohmann::json j;
  j["format"] = "blowup-scalar-field";
  j["version"] = 1;
  j["n"] = field.n;
  j["level"] = field.level;
  j["grid"] = {{"x0", field.grid.x0}, {"y0", field.grid.y0}, {"h", field.grid.h}, {"nx", field.grid.nx}, {"ny", field.grid.ny}};
  j["mask"] = field.mask;
  nlohmann::json u = nlohmann::json::array();
  for (std::size_t k = 0; k < field.u.size(); ++k) {
    if (field.mask[k] == kOutside) u.push_back(nullptr);
    else u.push_back(field.u[k]);
  }
  j["u"] = std::move(u);
  if (!field.w.empty()) j["w"] = field.w;
  return j.dump();
}

ScalarField field_from_json(const std::string& text) {
  ScalarField f;
  try {
    const nlohmann::json j = nlohmann::json::parse(text);
    if (j.at("format") != "blowup-scalar-field" || j.at("version") != 1) {
      fail(ErrorCode::ConfigError, "not a version 1 scalar field");
    }
    f.n = j.at("n").get<int>();
    f.level = j.at("level").get<double>();
    const auto& g = j.at("grid");
    f.grid = {g.at("x0").get<double>(), g.at("y0").get<double>(), g.at("h").get<double>(), g.at("nx").get<int>(),
              g.at("ny").get<int>()};
    f.mask = j.at("mask").get<std::vector<std::uint8_t>>();
    const std::size_t size = static_cast<std::size_t>(f.grid.nx) * f.grid.ny;
    const auto& u = j.at("u");
    if (f.mask.size() != size || u.size() != size) fail(ErrorCode::ConfigError, "field arrays do not match the grid");
    f.u.resize(size);
    for (std::size_t k = 0; k < size; ++k) f.u[k] = u[k].is_null() ? 0.0 : u[k].get<double>();
    if (j.contains("w")) f.w = j.at("w").get<std::vector<double>>();
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::ConfigError, std::string("malformed field: ") + e.what());
  }
  return f;
}

std::string radial_to_csv(const RadialProfile& profile) {
  std::string out = "r,u,error\n";
  for (std::size_t i = 0; i < profile.r.size(); ++i) {
    out += fmt::format("{},{},{}\n", format_double(profile.r[i]), format_double(profile.u[i]), format_double(profile.error[i]));
  }
  return out;
}

std::string report_header() { return "scenario,anchor,check,value,constant,window_lo,window_hi,min,max,passed\n"; }

std::string report_to_csv(const std::vector<ReportRow>& rows) {
  std::string out = report_header();
  for (const ReportRow& r : rows) {
    out += fmt::format("{},\"{}\",{},{},{},{},{},{},{},{}\n", r.scenario, r.anchor, r.check, format_double(r.value),
                       optional_field(r.constant), r.window ? format_double(r.window->first) : "",
                       r.window ? format_double(r.window->second) : "", optional_field(r.min), optional_field(r.max),
                       r.passed ? "pass" : "fail");
  }
  return out;
}

}  // namespace blowup
