#include "blowup/fixtures.hpp"

#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "blowup/errors.hpp"

#ifndef BLOWUP_DATA_DIR
#define BLOWUP_DATA_DIR "."
#endif

namespace blowup {

namespace fs = std::filesystem;

namespace {

[[noreturn]] void config_fail(const std::string& source, const YAML::Mark& mark, const std::string& what) {
  std::ostringstream os;
  os << source;
  if (!mark.is_null()) os << ":" << mark.line + 1 << ":" << mark.column + 1;
  os << ": " << what;
  fail(ErrorCode::ConfigError, os.str());
}

// Typed access to a YAML map with diagnostics that point at the offending node.
class Reader {
 public:
  Reader(YAML::Node node, std::string source) : node_(std::move(node)), source_(std::move(source)) {
    if (!node_.IsMap()) config_fail(source_, node_.Mark(), "expected a mapping");
  }

  bool has(const std::string& key) const { return static_cast<bool>(node_[key]); }
  YAML::Node at(const std::string& key) const {
    YAML::Node v = node_[key];
    if (!v) config_fail(source_, node_.Mark(), "missing key '" + key + "'");
    return v;
  }

  template <class T>
  T get(const std::string& key) const {
    return as<T>(at(key), key);
  }
  template <class T>
  T get(const std::string& key, const T& fallback) const {
    return has(key) ? get<T>(key) : fallback;
  }

  template <class T>
  T as(const YAML::Node& v, const std::string& what) const {
    try {
      return v.as<T>();
    } catch (const YAML::Exception&) {
      config_fail(source_, v.Mark(), "bad value for '" + what + "'");
    }
  }

  Vec vec(const YAML::Node& v, const std::string& what) const {
    if (!v.IsSequence()) config_fail(source_, v.Mark(), "'" + what + "' must be a list of numbers");
    Vec out(static_cast<long>(v.size()));
    for (std::size_t i = 0; i < v.size(); ++i) out[static_cast<long>(i)] = as<double>(v[i], what);
    return out;
  }
  Vec vec(const std::string& key) const { return vec(at(key), key); }

  void only(std::initializer_list<const char*> keys) const {
    for (const auto& kv : node_) {
      const std::string k = kv.first.as<std::string>();
      if (std::none_of(keys.begin(), keys.end(), [&](const char* a) { return k == a; })) {
        config_fail(source_, kv.first.Mark(), "unknown key '" + k + "'");
      }
    }
  }

  const YAML::Node& node() const { return node_; }
  const std::string& source() const { return source_; }

 private:
  YAML::Node node_;
  std::string source_;
};

YAML::Node parse_yaml(const std::string& text, const std::string& source) {
  try {
    return YAML::Load(text);
  } catch (const YAML::ParserException& e) {
    config_fail(source, e.mark, e.msg);
  }
}

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::ConfigError, path + ": cannot open");
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::set<SignMask> read_components(const Reader& r, int k) {
  const YAML::Node list = r.at("components");
  if (!list.IsSequence()) config_fail(r.source(), list.Mark(), "'components' must be a list of sign strings");
  std::set<SignMask> out;
  for (const YAML::Node& item : list) {
    const std::string text = r.as<std::string>(item, "components");
    if (static_cast<int>(text.size()) != k) {
      config_fail(r.source(), item.Mark(), "sign string '" + text + "' needs one sign per face");
    }
    try {
      out.insert(parse_sign_mask(text));
    } catch (const Error& e) {
      config_fail(r.source(), item.Mark(), e.what());
    }
  }
  return out;
}

GraphFunction read_graph(const Reader& r) {
  const std::string kind = r.get<std::string>("kind");
  if (kind == "plane") {
    r.only({"kind", "base", "offset", "slope"});
    return GraphFunction::plane(r.vec("base"), r.get<double>("offset", 0.0), r.vec("slope"));
  }
  if (kind == "circle-arc") {
    r.only({"kind", "center", "radius", "branch"});
    return GraphFunction::circle_arc(r.vec("center"), r.get<double>("radius"), r.get<int>("branch"));
  }
  if (kind == "poly-coef") {
    r.only({"kind", "base", "offset", "coeffs"});
    const YAML::Node c = r.at("coeffs");
    if (!c.IsSequence()) config_fail(r.source(), c.Mark(), "'coeffs' must be a list of lists");
    std::vector<std::vector<double>> coeffs;
    for (const YAML::Node& row : c) {
      const Vec v = r.vec(row, "coeffs");
      coeffs.emplace_back(v.data(), v.data() + v.size());
    }
    return GraphFunction::poly(r.vec("base"), r.get<double>("offset", 0.0), std::move(coeffs));
  }
  config_fail(r.source(), r.at("kind").Mark(), "unknown graph kind '" + kind + "'");
}

Fixture read_fixture(const Reader& r) {
  const std::string type = r.get<std::string>("type");
  const std::string name = r.get<std::string>("name");
  try {
    if (type == "chart") {
      r.only({"type", "name", "dim", "corner", "M", "R", "theta0", "components", "graphs", "normals"});
      const int dim = r.get<int>("dim");
      const YAML::Node list = r.at("graphs");
      if (!list.IsSequence() || list.size() == 0) config_fail(r.source(), list.Mark(), "'graphs' must be a non-empty list");
      std::vector<GraphFunction> graphs;
      for (const YAML::Node& g : list) graphs.push_back(read_graph(Reader(g, r.source())));
      const int k = static_cast<int>(graphs.size());
      CornerChart chart = make_chart(dim, r.vec("corner"), std::move(graphs), r.get<double>("M"), r.get<double>("R"),
                                     read_components(r, k), r.get<double>("theta0"));
      if (r.has("normals")) {
        // Declared normals must agree with the ones derived from the graphs.
        const YAML::Node nl = r.at("normals");
        if (!nl.IsSequence() || static_cast<int>(nl.size()) != k) {
          config_fail(r.source(), nl.Mark(), "'normals' needs one vector per graph");
        }
        for (int i = 0; i < k; ++i) {
          const Vec nu = r.vec(nl[static_cast<std::size_t>(i)], "normals");
          if (nu.size() != dim || (nu.normalized() - chart.normals.col(i)).norm() > 1e-9) {
            config_fail(r.source(), nl[static_cast<std::size_t>(i)].Mark(), "normal disagrees with the graph");
          }
        }
      }
      return ChartFixture{name, std::move(chart)};
    }
    if (type == "cone") {
      r.only({"type", "name", "dim", "normals", "components", "vertex"});
      const int dim = r.get<int>("dim");
      const YAML::Node nl = r.at("normals");
      if (!nl.IsSequence() || nl.size() == 0) config_fail(r.source(), nl.Mark(), "'normals' must be a non-empty list");
      Mat N(dim, static_cast<long>(nl.size()));
      for (std::size_t i = 0; i < nl.size(); ++i) {
        const Vec nu = r.vec(nl[i], "normals");
        if (nu.size() != dim) config_fail(r.source(), nl[i].Mark(), "normal has the wrong dimension");
        N.col(static_cast<long>(i)) = nu.normalized();
      }
      const Vec vertex = r.has("vertex") ? r.vec("vertex") : Vec();
      return ConeFixture{name, make_cone(N, read_components(r, static_cast<int>(N.cols())), dim, vertex)};
    }
  } catch (const Error& e) {
    if (e.code() == ErrorCode::ConfigError) throw;
    config_fail(r.source(), r.node().Mark(), e.what());
  }
  config_fail(r.source(), r.at("type").Mark(), "unknown fixture type '" + type + "'");
}

CheckConfig make_check(const std::string& name, std::optional<double> min, std::optional<double> max,
                       std::optional<std::pair<double, double>> window = std::nullopt) {
  return CheckConfig{name, min, max, window};
}

}  // namespace

bool CheckConfig::passes(double value) const {
  if (!std::isfinite(value)) return false;
  if (min && value < *min) return false;
  if (max && value > *max) return false;
  return true;
}

Fixture parse_fixture(const std::string& text, const std::string& source) {
  return read_fixture(Reader(parse_yaml(text, source), source));
}

Fixture load_fixture(const std::string& path) {
  const std::string full = resolve_data_path(path);
  return parse_fixture(read_file(full), full);
}

CornerChart load_chart(const std::string& path) {
  Fixture f = load_fixture(path);
  if (auto* c = std::get_if<ChartFixture>(&f)) return c->chart;
  fail(ErrorCode::ConfigError, path + ": fixture is not a chart");
}

ConeSpec load_cone(const std::string& path) {
  Fixture f = load_fixture(path);
  if (auto* c = std::get_if<ConeFixture>(&f)) return c->cone;
  fail(ErrorCode::ConfigError, path + ": fixture is not a cone");
}

std::string data_dir() {
  if (const char* env = std::getenv("BLOWUP_DATA_DIR")) return env;
  return BLOWUP_DATA_DIR;
}

std::string resolve_data_path(const std::string& path) {
  const fs::path p(path);
  if (p.is_absolute() || fs::exists(p)) return path;
  return (fs::path(data_dir()) / p).string();
}

double ScenarioConfig::param(const std::string& key, double fallback) const {
  const auto it = params.find(key);
  return it == params.end() ? fallback : it->second;
}

const CheckConfig* ScenarioConfig::check(const std::string& check_name) const {
  for (const CheckConfig& c : checks) {
    if (c.name == check_name) return &c;
  }
  return nullptr;
}

const std::map<std::string, std::vector<CheckConfig>>& scenario_kinds() {
  using W = std::pair<double, double>;
  static const std::map<std::string, std::vector<CheckConfig>> kinds{
      {"radial", {make_check("max-rel-error", std::nullopt, 1e-3, W{0.0, 0.9})}},
      {"wedge-profile",
       {make_check("max-rel-error", std::nullopt, 1e-3, W{0.1, M_PI - 0.1}), make_check("bound-ratio", std::nullopt, 1.001)}},
      {"zonal-profile",
       {make_check("max-rel-error", std::nullopt, 2e-3, W{0.0, 0.5 * M_PI - 0.1}),
        make_check("bound-ratio", std::nullopt, 1.001)}},
      {"boundary-rate",
       {make_check("slope", 0.85, 1.15, W{0.01, 0.1}), make_check("r2", 0.9, std::nullopt, W{0.01, 0.1})}},
      {"corner-rate",
       {make_check("slope", 0.8, std::nullopt, W{0.02, 0.2}), make_check("distance-slope", 0.8, std::nullopt, W{0.02, 0.2}),
        make_check("r2", 0.9, std::nullopt, W{0.02, 0.2}), make_check("form-agreement", std::nullopt, 2.0, W{0.02, 0.2})}},
      {"interior-rays",
       {make_check("slope", 0.8, std::nullopt, W{0.02, 0.2}), make_check("constant-ratio", std::nullopt, 3.0, W{0.02, 0.2})}},
      {"levels",
       {make_check("max-decrease", std::nullopt, 1e-9), make_check("sandwich-pass-fraction", 1.0, std::nullopt),
        make_check("sandwich-excess", std::nullopt, 1e-3)}},
      {"field-bounds",
       {make_check("bound-ratio", std::nullopt, 1.02), make_check("derivative-slope", std::nullopt, 0.5, W{0.05, 0.3})}},
      {"spheres", {make_check("pass-fraction", 1.0, std::nullopt), make_check("chord-error", std::nullopt, 1e-10)}},
      {"conformal", {make_check("pde-residual", std::nullopt, 1e-2), make_check("jacobian", std::nullopt, 1e-6)}},
      {"anisotropy", {make_check("slope", std::nullopt, 0.1), make_check("difference-spread", std::nullopt, 2.0)}},
      {"stability", {make_check("ratio-spread", std::nullopt, 2.0)}},
      {"homogeneity", {make_check("max-rel-error", std::nullopt, 1e-12)}},
      {"cone-sandwich", {make_check("pass-fraction", 1.0, std::nullopt)}},
  };
  return kinds;
}

ScenarioConfig parse_scenario(const std::string& text, const std::string& source) {
  const Reader r(parse_yaml(text, source), source);
  r.only({"name", "anchor", "kind", "n", "fixture", "domain", "method", "grid", "levels", "params", "checks", "output", "seed"});
  ScenarioConfig c;
  c.source = source;
  c.name = r.get<std::string>("name");
  c.anchor = r.get<std::string>("anchor");
  c.kind = r.get<std::string>("kind");
  const auto kind_it = scenario_kinds().find(c.kind);
  if (kind_it == scenario_kinds().end()) config_fail(source, r.at("kind").Mark(), "unknown scenario kind '" + c.kind + "'");
  c.n = r.get<int>("n", 3);
  if (c.n < 3) config_fail(source, r.at("n").Mark(), "n must be at least 3");
  c.fixture = r.get<std::string>("fixture", "");
  c.domain = r.get<std::string>("domain", "");
  c.method = r.get<std::string>("method", "");
  c.output = r.get<std::string>("output", "out/" + c.name);
  c.seed = r.get<std::uint64_t>("seed", c.seed);
  if (r.has("grid")) {
    const Reader g(r.at("grid"), source);
    g.only({"h", "J"});
    c.h = g.get<double>("h", c.h);
    c.J = g.get<int>("J", c.J);
    if (!(c.h > 0) || c.J < 0) config_fail(source, g.node().Mark(), "grid needs h > 0 and J >= 0");
  }
  if (r.has("levels")) {
    const Reader l(r.at("levels"), source);
    l.only({"base", "factor", "count"});
    c.schedule = {l.get<double>("base"), l.get<double>("factor"), l.get<int>("count")};
    c.schedule_set = true;
    if (!(c.schedule.base > 0) || !(c.schedule.factor > 1) || c.schedule.count < 3) {
      config_fail(source, l.node().Mark(), "levels need base > 0, factor > 1 and count >= 3");
    }
  }
  if (r.has("params")) {
    const Reader p(r.at("params"), source);
    for (const auto& kv : p.node()) c.params[kv.first.as<std::string>()] = p.as<double>(kv.second, kv.first.as<std::string>());
  }
  const std::vector<CheckConfig>& known = kind_it->second;
  if (r.has("checks")) {
    const YAML::Node list = r.at("checks");
    if (!list.IsSequence()) config_fail(source, list.Mark(), "'checks' must be a list");
    for (const YAML::Node& item : list) {
      const Reader ck(item, source);
      ck.only({"name", "min", "max", "window"});
      const std::string cname = ck.get<std::string>("name");
      const auto def = std::find_if(known.begin(), known.end(), [&](const CheckConfig& k) { return k.name == cname; });
      if (def == known.end()) config_fail(source, ck.at("name").Mark(), "check '" + cname + "' is not offered by kind " + c.kind);
      CheckConfig cfg = *def;
      if (ck.has("min")) cfg.min = ck.get<double>("min");
      if (ck.has("max")) cfg.max = ck.get<double>("max");
      for (const auto& bound : {cfg.min, cfg.max}) {
        if (bound && !(*bound > 0)) config_fail(source, item.Mark(), "thresholds must be positive");
      }
      if (ck.has("window")) {
        const Vec w = ck.vec("window");
        if (w.size() != 2 || !(w[0] >= 0) || !(w[1] > w[0])) config_fail(source, ck.at("window").Mark(), "window needs 0 <= lo < hi");
        cfg.window = std::make_pair(w[0], w[1]);
      }
      c.checks.push_back(cfg);
    }
  } else {
    c.checks = known;
  }
  return c;
}

ScenarioConfig load_scenario(const std::string& path) {
  const std::string full = resolve_data_path(path);
  return parse_scenario(read_file(full), full);
}

Domain2D scenario_domain(const ScenarioConfig& c) {
  const double omega = c.param("omega", 2.0 * M_PI / 3.0);
  if (c.domain == "disk") return make_disk(Point2(c.param("cx", 0.0), c.param("cy", 0.0)), c.param("radius", 1.0));
  if (c.domain == "rectangle") {
    const double w = c.param("width", 2.0), ht = c.param("height", 1.0);
    return make_polygon({{-0.5 * w, 0.0}, {0.5 * w, 0.0}, {0.5 * w, ht}, {-0.5 * w, ht}});
  }
  if (c.domain == "ice-cream") return make_ice_cream(omega, c.param("D", 1.0));
  if (c.domain == "line-arc") return make_line_arc(omega, c.param("rho", 1.0));
  fail(ErrorCode::ConfigError, c.source + ": unknown domain '" + c.domain + "'");
}

std::vector<CatalogEntry> list_scenarios() {
  std::vector<CatalogEntry> out;
  const fs::path dir = fs::path(data_dir()) / "scenarios";
  if (!fs::is_directory(dir)) return out;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.path().extension() != ".yaml") continue;
    const ScenarioConfig c = load_scenario(entry.path().string());
    out.push_back({c.name, c.anchor, c.kind, entry.path().string()});
  }
  std::sort(out.begin(), out.end(), [](const CatalogEntry& a, const CatalogEntry& b) { return a.name < b.name; });
  return out;
}

}  // namespace blowup
