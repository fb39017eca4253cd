#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "blowup/cli.hpp"

using namespace blowup;
namespace fs = std::filesystem;

namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

int cli(std::vector<std::string> args) {
  args.insert(args.begin(), "blowup");
  std::vector<char*> argv;
  for (std::string& a : args) argv.push_back(a.data());
  return run_cli(static_cast<int>(argv.size()), argv.data());
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("blowup_cli_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

ErrorCode code_of_parse(const std::string& text) {
  try {
    parse_scenario(text);
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an error");
  return ErrorCode::InvalidArgument;
}

}  // namespace

TEST_CASE("bundled catalog") {
  const std::vector<CatalogEntry> a = list_scenarios();
  const std::vector<CatalogEntry> b = list_scenarios();
  REQUIRE(a.size() == b.size());
  std::set<std::string> names;
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].name == b[i].name);
    CHECK_FALSE(a[i].anchor.empty());
    CHECK(a[i].anchor.find('\n') == std::string::npos);
    if (i > 0) CHECK(a[i - 1].name < a[i].name);
    names.insert(a[i].name);
  }
  for (const char* required : {"thm3.1-disk", "thm1.1-wedge", "lemma6.2-spheres"}) CHECK(names.count(required) == 1);
  CHECK(cli({"list"}) == kExitOk);
}

TEST_CASE("malformed configs are reported with their location") {
  const fs::path dir = scratch("config");
  const std::string path = (dir / "bad.yaml").string();
  {
    std::ofstream out(path);
    out << "name: bad\nanchor: a\nkind: radial\nn: three\n";
  }
  try {
    load_scenario(path);
    FAIL("expected a config error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::ConfigError);
    CHECK(std::string(e.what()).find(path + ":4:") != std::string::npos);
  }
  CHECK(run_verify(path) == kExitConfigError);
  CHECK(run_verify("no-such-scenario") == kExitConfigError);
  CHECK(cli({"verify"}) == kExitConfigError);
  CHECK(code_of_parse("name: x\nanchor: a\nkind: nonsense\n") == ErrorCode::ConfigError);
}

TEST_CASE("scenario runs are reproducible") {
  const fs::path dir = scratch("runs");
  setenv("BLOWUP_OUTPUT_DIR", dir.string().c_str(), 1);
  CHECK(run_verify("radial-ball-n3") == kExitOk);
  CHECK(run_verify("wedge-corner-rate") == kExitOk);

  const ScenarioConfig c = load_scenario(resolve_data_path("scenarios/radial-ball-n3.yaml"));
  const ScenarioOutcome first = run_scenario(c);
  std::vector<std::string> texts;
  for (const std::string& f : first.files) texts.push_back(slurp(f));
  const ScenarioOutcome second = run_scenario(c);
  REQUIRE(first.files == second.files);
  for (std::size_t i = 0; i < texts.size(); ++i) CHECK(slurp(second.files[i]) == texts[i]);
  CHECK(first.passed());
  const std::string report = slurp(first.files.back());
  CHECK(report.rfind(report_header(), 0) == 0);
  unsetenv("BLOWUP_OUTPUT_DIR");
}

TEST_CASE("field and number serialization") {
  CHECK(format_double(0.1) == "0.1");
  CHECK(format_double(1.0) == "1");
  CHECK(std::stod(format_double(M_PI)) == M_PI);
  const ScalarField f = solve_cross_section_substitution(3, make_disk(Point2::Zero(), 1.0), 0.1).field;
  const ScalarField g = field_from_json(field_to_json(f));
  CHECK(g.n == f.n);
  CHECK(g.grid.nx == f.grid.nx);
  CHECK(g.grid.ny == f.grid.ny);
  CHECK(g.grid.h == f.grid.h);
  CHECK(g.mask == f.mask);
  CHECK(g.u == f.u);
  const std::string csv = field_to_csv(f);
  CHECK(static_cast<std::size_t>(std::count(csv.begin(), csv.end(), '\n')) ==
        static_cast<std::size_t>(f.grid.nx * f.grid.ny + 1));
}
