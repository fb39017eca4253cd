#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "blowup/cone_solver.hpp"
#include "blowup/domain.hpp"
#include "blowup/geometry.hpp"

namespace blowup {

// Corner chart read from a fixture file.
struct ChartFixture {
  std::string name;
  CornerChart chart;
};

// Geometry-only cone (normals plus sign-vector components).
struct ConeFixture {
  std::string name;
  ConeSpec cone;
};

using Fixture = std::variant<ChartFixture, ConeFixture>;

// `source` names the text in diagnostics. Schema errors raise ConfigError with line and column.
Fixture parse_fixture(const std::string& text, const std::string& source = "<string>");
Fixture load_fixture(const std::string& path);
CornerChart load_chart(const std::string& path);
ConeSpec load_cone(const std::string& path);

// Root of the bundled fixtures/ and scenarios/ directories.
std::string data_dir();
// Relative paths resolve against data_dir(); absolute and existing paths are returned unchanged.
std::string resolve_data_path(const std::string& path);

// A check passes when its measured value lies in [min, max]; either bound may be absent.
struct CheckConfig {
  std::string name;
  std::optional<double> min, max;
  std::optional<std::pair<double, double>> window;
  bool passes(double value) const;
};

struct ScenarioConfig {
  std::string name;
  std::string anchor;  // the result the scenario verifies
  std::string kind;
  std::string source;  // file the config came from
  int n = 3;
  std::string fixture;  // chart fixture path
  std::string domain;   // disk | rectangle | ice-cream | line-arc
  std::string method;   // solver method where a kind offers more than one
  double h = 0.01;
  int J = 0;
  LevelSchedule schedule;
  bool schedule_set = false;
  std::map<std::string, double> params;  // kind-specific numeric parameters
  std::vector<CheckConfig> checks;
  std::string output;
  std::uint64_t seed = 20240601;

  double param(const std::string& key, double fallback) const;
  const CheckConfig* check(const std::string& name) const;
};

// Scenario kinds with the default settings of every check they understand.
const std::map<std::string, std::vector<CheckConfig>>& scenario_kinds();

ScenarioConfig parse_scenario(const std::string& text, const std::string& source = "<string>");
ScenarioConfig load_scenario(const std::string& path);

// Domain named in a scenario, built from its parameters (omega, D, rho, radius, width, height).
Domain2D scenario_domain(const ScenarioConfig& config);

struct CatalogEntry {
  std::string name;
  std::string anchor;
  std::string kind;
  std::string path;
};

// Bundled scenarios sorted by name.
std::vector<CatalogEntry> list_scenarios();

}  // namespace blowup
