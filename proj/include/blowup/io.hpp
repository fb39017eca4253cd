#pragma once

#include <optional>
#include <string>
#include <vector>

#include "blowup/field_solver.hpp"

namespace blowup {

// Shortest round-trip decimal form of a double.
std::string format_double(double value);

// Writes text to path, creating parent directories.
void write_text(const std::string& path, const std::string& text);

// One CSV row per grid node: x, y, mask, u.
std::string field_to_csv(const ScalarField& field);
// Grid metadata plus values, with null off the mask.
std::string field_to_json(const ScalarField& field);
ScalarField field_from_json(const std::string& text);

// r, u, error per radial node.
std::string radial_to_csv(const RadialProfile& profile);

struct ReportRow {
  std::string scenario;
  std::string anchor;
  std::string check;
  double value = 0.0;
  std::optional<double> constant;
  std::optional<std::pair<double, double>> window;
  std::optional<double> min, max;
  bool passed = false;
};

std::string report_header();
std::string report_to_csv(const std::vector<ReportRow>& rows);

}  // namespace blowup
