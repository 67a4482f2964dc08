#pragma once

#include <istream>
#include <string>
#include <vector>

#include "scoredyn/mixture.hpp"

namespace scoredyn::cli {

/// Reads a point set from CSV: d numeric columns per row, optionally followed
/// by a weight column. A first row that does not parse as numbers is taken as
/// a header. Blank lines and lines starting with '#' are skipped.
///
/// With expected_dim > 0 a row of expected_dim + 1 columns carries a weight;
/// with expected_dim == 0 every column is a coordinate unless the header names
/// the last column "weight" (or "w").
EmpiricalMeasure read_measure_csv(std::istream& in, int expected_dim = 0,
                                  const std::string& source = "<stream>");
EmpiricalMeasure load_measure_csv(const std::string& path, int expected_dim = 0);

/// Inline points with optional weights (empty means uniform).
EmpiricalMeasure make_measure(const std::vector<std::vector<double>>& points,
                              const std::vector<double>& weights, int expected_dim = 0);

}  // namespace scoredyn::cli
