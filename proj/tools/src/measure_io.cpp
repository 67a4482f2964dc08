#include "scoredyn_cli/measure_io.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "scoredyn/errors.hpp"

namespace scoredyn::cli {

namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) out.push_back(trim(cell));
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

bool parse_double(const std::string& text, double& value) {
  if (text.empty()) return false;
  const char* begin = text.data();
  const char* end = begin + text.size();
  if (*begin == '+') ++begin;
  const auto [ptr, ec] = std::from_chars(begin, end, value);
  return ec == std::errc() && ptr == end;
}

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

}  // namespace

EmpiricalMeasure read_measure_csv(std::istream& in, int expected_dim, const std::string& source) {
  std::vector<std::vector<double>> rows;
  std::vector<std::size_t> row_lines;
  std::string line;
  std::size_t line_no = 0;
  bool seen_data = false;
  bool header_weight = false;
  std::size_t width = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string text = trim(line);
    if (text.empty() || text[0] == '#') continue;
    const auto cells = split(text);
    std::vector<double> row(cells.size());
    bool numeric = true;
    for (std::size_t i = 0; i < cells.size(); ++i) numeric = numeric && parse_double(cells[i], row[i]);
    if (!numeric) {
      if (!seen_data && rows.empty() && width == 0) {
        const std::string last = lower(cells.back());
        header_weight = last == "weight" || last == "w";
        width = cells.size();
        seen_data = true;
        continue;
      }
      throw ParseError(source + ":" + std::to_string(line_no) + ": non-numeric value in row");
    }
    seen_data = true;
    if (width == 0) width = row.size();
    if (row.size() != width)
      throw ParseError(source + ":" + std::to_string(line_no) + ": row has " +
                       std::to_string(row.size()) + " columns, expected " + std::to_string(width));
    rows.push_back(std::move(row));
    row_lines.push_back(line_no);
  }
  if (rows.empty()) throw ParseError(source + ": no data rows");

  std::size_t dim = width;
  bool weighted = false;
  if (expected_dim > 0) {
    const auto d = static_cast<std::size_t>(expected_dim);
    if (width == d + 1) {
      weighted = true;
    } else if (width != d) {
      throw InvalidArgs(source + ": rows have " + std::to_string(width) +
                        " columns but the model dimension is " + std::to_string(d));
    }
    dim = d;
  } else if (header_weight) {
    if (width < 2) throw ParseError(source + ": weight column without coordinates");
    weighted = true;
    dim = width - 1;
  }

  std::vector<Vector> points;
  std::vector<double> weights;
  for (std::size_t r = 0; r < rows.size(); ++r) {
    Vector p(static_cast<Eigen::Index>(dim));
    for (std::size_t c = 0; c < dim; ++c) p[static_cast<Eigen::Index>(c)] = rows[r][c];
    if (!p.allFinite())
      throw ParseError(source + ":" + std::to_string(row_lines[r]) + ": non-finite coordinate");
    points.push_back(std::move(p));
    if (weighted) {
      const double w = rows[r][dim];
      if (!(w >= 0.0) || !std::isfinite(w))
        throw InvalidArgs(source + ":" + std::to_string(row_lines[r]) + ": negative weight");
      weights.push_back(w);
    }
  }
  return weighted ? EmpiricalMeasure(std::move(points), std::move(weights))
                  : EmpiricalMeasure(std::move(points));
}

EmpiricalMeasure load_measure_csv(const std::string& path, int expected_dim) {
  std::ifstream in(path);
  if (!in) throw InvalidArgs("cannot open measure file " + path);
  return read_measure_csv(in, expected_dim, path);
}

EmpiricalMeasure make_measure(const std::vector<std::vector<double>>& points,
                              const std::vector<double>& weights, int expected_dim) {
  if (points.empty()) throw InvalidArgs("measure: at least one point is required");
  const std::size_t dim = points.front().size();
  if (dim == 0) throw InvalidArgs("measure: points must have at least one coordinate");
  if (expected_dim > 0 && dim != static_cast<std::size_t>(expected_dim))
    throw InvalidArgs("measure: point dimension does not match the model dimension");
  std::vector<Vector> pts;
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (points[i].size() != dim)
      throw InvalidArgs("measure: point " + std::to_string(i) + " has the wrong dimension");
    pts.push_back(Eigen::Map<const Vector>(points[i].data(), static_cast<Eigen::Index>(dim)));
  }
  if (weights.empty()) return EmpiricalMeasure(std::move(pts));
  if (weights.size() != points.size())
    throw InvalidArgs("measure: weights and points differ in length");
  for (double w : weights)
    if (!(w >= 0.0)) throw InvalidArgs("measure: negative weight");
  return EmpiricalMeasure(std::move(pts), weights);
}

}  // namespace scoredyn::cli
