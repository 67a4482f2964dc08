#pragma once

#include <random>
#include <vector>

#include "scoredyn/mixture.hpp"

namespace fixtures {

using scoredyn::EmpiricalMeasure;
using scoredyn::ModelConfig;
using scoredyn::ScoreField;
using scoredyn::Vector;

inline Vector vec(std::initializer_list<double> v) {
  Vector out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out[i++] = x;
  return out;
}

/// Five points in the plane; minimum pairwise distance exactly 1 (between the
/// first two), support radius |(0.3, 1.1)|.
inline EmpiricalMeasure five_points() {
  return EmpiricalMeasure({vec({0.0, 0.0}), vec({1.0, 0.0}), vec({0.3, 1.1}), vec({-0.9, 0.6}),
                           vec({-0.4, -1.0})});
}

inline EmpiricalMeasure three_points_1d() {
  return EmpiricalMeasure({vec({-1.0}), vec({0.2}), vec({1.5})}, {0.3, 0.5, 0.2});
}

inline EmpiricalMeasure random_measure(std::mt19937_64& rng, int d, int n) {
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.1, 1.0);
  std::vector<Vector> pts;
  std::vector<double> w;
  for (int j = 0; j < n; ++j) {
    Vector p(d);
    for (int i = 0; i < d; ++i) p[i] = normal(rng);
    pts.push_back(p);
    w.push_back(unit(rng));
  }
  return EmpiricalMeasure(pts, w);
}

inline Vector random_point(std::mt19937_64& rng, int d, double scale) {
  std::normal_distribution<double> normal(0.0, scale);
  Vector p(d);
  for (int i = 0; i < d; ++i) p[i] = normal(rng);
  return p;
}

}  // namespace fixtures
