#pragma once

#include <cstddef>
#include <vector>

#include "scoredyn/mixture.hpp"

namespace scoredyn {

struct GridAxis {
  double lo = -1.0;
  double hi = 1.0;
  std::size_t nodes = 3;  // >= 2 including both endpoints

  double spacing() const { return (hi - lo) / static_cast<double>(nodes - 1); }
  double node(std::size_t i) const { return lo + spacing() * static_cast<double>(i); }
};

/// Tensor-product uniform grid; nodes are enumerated with the first axis
/// varying fastest.
class Grid {
 public:
  explicit Grid(std::vector<GridAxis> axes);

  /// Same box on every axis.
  static Grid cube(int d, double lo, double hi, std::size_t nodes);

  int dimension() const { return static_cast<int>(axes_.size()); }
  std::size_t size() const { return size_; }
  const std::vector<GridAxis>& axes() const { return axes_; }

  Vector point(std::size_t flat_index) const;
  std::vector<std::size_t> multi_index(std::size_t flat_index) const;
  /// Composite trapezoid weight of a node.
  double trapezoid_weight(std::size_t flat_index) const;
  /// Same box with 2n - 1 nodes per axis (halved spacing, nested).
  Grid refined() const;

 private:
  std::vector<GridAxis> axes_;
  std::size_t size_ = 0;
};

}  // namespace scoredyn
