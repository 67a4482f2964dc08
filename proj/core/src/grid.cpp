#include "scoredyn/grid.hpp"

#include <cmath>

#include "scoredyn/errors.hpp"

namespace scoredyn {

Grid::Grid(std::vector<GridAxis> axes) : axes_(std::move(axes)) {
  if (axes_.empty()) throw InvalidArgs("grid: at least one axis is required");
  size_ = 1;
  for (const auto& axis : axes_) {
    if (axis.nodes < 2) throw InvalidArgs("grid: each axis needs at least two nodes");
    if (!(axis.hi > axis.lo) || !std::isfinite(axis.lo) || !std::isfinite(axis.hi))
      throw InvalidArgs("grid: each axis needs finite bounds lo < hi");
    size_ *= axis.nodes;
  }
}

Grid Grid::cube(int d, double lo, double hi, std::size_t nodes) {
  if (d < 1) throw InvalidArgs("grid: dimension must be positive");
  return Grid(std::vector<GridAxis>(static_cast<std::size_t>(d), GridAxis{lo, hi, nodes}));
}

std::vector<std::size_t> Grid::multi_index(std::size_t flat_index) const {
  std::vector<std::size_t> idx(axes_.size());
  for (std::size_t k = 0; k < axes_.size(); ++k) {
    idx[k] = flat_index % axes_[k].nodes;
    flat_index /= axes_[k].nodes;
  }
  return idx;
}

Vector Grid::point(std::size_t flat_index) const {
  const auto idx = multi_index(flat_index);
  Vector x(static_cast<Eigen::Index>(axes_.size()));
  for (std::size_t k = 0; k < axes_.size(); ++k) x[static_cast<Eigen::Index>(k)] = axes_[k].node(idx[k]);
  return x;
}

double Grid::trapezoid_weight(std::size_t flat_index) const {
  const auto idx = multi_index(flat_index);
  double w = 1.0;
  for (std::size_t k = 0; k < axes_.size(); ++k) {
    const bool edge = idx[k] == 0 || idx[k] + 1 == axes_[k].nodes;
    w *= axes_[k].spacing() * (edge ? 0.5 : 1.0);
  }
  return w;
}

Grid Grid::refined() const {
  auto axes = axes_;
  for (auto& axis : axes) axis.nodes = 2 * axis.nodes - 1;
  return Grid(std::move(axes));
}

}  // namespace scoredyn
