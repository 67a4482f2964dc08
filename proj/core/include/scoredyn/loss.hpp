#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>

#include "scoredyn/field_spec.hpp"
#include "scoredyn/grid.hpp"
#include "scoredyn/mixture.hpp"
#include "scoredyn/parallel.hpp"
#include "scoredyn/schedule.hpp"

namespace scoredyn {

/// (2 pi)^{-d/2} sum_j w_j Phi((d + 2 alpha - 2)/2, z_j): the time integral of
/// sigma_t^{-2 alpha} g(t)^2 p_{sigma_t}(x) over [epsilon, T].
double i1(const ScoreField& field, const Vector& x);
/// (2 pi)^{-d/2} sum_j w_j Phi((d + alpha)/2, z_j) (x_j - x).
Vector i2(const ScoreField& field, const Vector& x);
/// (2 pi)^{-d/2} sum_j w_j Phi((d + 2)/2, z_j) |x_j - x|^2, an upper bound for
/// the constant part of the objective density.
double i3_upper(const ScoreField& field, const Vector& x);

struct McEstimate {
  double estimate = 0.0;
  double std_error = 0.0;
  std::size_t samples = 0;
};

struct McDifference {
  /// objective(first) - objective(second) on common random numbers.
  double delta = 0.0;
  /// Standard error of the paired difference.
  double std_error = 0.0;
  McEstimate first;
  McEstimate second;
};

/// Sample layout of the Monte-Carlo objective. Each of the n_t time draws is
/// one independent unit holding n_data data draws with n_noise noise draws
/// each; standard errors come from the spread of the unit means.
struct McSampling {
  std::size_t n_t = 1000;
  std::size_t n_data = 1;
  std::size_t n_noise = 1;
  std::uint64_t seed = 0;
  /// Time draws per RNG block. Blocks are the unit of parallel work and of
  /// stream derivation, so results do not depend on the thread count.
  std::size_t block_size = 256;
  Parallelism parallelism{};
  /// Time weighting lambda(t); g(t)^2 when empty.
  std::function<double(double)> weighting;

  void validate() const;
};

/// Unbiased estimate of
///   \int_eps^T \int\int |sigma_t^{-alpha} s_theta(x) - grad log p_t(x | x~)|^2
///       p_t(x | x~) dx dmu(x~) lambda(t) dt
/// with t uniform on [epsilon, T] and x = x~ + sigma_t xi.
McEstimate mc_objective(const ScoreField& field, const FieldSpec& model, const Schedule& schedule,
                        const McSampling& sampling);

McDifference mc_objective_difference(const ScoreField& field, const FieldSpec& first,
                                     const FieldSpec& second, const Schedule& schedule,
                                     const McSampling& sampling);

/// Trapezoid value of \int (2 pi)^{-d/2} L((d + 2 alpha)/2 - 1, x) |s_theta(x) - s*(x)|^2 dx
/// over the grid box; d <= 3.
double weighted_l2_gap(const FieldSpec& model, const ScoreField& field, const Grid& grid);

/// Importance-sampling approximation of the same integral for any d, drawing
/// from sum_j w_j N(x_j, sigma_T^2 I).
McEstimate weighted_l2_gap_mc(const FieldSpec& model, const ScoreField& field, std::size_t samples,
                              std::uint64_t seed, Parallelism parallelism = {});

}  // namespace scoredyn
