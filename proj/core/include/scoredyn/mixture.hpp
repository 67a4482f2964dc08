#pragma once

#include <cstddef>
#include <vector>

#include <Eigen/Dense>

#include "scoredyn/log_positive.hpp"

namespace scoredyn {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Model constants: dimension d, conditioning exponent alpha and the noise
/// bounds sigma_eps < sigma_T.
struct ModelConfig {
  int d = 1;
  double alpha = 1.0;
  double sigma_eps = 0.1;
  double sigma_T = 10.0;

  void validate() const;

  /// Shape of the Lyapunov function L = L((d + alpha)/2 - 1, .).
  double lyapunov_shape() const { return 0.5 * (d + alpha) - 1.0; }
  /// Shape of the denominator L~ = L((d + 2 alpha)/2 - 1, .) of the optimal field.
  double denominator_shape() const { return 0.5 * (d + 2.0 * alpha) - 1.0; }
  /// Upper bound sqrt(2(d+alpha+2) / (3(d+alpha))) on the overfitting radius factor k.
  /// Requires alpha > -d.
  double k_bound() const;
};

/// Finite weighted point set standing in for the data distribution.
class EmpiricalMeasure {
 public:
  /// Uniform weights.
  explicit EmpiricalMeasure(std::vector<Vector> points);
  /// Weights must be non-negative with a positive total; they are normalized.
  EmpiricalMeasure(std::vector<Vector> points, std::vector<double> weights);

  static EmpiricalMeasure dirac(const Vector& at) { return EmpiricalMeasure({at}); }

  int dimension() const { return static_cast<int>(points_.front().size()); }
  std::size_t size() const { return points_.size(); }
  const std::vector<Vector>& points() const { return points_; }
  const std::vector<double>& weights() const { return weights_; }
  const Vector& point(std::size_t j) const { return points_[j]; }
  double weight(std::size_t j) const { return weights_[j]; }
  /// max_j |x_j|
  double support_radius() const { return support_radius_; }

 private:
  std::vector<Vector> points_;
  std::vector<double> weights_;
  std::vector<double> log_weights_;
  double support_radius_ = 0.0;

  friend class ScoreField;
};

/// A vector scaled by exp(log_scale); lets sums of kernel terms leave the
/// double range without under- or overflowing.
struct ScaledVector {
  double log_scale = 0.0;
  Vector direction;

  Vector value() const { return std::exp(log_scale) * direction; }
};

/// The smoothed-measure functionals of one (config, measure) pair:
///   L(s, x)   = sum_j w_j Phi(s, |x - x_j|^2 / 2)
///   s*(x)     = grad L((d+alpha)/2 - 1, x) / L((d+2 alpha)/2 - 1, x)
///   p~(x)     = L((d+alpha)/2 - 1, x) / C((d+alpha)/2 - 1)
/// Immutable after construction and safe to share between threads.
class ScoreField {
 public:
  ScoreField(ModelConfig config, EmpiricalMeasure measure);

  const ModelConfig& config() const { return config_; }
  const EmpiricalMeasure& measure() const { return measure_; }
  int dimension() const { return config_.d; }

  LogPositive big_l(double s, const Vector& x) const;
  /// sum_j w_j Phi(s + 1, z_j) (x_j - x)
  Vector grad_big_l(double s, const Vector& x) const;
  ScaledVector grad_big_l_scaled(double s, const Vector& x) const;
  /// sum_j w_j [Phi(s + 2, z_j)(x_j - x)(x_j - x)^T - Phi(s + 1, z_j) I]
  Matrix hess_big_l(double s, const Vector& x) const;

  /// Optimal model under multiplicative noise conditioning.
  Vector s_star(const Vector& x) const;

  /// C(s) = (2 pi^{d/2} / Gamma(d/2)) \int_0^inf Phi(s, r^2/2) r^{d-1} dr by
  /// adaptive quadrature in log r (relative tolerance 1e-8).
  LogPositive normalizer(double s) const;
  /// Smoothed data density p~(x).
  double p_tilde(const Vector& x) const;

  /// L((d+alpha)/2 - 1, x) and L((d+2 alpha)/2 - 1, x).
  LogPositive lyapunov(const Vector& x) const { return big_l(config_.lyapunov_shape(), x); }
  LogPositive lyapunov_denominator(const Vector& x) const {
    return big_l(config_.denominator_shape(), x);
  }

  /// K such that |s*(x)| <= K (1 + |x|) everywhere.
  double growth_envelope() const;

 private:
  void check_point(const Vector& x) const;

  ModelConfig config_;
  EmpiricalMeasure measure_;
  LogPositive density_normalizer_;
};

}  // namespace scoredyn
