#include "scoredyn/mixture.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include <boost/math/special_functions/gamma.hpp>

#include "scoredyn/quadrature.hpp"
#include "scoredyn/special_functions.hpp"

namespace scoredyn {

void ModelConfig::validate() const {
  if (d < 1) throw InvalidArgs("model: dimension d must be at least 1");
  if (!std::isfinite(alpha)) throw InvalidArgs("model: alpha must be finite");
  if (!(sigma_eps > 0.0) || !std::isfinite(sigma_eps))
    throw InvalidArgs("model: sigma_eps must be finite and positive");
  if (!(sigma_T > sigma_eps) || !std::isfinite(sigma_T))
    throw InvalidArgs("model: sigma_T must be finite and exceed sigma_eps");
}

double ModelConfig::k_bound() const {
  if (!(alpha > -d)) throw InvalidArgs("model: k bound requires alpha > -d");
  return std::sqrt(2.0 * (d + alpha + 2.0) / (3.0 * (d + alpha)));
}

EmpiricalMeasure::EmpiricalMeasure(std::vector<Vector> points)
    : EmpiricalMeasure(points, std::vector<double>(points.size(), 1.0)) {}

EmpiricalMeasure::EmpiricalMeasure(std::vector<Vector> points, std::vector<double> weights)
    : points_(std::move(points)), weights_(std::move(weights)) {
  if (points_.empty()) throw InvalidArgs("measure: at least one point is required");
  if (weights_.size() != points_.size())
    throw InvalidArgs("measure: weight count does not match point count");
  const auto dim = points_.front().size();
  if (dim == 0) throw InvalidArgs("measure: points must have positive dimension");
  double total = 0.0;
  for (std::size_t j = 0; j < points_.size(); ++j) {
    if (static_cast<std::size_t>(points_[j].size()) != static_cast<std::size_t>(dim))
      throw InvalidArgs("measure: point " + std::to_string(j) + " has the wrong dimension");
    if (!points_[j].allFinite())
      throw InvalidArgs("measure: point " + std::to_string(j) + " is not finite");
    if (!(weights_[j] >= 0.0) || !std::isfinite(weights_[j]))
      throw InvalidArgs("measure: weight " + std::to_string(j) + " is negative or not finite");
    total += weights_[j];
  }
  if (!(total > 0.0)) throw InvalidArgs("measure: weights sum to zero");
  log_weights_.resize(weights_.size());
  for (std::size_t j = 0; j < weights_.size(); ++j) {
    weights_[j] /= total;
    log_weights_[j] = weights_[j] > 0.0 ? std::log(weights_[j])
                                        : -std::numeric_limits<double>::infinity();
    support_radius_ = std::max(support_radius_, points_[j].norm());
  }
}

ScoreField::ScoreField(ModelConfig config, EmpiricalMeasure measure)
    : config_(config), measure_(std::move(measure)) {
  config_.validate();
  if (measure_.dimension() != config_.d)
    throw InvalidArgs("score field: measure dimension " + std::to_string(measure_.dimension()) +
                      " does not match model dimension " + std::to_string(config_.d));
  density_normalizer_ = normalizer(config_.lyapunov_shape());
}

void ScoreField::check_point(const Vector& x) const {
  if (x.size() != config_.d) throw InvalidArgs("evaluation point has the wrong dimension");
  if (!x.allFinite()) throw InvalidArgs("evaluation point is not finite");
}

LogPositive ScoreField::big_l(double s, const Vector& x) const {
  check_point(x);
  const double a = config_.sigma_eps;
  const double b = config_.sigma_T;
  LogSumAccumulator acc;
  for (std::size_t j = 0; j < measure_.size(); ++j) {
    if (measure_.weights_[j] == 0.0) continue;
    const double z = 0.5 * (x - measure_.points_[j]).squaredNorm();
    acc.add_log(measure_.log_weights_[j] + phi(PhiArgs{a, b, s, z}).log());
  }
  return acc.result();
}

ScaledVector ScoreField::grad_big_l_scaled(double s, const Vector& x) const {
  check_point(x);
  const double a = config_.sigma_eps;
  const double b = config_.sigma_T;
  const std::size_t n = measure_.size();
  std::vector<double> log_terms(n, -std::numeric_limits<double>::infinity());
  double top = -std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < n; ++j) {
    if (measure_.weights_[j] == 0.0) continue;
    const double z = 0.5 * (x - measure_.points_[j]).squaredNorm();
    log_terms[j] = measure_.log_weights_[j] + phi(PhiArgs{a, b, s + 1.0, z}).log();
    top = std::max(top, log_terms[j]);
  }
  ScaledVector out{top, Vector::Zero(config_.d)};
  for (std::size_t j = 0; j < n; ++j) {
    if (measure_.weights_[j] == 0.0) continue;
    out.direction += std::exp(log_terms[j] - top) * (measure_.points_[j] - x);
  }
  return out;
}

Vector ScoreField::grad_big_l(double s, const Vector& x) const {
  return grad_big_l_scaled(s, x).value();
}

Matrix ScoreField::hess_big_l(double s, const Vector& x) const {
  check_point(x);
  const double a = config_.sigma_eps;
  const double b = config_.sigma_T;
  const std::size_t n = measure_.size();
  std::vector<double> log_outer(n), log_diag(n);
  double top = -std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < n; ++j) {
    if (measure_.weights_[j] == 0.0) continue;
    const double z = 0.5 * (x - measure_.points_[j]).squaredNorm();
    log_outer[j] = measure_.log_weights_[j] + phi(PhiArgs{a, b, s + 2.0, z}).log();
    log_diag[j] = measure_.log_weights_[j] + phi(PhiArgs{a, b, s + 1.0, z}).log();
    top = std::max({top, log_outer[j], log_diag[j]});
  }
  Matrix h = Matrix::Zero(config_.d, config_.d);
  double diag = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    if (measure_.weights_[j] == 0.0) continue;
    const Vector delta = measure_.points_[j] - x;
    h.noalias() += std::exp(log_outer[j] - top) * delta * delta.transpose();
    diag += std::exp(log_diag[j] - top);
  }
  h.diagonal().array() -= diag;
  h *= std::exp(top);
  return 0.5 * (h + h.transpose());
}

Vector ScoreField::s_star(const Vector& x) const {
  check_point(x);
  const double a = config_.sigma_eps;
  const double b = config_.sigma_T;
  const double num_shape = 0.5 * (config_.d + config_.alpha);
  const double den_shape = 0.5 * (config_.d + 2.0 * config_.alpha - 2.0);
  const std::size_t n = measure_.size();
  std::vector<double> log_num(n, -std::numeric_limits<double>::infinity());
  double top = -std::numeric_limits<double>::infinity();
  LogSumAccumulator den;
  for (std::size_t j = 0; j < n; ++j) {
    if (measure_.weights_[j] == 0.0) continue;
    const double z = 0.5 * (x - measure_.points_[j]).squaredNorm();
    log_num[j] = measure_.log_weights_[j] + phi(PhiArgs{a, b, num_shape, z}).log();
    den.add_log(measure_.log_weights_[j] + phi(PhiArgs{a, b, den_shape, z}).log());
    top = std::max(top, log_num[j]);
  }
  Vector direction = Vector::Zero(config_.d);
  for (std::size_t j = 0; j < n; ++j) {
    if (measure_.weights_[j] == 0.0) continue;
    direction += std::exp(log_num[j] - top) * (measure_.points_[j] - x);
  }
  return std::exp(top - den.log()) * direction;
}

LogPositive ScoreField::normalizer(double s) const {
  if (!std::isfinite(s)) throw InvalidArgs("normalizer: shape must be finite");
  const double a = config_.sigma_eps;
  const double b = config_.sigma_T;
  const int d = config_.d;
  // Integrate Phi(s, r^2/2) r^d over rho = log r.
  auto log_integrand = [&](double rho) {
    return phi(PhiArgs{a, b, s, 0.5 * std::exp(2.0 * rho)}).log() + d * rho;
  };

  const double rho_a = std::log(a);
  const double rho_b = std::log(b);
  double peak = -std::numeric_limits<double>::infinity();
  double rho_peak = rho_a;
  for (double rho = rho_a - 5.0; rho <= rho_b + 3.0; rho += 0.25) {
    const double v = log_integrand(rho);
    if (v > peak) {
      peak = v;
      rho_peak = rho;
    }
  }
  // Truncate where the integrand has fallen 60 nats below its peak.
  constexpr double kDepth = 60.0;
  constexpr int kMaxSteps = 4000;
  double rho_left = rho_peak;
  double rho_right = rho_peak;
  int steps = 0;
  while (log_integrand(rho_left) > peak - kDepth) {
    rho_left -= 0.5;
    if (++steps > kMaxSteps) throw NumericAccuracy("normalizer: left tail does not decay");
  }
  steps = 0;
  while (log_integrand(rho_right) > peak - kDepth) {
    rho_right += 0.125;
    if (++steps > kMaxSteps) throw NumericAccuracy("normalizer: right tail does not decay");
  }

  quadrature::AdaptiveOptions opts;
  opts.rel_tol = 1e-8;
  opts.max_depth = 20;
  std::vector<double> breaks{rho_left};
  for (double knot : {rho_a, rho_peak, rho_b})
    if (knot > breaks.back() && knot < rho_right) breaks.push_back(knot);
  breaks.push_back(rho_right);
  std::sort(breaks.begin(), breaks.end());
  const auto est = quadrature::integrate(
      [&](double rho) { return std::exp(log_integrand(rho) - peak); }, breaks, opts);
  const double log_integral = peak + std::log(est.value);

  // Rigorous tail bounds: Phi(s, z) <= Phi(s, 0) and Phi(s, z) <= e^{-z/b^2} Phi(s, 0).
  const double log_phi0 = log_phi_at_zero(a, b, s).log();
  const double log_left_tail = log_phi0 + d * rho_left - std::log(static_cast<double>(d));
  const double x_right = 0.5 * std::exp(2.0 * rho_right) / (b * b);
  const double log_right_tail =
      log_phi0 + 0.5 * d * std::log(2.0 * b * b) - std::log(2.0) +
      std::log(boost::math::tgamma(0.5 * d, x_right));
  const double tail = std::exp(log_left_tail - log_integral) +
                      std::exp(log_right_tail - log_integral);
  if (!(tail <= opts.rel_tol))
    throw NumericAccuracy("normalizer: truncated tails exceed tolerance (" +
                          std::to_string(tail) + ")");

  const double log_sphere = std::log(2.0) + 0.5 * d * std::log(std::numbers::pi) -
                            std::lgamma(0.5 * d);
  return LogPositive::from_log(log_sphere + log_integral);
}

double ScoreField::p_tilde(const Vector& x) const {
  return std::exp(lyapunov(x).log() - density_normalizer_.log());
}

double ScoreField::growth_envelope() const {
  const double exponent = config_.alpha - 2.0;
  const double ratio_bound =
      std::max(std::pow(config_.sigma_eps, exponent), std::pow(config_.sigma_T, exponent));
  return ratio_bound * std::max(1.0, measure_.support_radius());
}

}  // namespace scoredyn
