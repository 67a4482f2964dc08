#include "scoredyn/schedule.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <boost/math/tools/roots.hpp>

#include "scoredyn/errors.hpp"

namespace scoredyn {

Schedule Schedule::geometric(double epsilon, double T, double sigma_eps, double sigma_T) {
  if (!(epsilon > 0.0) || !(T > epsilon) || !std::isfinite(T))
    throw InvalidArgs("schedule: require 0 < epsilon < T < inf");
  if (!(sigma_eps > 0.0) || !(sigma_T > sigma_eps) || !std::isfinite(sigma_T))
    throw InvalidArgs("schedule: require 0 < sigma_eps < sigma_T < inf");
  Schedule s;
  s.kind_ = ScheduleKind::geometric;
  s.epsilon_ = epsilon;
  s.T_ = T;
  s.sigma_eps_ = sigma_eps;
  s.sigma_T_ = sigma_T;
  s.log_ratio_ = std::log(sigma_T / sigma_eps);
  return s;
}

void Schedule::check_time(double t) const {
  if (!(t >= 0.0 && t <= T_))
    throw InvalidArgs("schedule: time " + std::to_string(t) + " outside [0, T]");
}

double Schedule::sigma(double t) const {
  check_time(t);
  if (t < epsilon_) return sigma_eps_ * std::sqrt(t / epsilon_);
  if (t == T_) return sigma_T_;
  return sigma_eps_ * std::exp(log_ratio_ * (t - epsilon_) / (T_ - epsilon_));
}

double Schedule::g_squared(double t) const {
  check_time(t);
  if (t < epsilon_) return sigma_eps_ * sigma_eps_ / epsilon_;
  const double sig = sigma(t);
  return 2.0 * sig * sig * log_ratio_ / (T_ - epsilon_);
}

double Schedule::g(double t) const { return std::sqrt(g_squared(t)); }

double Schedule::time_of_sigma(double sig) const {
  if (!(sig >= sigma_eps_ && sig <= sigma_T_))
    throw InvalidArgs("schedule: sigma outside [sigma_eps, sigma_T]");
  return epsilon_ + (T_ - epsilon_) * std::log(sig / sigma_eps_) / log_ratio_;
}

double u_of_t(const Schedule& schedule, double alpha, double t) {
  const double span = schedule.T() - schedule.epsilon();
  if (!(t >= 0.0 && t <= span))
    throw InvalidArgs("u_of_t: time " + std::to_string(t) + " outside [0, T - epsilon]");
  const double sig = t == span ? schedule.sigma_eps() : schedule.sigma(schedule.T() - t);
  if (alpha == 2.0) return std::log(schedule.sigma_T()) - std::log(sig);
  const double p = 2.0 - alpha;
  return (std::pow(schedule.sigma_T(), p) - std::pow(sig, p)) / p;
}

double u_inverse(const Schedule& schedule, double alpha, double u) {
  const double span = schedule.T() - schedule.epsilon();
  const double u_max = u_of_t(schedule, alpha, span);
  if (!(u >= 0.0 && u <= u_max * (1.0 + 1e-14)))
    throw InvalidArgs("u_inverse: value " + std::to_string(u) + " outside [0, u(T - epsilon)]");
  if (u == 0.0) return 0.0;
  double sig;
  if (alpha == 2.0) {
    sig = schedule.sigma_T() * std::exp(-u);
  } else {
    const double p = 2.0 - alpha;
    sig = std::pow(std::pow(schedule.sigma_T(), p) - p * u, 1.0 / p);
  }
  sig = std::clamp(sig, schedule.sigma_eps(), schedule.sigma_T());
  return std::clamp(schedule.T() - schedule.time_of_sigma(sig), 0.0, span);
}

double u_inverse_bisect(const Schedule& schedule, double alpha, double u) {
  const double span = schedule.T() - schedule.epsilon();
  const double u_max = u_of_t(schedule, alpha, span);
  if (!(u >= 0.0 && u <= u_max))
    throw InvalidArgs("u_inverse: value outside [0, u(T - epsilon)]");
  if (u == 0.0) return 0.0;
  if (u == u_max) return span;
  auto f = [&](double t) { return u_of_t(schedule, alpha, t) - u; };
  auto tol = [](double lo, double hi) { return std::abs(hi - lo) <= 1e-12 * std::max(1.0, std::abs(hi)); };
  boost::uintmax_t max_iter = 200;
  const auto [lo, hi] = boost::math::tools::bisect(f, 0.0, span, tol, max_iter);
  if (max_iter >= 200) throw NumericAccuracy("u_inverse: bisection did not converge");
  return 0.5 * (lo + hi);
}

std::vector<double> geometric_levels(double sigma_T, double sigma_eps, int count) {
  if (count < 1) throw InvalidArgs("levels: count must be positive");
  if (!(sigma_eps > 0.0) || !(sigma_T > sigma_eps))
    throw InvalidArgs("levels: require 0 < sigma_eps < sigma_T");
  if (count == 1) return {sigma_T};
  std::vector<double> levels(static_cast<std::size_t>(count));
  const double step = std::log(sigma_eps / sigma_T) / (count - 1);
  for (int k = 0; k < count; ++k) levels[static_cast<std::size_t>(k)] = sigma_T * std::exp(step * k);
  levels.front() = sigma_T;
  levels.back() = sigma_eps;
  return levels;
}

}  // namespace scoredyn
