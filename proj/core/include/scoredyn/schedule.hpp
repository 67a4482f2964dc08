#pragma once

#include <vector>

namespace scoredyn {

enum class ScheduleKind { geometric };

/// Variance-exploding noise schedule with sigma_t^2 = \int_0^t g^2.
///
/// The geometric kind interpolates sigma_eps at t = epsilon and sigma_T at
/// t = T geometrically. On [0, epsilon) the variance grows linearly from 0, so
/// sigma_0 = 0 and the integral relation holds on all of [0, T].
class Schedule {
 public:
  static Schedule geometric(double epsilon, double T, double sigma_eps, double sigma_T);

  ScheduleKind kind() const { return kind_; }
  double epsilon() const { return epsilon_; }
  double T() const { return T_; }
  double sigma_eps() const { return sigma_eps_; }
  double sigma_T() const { return sigma_T_; }

  double sigma(double t) const;
  double g(double t) const;
  double g_squared(double t) const;
  /// Inverse of sigma on [epsilon, T].
  double time_of_sigma(double sigma) const;

 private:
  Schedule() = default;
  void check_time(double t) const;

  ScheduleKind kind_ = ScheduleKind::geometric;
  double epsilon_ = 0.0;
  double T_ = 1.0;
  double sigma_eps_ = 0.1;
  double sigma_T_ = 1.0;
  double log_ratio_ = 0.0;  // log(sigma_T / sigma_eps)
};

/// Time change of the probability-flow sampler onto the autonomous flow:
///   u(t) = (sigma_T^{2-alpha} - sigma_{T-t}^{2-alpha}) / (2 - alpha), alpha != 2
///   u(t) = log sigma_T - log sigma_{T-t},                                alpha == 2
/// defined for t in [0, T - epsilon].
double u_of_t(const Schedule& schedule, double alpha, double t);
/// Closed-form inverse for the geometric schedule.
double u_inverse(const Schedule& schedule, double alpha, double u);
/// Inverse by bisection on [0, T - epsilon] (tolerance 1e-12); schedule-agnostic.
double u_inverse_bisect(const Schedule& schedule, double alpha, double u);

/// count noise levels from sigma_T down to sigma_eps, geometrically spaced.
std::vector<double> geometric_levels(double sigma_T, double sigma_eps, int count);

}  // namespace scoredyn
