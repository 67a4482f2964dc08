#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <string>

#include "scoredyn/errors.hpp"
#include "scoredyn/mixture.hpp"

namespace scoredyn {

enum class StepMethod { rk4, dopri45 };

/// Step-size policy for the explicit integrators.
struct StepControl {
  StepMethod method = StepMethod::dopri45;
  /// Fixed step for rk4; initial step for dopri45.
  double step = 1e-2;
  double rel_tol = 1e-9;
  double abs_tol = 1e-12;
  double min_step = 1e-13;
  double max_step = std::numeric_limits<double>::infinity();
  std::size_t max_steps = 20'000'000;
  /// dopri45 only: keep h |lambda| below the stability boundary, with lambda
  /// the dominant Jacobian eigenvalue estimated from the last two stages.
  /// Without it the controller hovers at the boundary near stable equilibria
  /// and the state jitters at the tolerance level instead of settling.
  bool stability_cap = true;
  /// Repeat with half the step (rk4) or 1/32 of the tolerances (dopri45) and
  /// report the endpoint difference.
  bool richardson = false;

  void validate() const {
    if (!(step > 0.0) || !std::isfinite(step)) throw InvalidArgs("step control: step must be positive");
    if (!(rel_tol > 0.0) || !(abs_tol >= 0.0)) throw InvalidArgs("step control: tolerances must be positive");
    if (!(min_step > 0.0)) throw InvalidArgs("step control: min_step must be positive");
    if (!(max_step > 0.0)) throw InvalidArgs("step control: max_step must be positive");
    if (max_steps == 0) throw InvalidArgs("step control: max_steps must be positive");
  }
};

struct OdeOutcome {
  double t = 0.0;
  Vector x;
  std::size_t steps = 0;
  bool stopped_by_observer = false;
};

namespace ode_detail {

// Dormand-Prince 5(4) tableau.
inline constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
inline constexpr double a21 = 1.0 / 5;
inline constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
inline constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
inline constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                        a54 = -212.0 / 729;
inline constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                        a64 = 49.0 / 176, a65 = -5103.0 / 18656;
inline constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                        b5 = -2187.0 / 6784, b6 = 11.0 / 84;
// h |lambda| on the negative real axis well inside the stability region
// (which ends near 3.3); the amplification factor there is about 0.57.
inline constexpr double stability_limit = 3.0;
inline constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                        e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;

}  // namespace ode_detail

/// Integrates dx/dt = f(t, x) from t0 to t1, landing exactly on every time in
/// `stops` (sorted, inside (t0, t1]). After each accepted step the observer is
/// called as observer(t, x, f(t, x)); returning false ends the integration.
/// The observer is also called once at t0.
template <class Rhs, class Observer>
OdeOutcome integrate_ode(const Rhs& f, Vector x, double t0, double t1, const StepControl& ctl,
                         std::span<const double> stops, Observer&& observer) {
  ctl.validate();
  if (!(t1 >= t0)) throw InvalidArgs("integrate_ode: end time precedes start time");
  OdeOutcome out;
  double t = t0;
  Vector fx = f(t, x);
  if (!observer(t, x, fx)) {
    out.t = t;
    out.x = std::move(x);
    out.stopped_by_observer = true;
    return out;
  }
  std::size_t next_stop = 0;
  while (next_stop < stops.size() && stops[next_stop] <= t0) ++next_stop;
  auto target = [&] { return next_stop < stops.size() ? std::min(stops[next_stop], t1) : t1; };
  auto land = [&](double t_new) {
    while (next_stop < stops.size() && t_new >= stops[next_stop]) ++next_stop;
  };

  double h = std::min(ctl.step, ctl.max_step);
  const std::size_t n = static_cast<std::size_t>(x.size());
  Vector k2(n), k3(n), k4(n), k5(n), k6(n), k7(n), tmp(n), x_new(n), err(n);

  while (t < t1) {
    if (++out.steps > ctl.max_steps) throw StepSizeUnderflow("integrate_ode: step budget exhausted");
    const double goal = target();
    bool hit = false;
    double step = h;
    if (t + step >= goal || goal - (t + step) < 1e-12 * std::max(1.0, std::abs(goal))) {
      step = goal - t;
      hit = true;
    }
    if (ctl.method == StepMethod::rk4) {
      const Vector& k1 = fx;
      tmp = x + 0.5 * step * k1;
      k2 = f(t + 0.5 * step, tmp);
      tmp = x + 0.5 * step * k2;
      k3 = f(t + 0.5 * step, tmp);
      tmp = x + step * k3;
      k4 = f(t + step, tmp);
      x_new = x + (step / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
      t = hit ? goal : t + step;
      x = x_new;
      fx = f(t, x);
      land(t);
      if (!x.allFinite()) throw BlowUp("integrate_ode: state became non-finite");
      if (!observer(t, x, fx)) {
        out.stopped_by_observer = true;
        break;
      }
      continue;
    }

    using namespace ode_detail;
    const Vector& k1 = fx;
    tmp = x + step * (a21 * k1);
    k2 = f(t + c2 * step, tmp);
    tmp = x + step * (a31 * k1 + a32 * k2);
    k3 = f(t + c3 * step, tmp);
    tmp = x + step * (a41 * k1 + a42 * k2 + a43 * k3);
    k4 = f(t + c4 * step, tmp);
    tmp = x + step * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4);
    k5 = f(t + c5 * step, tmp);
    tmp = x + step * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5);
    k6 = f(t + step, tmp);
    const Vector y6 = tmp;
    x_new = x + step * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
    const double t_new = hit ? goal : t + step;
    k7 = f(t_new, x_new);
    err = step * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);
    double norm = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const auto ii = static_cast<Eigen::Index>(i);
      const double scale =
          ctl.abs_tol + ctl.rel_tol * std::max(std::abs(x[ii]), std::abs(x_new[ii]));
      norm += (err[ii] / scale) * (err[ii] / scale);
    }
    norm = std::sqrt(norm / static_cast<double>(n));
    if (!std::isfinite(norm)) norm = 1e10;
    double lambda_est = 0.0;
    if (ctl.stability_cap) {
      const double den = (x_new - y6).norm();
      if (den > 0.0) lambda_est = (k7 - k6).norm() / den;
    }

    if (norm <= 1.0) {
      t = t_new;
      x = x_new;
      fx = k7;
      land(t);
      if (!observer(t, x, fx)) {
        out.stopped_by_observer = true;
        break;
      }
      const double grow = norm == 0.0 ? 5.0 : std::clamp(0.9 * std::pow(norm, -0.2), 0.2, 5.0);
      // Do not let a shortened landing step shrink the controller's step.
      h = std::min(ctl.max_step, (hit ? std::max(h, step) : step) * grow);
      if (ctl.stability_cap && lambda_est > 0.0) h = std::min(h, stability_limit / lambda_est);
    } else {
      h = step * std::clamp(0.9 * std::pow(norm, -0.2), 0.1, 1.0);
    }
    if (t < t1 && h < ctl.min_step * std::max(1.0, std::abs(t)))
      throw StepSizeUnderflow("integrate_ode: step size underflow at t = " + std::to_string(t));
  }
  out.t = t;
  out.x = std::move(x);
  return out;
}

}  // namespace scoredyn
