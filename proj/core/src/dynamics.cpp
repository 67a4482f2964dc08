#include "scoredyn/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <string>
#include <utility>

#include "scoredyn/errors.hpp"
#include "scoredyn/random.hpp"

namespace scoredyn {

namespace {

void check_state(const ScoreField& field, const Vector& x, const char* who) {
  if (x.size() != field.dimension())
    throw InvalidArgs(std::string(who) + ": initial state has wrong dimension");
  if (!x.allFinite()) throw InvalidArgs(std::string(who) + ": initial state must be finite");
}

void check_model(const ScoreField& field, const FieldSpec& model, const char* who) {
  if (model.kind() != FieldSpec::Kind::s_star_plus_perturbation) return;
  const Perturbation& e = model.perturbation();
  if (!e.is_zero() && e.dimension() != field.dimension())
    throw InvalidArgs(std::string(who) + ": perturbation dimension does not match the model");
}

std::vector<double> sorted_unique(std::vector<double> times) {
  std::sort(times.begin(), times.end());
  times.erase(std::unique(times.begin(), times.end()), times.end());
  return times;
}

/// 10 (|x0| + C tau) e^{C tau}; infinite once the exponent leaves the double range.
double gronwall_bound(double x0_norm, double growth, double tau, double noise = 0.0) {
  const double exponent = growth * tau;
  if (exponent > 700.0) return std::numeric_limits<double>::infinity();
  return 10.0 * ((x0_norm + growth * tau * (1.0 + noise)) * std::exp(exponent) + noise);
}

/// Appends states to a trajectory with stride thinning. Output times are
/// always kept, and finish() makes sure the last offered state is present.
class Recorder {
 public:
  Recorder(const ScoreField& field, bool diagnostics, std::size_t stride,
           std::vector<double> output_times, bool rescaled, Trajectory& traj)
      : field_(field),
        diagnostics_(diagnostics),
        stride_(std::max<std::size_t>(stride, 1)),
        outputs_(std::move(output_times)),
        rescaled_(rescaled),
        traj_(traj) {}

  void offer(double t, const Vector& x, const Vector& velocity, double tau = 0.0) {
    bool keep = count_ % stride_ == 0;
    while (next_output_ < outputs_.size() && outputs_[next_output_] < t) ++next_output_;
    if (next_output_ < outputs_.size() && outputs_[next_output_] == t) keep = true;
    ++count_;
    if (keep) {
      push(t, x, velocity, tau);
    } else {
      pending_t_ = t;
      pending_x_ = x;
      pending_v_ = velocity;
      pending_tau_ = tau;
      has_pending_ = true;
    }
  }

  void finish() {
    if (has_pending_) push(pending_t_, pending_x_, pending_v_, pending_tau_);
  }

 private:
  void push(double t, const Vector& x, const Vector& velocity, double tau) {
    traj_.times.push_back(t);
    traj_.states.push_back(x);
    if (diagnostics_) traj_.diagnostics.push_back(diagnose(field_, x, velocity));
    if (rescaled_) traj_.rescaled_times.push_back(tau);
    has_pending_ = false;
  }

  const ScoreField& field_;
  bool diagnostics_;
  std::size_t stride_;
  std::vector<double> outputs_;
  bool rescaled_;
  Trajectory& traj_;
  std::size_t count_ = 0;
  std::size_t next_output_ = 0;
  bool has_pending_ = false;
  double pending_t_ = 0.0;
  double pending_tau_ = 0.0;
  Vector pending_x_;
  Vector pending_v_;
};

StepControl refined_control(StepControl ctl) {
  ctl.richardson = false;
  if (ctl.method == StepMethod::rk4) {
    ctl.step *= 0.5;
  } else {
    ctl.rel_tol /= 32.0;
    ctl.abs_tol /= 32.0;
  }
  return ctl;
}

}  // namespace

StepDiagnostics diagnose(const ScoreField& field, const Vector& x, const Vector& velocity) {
  const double s = field.config().lyapunov_shape();
  const ScaledVector grad = field.grad_big_l_scaled(s, x);
  StepDiagnostics d;
  d.log_l = field.big_l(s, x).log();
  d.grad_norm = std::exp(grad.log_scale) * grad.direction.norm();
  d.speed = velocity.norm();
  return d;
}

Trajectory flow_integrate(const ScoreField& field, const Perturbation& e, const Vector& x0,
                          double t_end, const StepControl& ctl, const FlowOptions& options) {
  const FieldSpec model = e.is_zero() ? FieldSpec::optimal() : FieldSpec::perturbed(e);
  return flow_integrate(field, model, x0, t_end, ctl, options);
}

Trajectory flow_integrate(const ScoreField& field, const FieldSpec& model, const Vector& x0,
                          double t_end, const StepControl& ctl, const FlowOptions& options) {
  check_state(field, x0, "flow_integrate");
  check_model(field, model, "flow_integrate");
  if (!(t_end > 0.0) || !std::isfinite(t_end))
    throw InvalidArgs("flow_integrate: t_end must be positive and finite");
  ctl.validate();

  const double growth = model.growth_bound(field);
  const double x0_norm = x0.norm();
  std::vector<double> stops;
  for (double t : sorted_unique(options.output_times))
    if (t > 0.0 && t <= t_end) stops.push_back(t);

  Trajectory traj;
  Recorder recorder(field, options.diagnostics, options.record_stride, stops, false, traj);
  auto rhs = [&](double, const Vector& x) { return model.evaluate(field, x); };
  auto observer = [&](double t, const Vector& x, const Vector& v) {
    if (!x.allFinite() || x.norm() > gronwall_bound(x0_norm, growth, t))
      throw BlowUp("flow_integrate: state left the growth envelope at t = " + std::to_string(t));
    recorder.offer(t, x, v);
    if (v.norm() < options.equilibrium_tol) {
      traj.stop_reason = StopReason::equilibrium;
      return false;
    }
    return true;
  };
  const OdeOutcome out = integrate_ode(rhs, x0, 0.0, t_end, ctl, stops, observer);
  recorder.finish();
  traj.steps = out.steps;

  if (ctl.richardson && traj.final_time() > 0.0) {
    auto quiet = [](double, const Vector&, const Vector&) { return true; };
    const OdeOutcome fine =
        integrate_ode(rhs, x0, 0.0, traj.final_time(), refined_control(ctl), {}, quiet);
    traj.endpoint_error = (fine.x - traj.final_state()).norm();
  }
  return traj;
}

Trajectory langevin_sample(const ScoreField& field, const FieldSpec& model,
                           const Schedule& schedule, const LangevinParams& params) {
  check_model(field, model, "langevin_sample");
  const auto& levels = params.levels;
  if (levels.empty()) throw InvalidArgs("langevin_sample: at least one noise level is required");
  const double lo = schedule.sigma_eps() * (1.0 - 1e-12);
  const double hi = schedule.sigma_T() * (1.0 + 1e-12);
  for (std::size_t k = 0; k < levels.size(); ++k) {
    if (!(levels[k] >= lo && levels[k] <= hi))
      throw InvalidArgs("langevin_sample: noise levels must lie in [sigma_eps, sigma_T]");
    if (k > 0 && !(levels[k] < levels[k - 1]))
      throw InvalidArgs("langevin_sample: noise levels must be decreasing");
  }
  if (params.steps_per_level == 0) throw InvalidArgs("langevin_sample: steps_per_level must be >= 1");
  if (!(params.step_scale > 0.0) || !std::isfinite(params.step_scale))
    throw InvalidArgs("langevin_sample: step_scale must be positive");
  if (!(params.noise_scale >= 0.0) || !std::isfinite(params.noise_scale))
    throw InvalidArgs("langevin_sample: noise_scale must be non-negative");
  if (!std::isfinite(params.alpha)) throw InvalidArgs("langevin_sample: alpha must be finite");

  const Eigen::Index d = field.dimension();
  Rng rng = make_stream(params.seed, 0);
  std::normal_distribution<double> normal(0.0, 1.0);
  auto draw = [&] {
    Vector xi(d);
    for (Eigen::Index i = 0; i < d; ++i) xi[i] = normal(rng);
    return xi;
  };

  Vector x;
  if (params.x0) {
    x = *params.x0;
    check_state(field, x, "langevin_sample");
  } else {
    x = schedule.sigma_T() * draw();
  }

  const double growth = model.growth_bound(field);
  const double x0_norm = x.norm();
  Vector noise_sum = Vector::Zero(d);
  double noise_max = 0.0;

  Trajectory traj;
  Recorder recorder(field, params.diagnostics, params.record_stride, {}, true, traj);
  double t = 0.0;
  double tau = 0.0;
  Vector drift = model.evaluate(field, x);
  recorder.offer(t, x, std::pow(levels.front(), -params.alpha) * drift, tau);

  for (double sigma : levels) {
    const double h = params.step_scale * std::pow(sigma, params.alpha);
    const double noise_coeff = params.noise_scale * std::sqrt(2.0 * h);
    for (std::size_t n = 0; n < params.steps_per_level; ++n) {
      const Vector noise = noise_coeff * draw();
      x += params.step_scale * drift + noise;
      noise_sum += noise;
      noise_max = std::max(noise_max, noise_sum.norm());
      t += h;
      tau += params.step_scale;
      ++traj.steps;
      if (!x.allFinite() || x.norm() > gronwall_bound(x0_norm, growth, tau, noise_max))
        throw BlowUp("langevin_sample: state left the growth envelope at step " +
                     std::to_string(traj.steps));
      drift = model.evaluate(field, x);
      recorder.offer(t, x, std::pow(sigma, -params.alpha) * drift, tau);
    }
  }
  recorder.finish();
  return traj;
}

Trajectory pf_ode_sample(const ScoreField& field, const FieldSpec& model, const Schedule& schedule,
                         double alpha, const Vector& x0, const StepControl& ctl,
                         const PfOdeOptions& options) {
  check_state(field, x0, "pf_ode_sample");
  check_model(field, model, "pf_ode_sample");
  if (!std::isfinite(alpha)) throw InvalidArgs("pf_ode_sample: alpha must be finite");
  ctl.validate();

  const double T = schedule.T();
  const double eps = schedule.epsilon();
  const double t_end = T - eps;
  auto reverse_time = [&](double t) { return std::clamp(T - t, eps, T); };
  auto u_at = [&](double t) { return u_of_t(schedule, alpha, std::clamp(t, 0.0, t_end)); };

  std::vector<double> stops;
  for (double t : sorted_unique(options.output_times))
    if (t > 0.0 && t <= t_end) stops.push_back(t);

  const double growth = model.growth_bound(field);
  const double x0_norm = x0.norm();
  Trajectory traj;
  Recorder recorder(field, options.diagnostics, options.record_stride, stops, true, traj);
  auto rhs = [&](double t, const Vector& x) {
    const double r = reverse_time(t);
    const double factor = 0.5 * schedule.g_squared(r) * std::pow(schedule.sigma(r), -alpha);
    return Vector(factor * model.evaluate(field, x));
  };
  auto observer = [&](double t, const Vector& x, const Vector& v) {
    const double u = u_at(t);
    if (!x.allFinite() || x.norm() > gronwall_bound(x0_norm, growth, u))
      throw BlowUp("pf_ode_sample: state left the growth envelope at t = " + std::to_string(t));
    recorder.offer(t, x, v, u);
    return true;
  };
  const OdeOutcome out = integrate_ode(rhs, x0, 0.0, t_end, ctl, stops, observer);
  recorder.finish();
  traj.steps = out.steps;
  return traj;
}

}  // namespace scoredyn
