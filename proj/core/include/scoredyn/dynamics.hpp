#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include "scoredyn/field_spec.hpp"
#include "scoredyn/mixture.hpp"
#include "scoredyn/ode.hpp"
#include "scoredyn/schedule.hpp"

namespace scoredyn {

struct StepDiagnostics {
  double log_l = 0.0;      // log L((d+alpha)/2 - 1, x)
  double grad_norm = 0.0;  // |grad L((d+alpha)/2 - 1, x)|
  double speed = 0.0;      // |dx/dt|
};

enum class StopReason { reached_end, equilibrium };

struct Trajectory {
  std::vector<double> times;
  std::vector<Vector> states;
  /// Empty when diagnostics were disabled, otherwise one entry per state.
  std::vector<StepDiagnostics> diagnostics;
  /// Autonomous-flow time of each state (samplers only).
  std::vector<double> rescaled_times;
  StopReason stop_reason = StopReason::reached_end;
  /// Endpoint difference against a refined rerun, when requested.
  std::optional<double> endpoint_error;
  std::size_t steps = 0;

  std::size_t size() const { return states.size(); }
  const Vector& final_state() const { return states.back(); }
  double final_time() const { return times.back(); }
};

StepDiagnostics diagnose(const ScoreField& field, const Vector& x, const Vector& velocity);

struct FlowOptions {
  bool diagnostics = true;
  std::size_t record_stride = 1;
  /// Stop once |s*(x) + e(x)| falls below this.
  double equilibrium_tol = 1e-10;
  /// Times the integrator lands on exactly; always recorded.
  std::vector<double> output_times;
};

/// dx/dt = s*(x) + e(x) on [0, t_end].
Trajectory flow_integrate(const ScoreField& field, const Perturbation& e, const Vector& x0,
                          double t_end, const StepControl& ctl, const FlowOptions& options = {});

/// Autonomous flow driven by an arbitrary model field.
Trajectory flow_integrate(const ScoreField& field, const FieldSpec& model, const Vector& x0,
                          double t_end, const StepControl& ctl, const FlowOptions& options = {});

struct LangevinParams {
  double alpha = 1.0;
  /// Decreasing noise levels inside [sigma_eps, sigma_T].
  std::vector<double> levels;
  std::size_t steps_per_level = 100;
  /// Level k uses step h_k = step_scale * sigma_k^alpha.
  double step_scale = 1e-3;
  std::uint64_t seed = 0;
  /// Multiplies the sqrt(2) dW term; 0 gives the noise-free iteration.
  double noise_scale = 1.0;
  /// Initial state; drawn from N(0, sigma_T^2 I) when absent.
  std::optional<Vector> x0;
  std::size_t record_stride = 1;
  bool diagnostics = false;
};

/// Annealed Langevin sampler: Euler-Maruyama on
///   dX = sigma_k^{-alpha} s_theta(X) dt + sqrt(2) dW
/// for each level in turn. rescaled_times advance by step_scale per step.
Trajectory langevin_sample(const ScoreField& field, const FieldSpec& model,
                           const Schedule& schedule, const LangevinParams& params);

struct PfOdeOptions {
  bool diagnostics = true;
  std::size_t record_stride = 1;
  /// Sampler times landed on exactly; always recorded.
  std::vector<double> output_times;
};

/// Probability-flow sampler dX/dt = g(T-t)^2 sigma_{T-t}^{-alpha} s_theta(X) / 2
/// on [0, T - epsilon]; rescaled_times holds u(t).
Trajectory pf_ode_sample(const ScoreField& field, const FieldSpec& model, const Schedule& schedule,
                         double alpha, const Vector& x0, const StepControl& ctl,
                         const PfOdeOptions& options = {});

}  // namespace scoredyn
