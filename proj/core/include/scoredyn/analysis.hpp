#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "scoredyn/dynamics.hpp"
#include "scoredyn/field_spec.hpp"
#include "scoredyn/grid.hpp"
#include "scoredyn/mixture.hpp"
#include "scoredyn/parallel.hpp"

namespace scoredyn {

struct EquilibriumReport {
  Vector point;
  std::size_t nearest_datum_index = 0;
  /// Distance from the search centre.
  double distance = 0.0;
  /// |grad L((d+alpha)/2 - 1, point)|
  double gradient_norm = 0.0;
  double hessian_max_eigenvalue = 0.0;
  bool stable = false;
  std::size_t iterations = 0;
};

struct EquilibriumOptions {
  /// Converged once |grad L| <= residual_tol * L~.
  double residual_tol = 1e-12;
  std::size_t max_iterations = 200;
  double condition_limit = 1e14;
};

/// Critical point of L((d+alpha)/2 - 1, .) inside |x - centre| < k sigma_eps,
/// by damped Newton with a gradient-ascent fallback. Requires
/// 0 < k < sqrt(2(d+alpha+2) / (3(d+alpha))).
/// Throws NotFound if the iteration leaves the ball and IllConditioned if the
/// Hessian cannot be trusted.
EquilibriumReport find_equilibrium_near(const ScoreField& field, const Vector& centre, double k,
                                        const EquilibriumOptions& options = {});

struct ConcavityReport {
  bool concave = false;
  /// -max eigenvalue of the Hessian over all samples.
  double margin = 0.0;
  std::size_t samples = 0;
};

/// Samples the ball |x - centre| <= k sigma_eps (boundary-biased, centre
/// included) and checks that the Hessian of L((d+alpha)/2 - 1, .) is negative
/// definite at every sample.
ConcavityReport check_concavity_ball(const ScoreField& field, const Vector& centre, double k,
                                     std::size_t samples = 256, std::uint64_t seed = 0);

/// min over the sphere |x - centre| = k sigma_eps of L(centre) - L(x).
double boundary_gap(const ScoreField& field, const Vector& centre, double k,
                    std::size_t samples = 128, std::uint64_t seed = 0);

struct LyapunovPoint {
  double t = 0.0;
  LogPositive l;
  /// Analytic dL/dt = L~ <s*, s* + e>.
  double rate = 0.0;
};

std::vector<LyapunovPoint> lyapunov_series(const ScoreField& field, const Trajectory& traj,
                                           const Perturbation& e = {});

/// Largest relative decrease L_k / L_{k+1} - 1 along the series; <= 0 for a
/// non-decreasing series.
double lyapunov_worst_drop(const std::vector<LyapunovPoint>& series);

struct ConvergenceReport {
  double max_terminal_norm = 0.0;
  std::vector<double> terminal_norms;  // |s*(x(t_end))| per start
  std::vector<double> worst_drops;     // lyapunov_worst_drop per start
};

/// Integrates the unperturbed flow from every start to t_end.
ConvergenceReport critical_convergence(const ScoreField& field, const std::vector<Vector>& starts,
                                       double t_end, const StepControl& ctl,
                                       Parallelism parallelism = {});

struct MaskReport {
  /// 1 where |s*(x)| <= |e(x)|.
  std::vector<unsigned char> mask;
  /// L((d+2 alpha)/2 - 1, x) / L((d+alpha)/2 - 1, x)
  std::vector<double> ratio;
};

MaskReport e_tilde_mask(const ScoreField& field, const Perturbation& e, const Grid& grid,
                        Parallelism parallelism = {});

enum class BasinLabelKind { converged, escaped, max_time };

struct BasinLabel {
  BasinLabelKind kind = BasinLabelKind::max_time;
  /// Index into BasinReport::equilibria when converged.
  std::size_t equilibrium = 0;
};

struct BasinReport {
  Grid grid;
  std::vector<EquilibriumReport> equilibria;
  std::vector<BasinLabel> labels;
  std::vector<double> terminal_gradient_norms;
  std::vector<Vector> terminal_states;
};

struct BasinOptions {
  /// Equilibria are searched near every datum within k sigma_eps; a cell is
  /// converged when it ends within 10 k sigma_eps of one of them.
  double k = 1.0;
  StepControl control{};
  Parallelism parallelism{};
};

/// Integrates one flow per grid node and labels it by the equilibrium it
/// reaches. Ends equidistant from two equilibria are labelled escaped; ends far
/// outside the data are escaped; anything else is max_time.
BasinReport basin_classify(const ScoreField& field, const Perturbation& e, const Grid& grid,
                           double t_end, const BasinOptions& options = {});

}  // namespace scoredyn
