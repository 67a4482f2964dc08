#include "scoredyn/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <string>

#include <Eigen/Eigenvalues>

#include "scoredyn/errors.hpp"
#include "scoredyn/random.hpp"

namespace scoredyn {

namespace {

double ball_radius(const ScoreField& field, const Vector& centre, double k, const char* who) {
  const auto& cfg = field.config();
  const double bound = cfg.k_bound();
  if (!(k > 0.0) || !(k < bound))
    throw InvalidArgs(std::string(who) + ": k must lie in (0, " + std::to_string(bound) + ")");
  if (centre.size() != cfg.d || !centre.allFinite())
    throw InvalidArgs(std::string(who) + ": centre must be finite with the model dimension");
  return k * cfg.sigma_eps;
}

double max_eigenvalue(const Matrix& h) {
  Eigen::SelfAdjointEigenSolver<Matrix> solver(h, Eigen::EigenvaluesOnly);
  return solver.eigenvalues().maxCoeff();
}

std::size_t nearest_datum(const EmpiricalMeasure& measure, const Vector& x) {
  std::size_t best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < measure.size(); ++j) {
    const double d = (measure.point(j) - x).squaredNorm();
    if (d < best_d) {
      best_d = d;
      best = j;
    }
  }
  return best;
}

Vector random_direction(Rng& rng, Eigen::Index d) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Vector v(d);
  do {
    for (Eigen::Index i = 0; i < d; ++i) v[i] = normal(rng);
  } while (v.norm() == 0.0);
  return v / v.norm();
}

/// Points on the sphere of the given radius: equally spaced in d <= 2, random otherwise.
std::vector<Vector> sphere_points(const Vector& centre, double radius, std::size_t count,
                                  std::uint64_t seed) {
  const Eigen::Index d = centre.size();
  std::vector<Vector> out;
  if (d == 1) {
    out.push_back(centre.array() - radius);
    out.push_back(centre.array() + radius);
    return out;
  }
  if (d == 2) {
    for (std::size_t i = 0; i < count; ++i) {
      const double angle = 2.0 * std::numbers::pi * static_cast<double>(i) / static_cast<double>(count);
      Vector p = centre;
      p[0] += radius * std::cos(angle);
      p[1] += radius * std::sin(angle);
      out.push_back(p);
    }
    return out;
  }
  Rng rng = make_stream(seed, 0);
  for (std::size_t i = 0; i < count; ++i) out.push_back(centre + radius * random_direction(rng, d));
  return out;
}

}  // namespace

EquilibriumReport find_equilibrium_near(const ScoreField& field, const Vector& centre, double k,
                                        const EquilibriumOptions& options) {
  const double radius = ball_radius(field, centre, k, "find_equilibrium_near");
  const double s = field.config().lyapunov_shape();
  Vector x = centre;
  Vector g = field.grad_big_l(s, x);
  LogPositive l = field.lyapunov(x);
  EquilibriumReport report;

  for (std::size_t iter = 0;; ++iter) {
    const double l_tilde = field.lyapunov_denominator(x).value();
    if (g.norm() <= options.residual_tol * l_tilde) {
      report.iterations = iter;
      break;
    }
    if (iter >= options.max_iterations)
      throw NumericAccuracy("find_equilibrium_near: no convergence within the iteration budget");

    const Matrix h = field.hess_big_l(s, x);
    Eigen::SelfAdjointEigenSolver<Matrix> eig(h);
    const Vector lambda = eig.eigenvalues();
    const double lambda_max = lambda.maxCoeff();
    const double lambda_abs_max = lambda.cwiseAbs().maxCoeff();
    Vector step;
    if (lambda_max < 0.0) {
      if (lambda_abs_max / (-lambda_max) > options.condition_limit)
        throw IllConditioned("find_equilibrium_near: Hessian condition number exceeds the limit");
      step = eig.eigenvectors() *
             (eig.eigenvectors().transpose() * g).cwiseQuotient(-lambda);
    } else {
      const double length = std::min(0.25 * radius / g.norm(),
                                     lambda_abs_max > 0.0 ? 1.0 / lambda_abs_max : 1.0);
      step = length * g;
    }

    bool accepted = false;
    double beta = 1.0;
    for (int tries = 0; tries < 60; ++tries, beta *= 0.5) {
      const Vector candidate = x + beta * step;
      const Vector g_new = field.grad_big_l(s, candidate);
      const LogPositive l_new = field.lyapunov(candidate);
      if (g_new.norm() < g.norm() || l_new > l) {
        x = candidate;
        g = g_new;
        l = l_new;
        accepted = true;
        break;
      }
    }
    if (!accepted) throw NumericAccuracy("find_equilibrium_near: line search stalled");
    if ((x - centre).norm() >= radius)
      throw NotFound("find_equilibrium_near: iteration left the ball |x - x_i| < k sigma_eps");
  }

  report.point = x;
  report.nearest_datum_index = nearest_datum(field.measure(), x);
  report.distance = (x - centre).norm();
  report.gradient_norm = g.norm();
  report.hessian_max_eigenvalue = max_eigenvalue(field.hess_big_l(s, x));
  report.stable = report.hessian_max_eigenvalue < 0.0;
  return report;
}

ConcavityReport check_concavity_ball(const ScoreField& field, const Vector& centre, double k,
                                     std::size_t samples, std::uint64_t seed) {
  const double radius = ball_radius(field, centre, k, "check_concavity_ball");
  const double s = field.config().lyapunov_shape();
  const Eigen::Index d = centre.size();
  Rng rng = make_stream(seed, 1);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const std::size_t count = std::max<std::size_t>(samples, 1);
  double worst = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < count; ++i) {
    Vector x = centre;
    if (i > 0) {
      // A quarter of the samples sit on the sphere; the rest are drawn with
      // radial density growing towards it.
      const double r = i % 4 == 0 ? radius
                                  : radius * std::pow(unit(rng), 1.0 / (2.0 * static_cast<double>(d)));
      x += r * random_direction(rng, d);
    }
    worst = std::max(worst, max_eigenvalue(field.hess_big_l(s, x)));
  }
  return ConcavityReport{worst < 0.0, -worst, count};
}

double boundary_gap(const ScoreField& field, const Vector& centre, double k, std::size_t samples,
                    std::uint64_t seed) {
  const double radius = ball_radius(field, centre, k, "boundary_gap");
  const LogPositive l_centre = field.lyapunov(centre);
  double gap = std::numeric_limits<double>::infinity();
  for (const Vector& x : sphere_points(centre, radius, std::max<std::size_t>(samples, 1), seed)) {
    const double ratio_log = field.lyapunov(x).log() - l_centre.log();
    gap = std::min(gap, -l_centre.value() * std::expm1(ratio_log));
  }
  return gap;
}

std::vector<LyapunovPoint> lyapunov_series(const ScoreField& field, const Trajectory& traj,
                                           const Perturbation& e) {
  std::vector<LyapunovPoint> out;
  out.reserve(traj.size());
  for (std::size_t i = 0; i < traj.size(); ++i) {
    const Vector& x = traj.states[i];
    const Vector s = field.s_star(x);
    const Vector v = e.is_zero() ? s : Vector(s + e(x));
    out.push_back({traj.times[i], field.lyapunov(x),
                   field.lyapunov_denominator(x).value() * s.dot(v)});
  }
  return out;
}

double lyapunov_worst_drop(const std::vector<LyapunovPoint>& series) {
  if (series.size() < 2) return 0.0;
  double worst = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 1; i < series.size(); ++i)
    worst = std::max(worst, std::expm1(series[i - 1].l.log() - series[i].l.log()));
  return worst;
}

ConvergenceReport critical_convergence(const ScoreField& field, const std::vector<Vector>& starts,
                                       double t_end, const StepControl& ctl,
                                       Parallelism parallelism) {
  ConvergenceReport report;
  report.terminal_norms.assign(starts.size(), 0.0);
  report.worst_drops.assign(starts.size(), 0.0);
  FlowOptions options;
  options.diagnostics = false;
  parallel_for(starts.size(), parallelism, [&](std::size_t i) {
    const Trajectory traj = flow_integrate(field, Perturbation{}, starts[i], t_end, ctl, options);
    report.terminal_norms[i] = field.s_star(traj.final_state()).norm();
    double worst = traj.size() < 2 ? 0.0 : -std::numeric_limits<double>::infinity();
    double previous = field.lyapunov(traj.states.front()).log();
    for (std::size_t k = 1; k < traj.size(); ++k) {
      const double current = field.lyapunov(traj.states[k]).log();
      worst = std::max(worst, std::expm1(previous - current));
      previous = current;
    }
    report.worst_drops[i] = worst;
  });
  for (double v : report.terminal_norms)
    report.max_terminal_norm = std::max(report.max_terminal_norm, v);
  return report;
}

MaskReport e_tilde_mask(const ScoreField& field, const Perturbation& e, const Grid& grid,
                        Parallelism parallelism) {
  if (grid.dimension() != field.dimension())
    throw InvalidArgs("e_tilde_mask: grid dimension does not match the model");
  if (!e.is_zero() && e.dimension() != field.dimension())
    throw InvalidArgs("e_tilde_mask: perturbation dimension does not match the model");
  MaskReport out;
  out.mask.assign(grid.size(), 0);
  out.ratio.assign(grid.size(), 0.0);
  parallel_for(grid.size(), parallelism, [&](std::size_t i) {
    const Vector x = grid.point(i);
    const double e_norm = e.is_zero() ? 0.0 : e(x).norm();
    out.mask[i] = field.s_star(x).norm() <= e_norm ? 1 : 0;
    out.ratio[i] = std::exp(field.lyapunov_denominator(x).log() - field.lyapunov(x).log());
  });
  return out;
}

BasinReport basin_classify(const ScoreField& field, const Perturbation& e, const Grid& grid,
                           double t_end, const BasinOptions& options) {
  if (grid.dimension() != field.dimension())
    throw InvalidArgs("basin_classify: grid dimension does not match the model");
  const auto& cfg = field.config();
  const auto& measure = field.measure();
  BasinReport report{grid, {}, {}, {}, {}};

  const double merge_tol = 1e-9 * options.k * cfg.sigma_eps;
  for (std::size_t j = 0; j < measure.size(); ++j) {
    EquilibriumReport eq;
    try {
      eq = find_equilibrium_near(field, measure.point(j), options.k);
    } catch (const NotFound&) {
      continue;
    } catch (const IllConditioned&) {
      continue;
    } catch (const NumericAccuracy&) {
      continue;
    }
    const bool duplicate =
        std::any_of(report.equilibria.begin(), report.equilibria.end(),
                    [&](const EquilibriumReport& other) {
                      return (other.point - eq.point).norm() <= merge_tol;
                    });
    if (!duplicate) report.equilibria.push_back(std::move(eq));
  }

  const double capture = 10.0 * options.k * cfg.sigma_eps;
  const double far = 10.0 * (measure.support_radius() + cfg.sigma_T);
  const double s = cfg.lyapunov_shape();
  report.labels.assign(grid.size(), {});
  report.terminal_gradient_norms.assign(grid.size(), 0.0);
  report.terminal_states.assign(grid.size(), Vector());
  FlowOptions flow_options;
  flow_options.diagnostics = false;
  flow_options.record_stride = std::numeric_limits<std::size_t>::max();

  parallel_for(grid.size(), options.parallelism, [&](std::size_t i) {
    const Trajectory traj =
        flow_integrate(field, e, grid.point(i), t_end, options.control, flow_options);
    const Vector& end = traj.final_state();
    const ScaledVector g = field.grad_big_l_scaled(s, end);
    report.terminal_gradient_norms[i] = std::exp(g.log_scale) * g.direction.norm();
    report.terminal_states[i] = end;

    double d1 = std::numeric_limits<double>::infinity();
    double d2 = std::numeric_limits<double>::infinity();
    std::size_t best = 0;
    for (std::size_t q = 0; q < report.equilibria.size(); ++q) {
      const double dist = (report.equilibria[q].point - end).norm();
      if (dist < d1) {
        d2 = d1;
        d1 = dist;
        best = q;
      } else if (dist < d2) {
        d2 = dist;
      }
    }
    BasinLabel label;
    if (std::isfinite(d2) && std::abs(d1 - d2) <= 1e-9 * std::max(d1, d2)) {
      label.kind = BasinLabelKind::escaped;
    } else if (d1 <= capture) {
      label.kind = BasinLabelKind::converged;
      label.equilibrium = best;
    } else if (end.norm() > far) {
      label.kind = BasinLabelKind::escaped;
    } else {
      label.kind = BasinLabelKind::max_time;
    }
    report.labels[i] = label;
  });
  return report;
}

}  // namespace scoredyn
