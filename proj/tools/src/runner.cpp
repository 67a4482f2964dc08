#include "scoredyn_cli/runner.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <random>
#include <sstream>

#include "scoredyn/analysis.hpp"
#include "scoredyn/errors.hpp"
#include "scoredyn/grid.hpp"
#include "scoredyn/loss.hpp"
#include "scoredyn/random.hpp"

namespace scoredyn::cli {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct Context {
  const ExperimentConfig& config;
  fs::path out_dir;
  std::uint64_t seed;
  Parallelism parallelism;
  std::ostream& log;
  RunResult result;

  std::string artifact(const std::string& suffix) {
    const fs::path p = out_dir / (to_string(config.experiment) + suffix);
    result.artifacts.push_back(p.string());
    return p.string();
  }

  void certify(const std::string& name, bool pass, double margin) {
    result.certificates.push_back({name, pass, margin});
    log << (pass ? "PASS " : "FAIL ") << name << " margin=" << format_double(margin) << '\n';
  }
};

json vec_json(const Vector& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

Vector start_point(const ExperimentConfig& c) {
  if (c.params.x0.empty()) return Vector::Zero(c.model.d);
  return Eigen::Map<const Vector>(c.params.x0.data(), c.model.d);
}

FieldSpec model_field(const Perturbation& e) {
  return e.is_zero() ? FieldSpec::optimal() : FieldSpec::perturbed(e);
}

void write_json(const std::string& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw InvalidArgs("cannot write " + path);
  out << j.dump(2) << '\n';
}

void write_csv(const std::string& path, const Trajectory& traj, int d) {
  std::ofstream out(path);
  if (!out) throw InvalidArgs("cannot write " + path);
  write_trajectory_csv(out, traj, d);
}

void write_time_change(const std::string& path, const Trajectory& traj) {
  std::ofstream out(path);
  if (!out) throw InvalidArgs("cannot write " + path);
  out << "t,tau\n";
  for (std::size_t i = 0; i < traj.size(); ++i)
    out << format_double(traj.times[i]) << ',' << format_double(traj.rescaled_times[i]) << '\n';
}

json trajectory_summary(const Trajectory& traj) {
  return {{"points", traj.size()},
          {"steps", traj.steps},
          {"final_time", traj.final_time()},
          {"final_state", vec_json(traj.final_state())},
          {"stop_reason", traj.stop_reason == StopReason::equilibrium ? "equilibrium" : "end"}};
}

json certificates_json(const RunResult& r) {
  json arr = json::array();
  for (const auto& c : r.certificates) arr.push_back({{"name", c.name}, {"pass", c.pass}, {"margin", c.margin}});
  return arr;
}

void run_flow(Context& ctx, const ScoreField& field, const Perturbation& e) {
  const auto& c = ctx.config;
  FlowOptions options;
  options.record_stride = c.params.record_stride;
  const StepControl ctl = make_step_control(c.params.integrator);
  const Trajectory traj = flow_integrate(field, e, start_point(c), c.params.t_end, ctl, options);
  write_csv(ctx.artifact(".csv"), traj, c.model.d);
  if (e.is_zero()) {
    const double drop = lyapunov_worst_drop(lyapunov_series(field, traj));
    const double tol = 10.0 * ctl.rel_tol;
    ctx.certify("lyapunov_nondecreasing", drop <= tol, tol - drop);
  }
  json report = trajectory_summary(traj);
  report["experiment"] = "flow";
  report["final_grad_norm"] = traj.diagnostics.back().grad_norm;
  report["certificates"] = certificates_json(ctx.result);
  write_json(ctx.artifact(".json"), report);
}

void run_langevin(Context& ctx, const ScoreField& field, const Perturbation& e) {
  const auto& c = ctx.config;
  LangevinParams p;
  p.alpha = c.model.alpha;
  p.levels = noise_levels(c);
  p.steps_per_level = c.params.steps_per_level;
  p.step_scale = c.params.step_scale;
  p.noise_scale = c.params.noise_scale;
  p.seed = ctx.seed;
  if (!c.params.x0.empty()) p.x0 = start_point(c);
  p.record_stride = c.params.record_stride;
  p.diagnostics = true;
  const Trajectory traj = langevin_sample(field, model_field(e), make_schedule(c), p);
  write_csv(ctx.artifact(".csv"), traj, c.model.d);
  write_time_change(ctx.artifact("_time_change.csv"), traj);
  json report = trajectory_summary(traj);
  report["experiment"] = "langevin";
  report["levels"] = p.levels;
  write_json(ctx.artifact(".json"), report);
  ctx.log << "DONE langevin steps=" << traj.steps << '\n';
}

void run_pf_ode(Context& ctx, const ScoreField& field, const Perturbation& e) {
  const auto& c = ctx.config;
  PfOdeOptions options;
  options.record_stride = c.params.record_stride;
  const Schedule schedule = make_schedule(c);
  const Trajectory traj = pf_ode_sample(field, model_field(e), schedule, c.model.alpha,
                                        start_point(c), make_step_control(c.params.integrator),
                                        options);
  write_csv(ctx.artifact(".csv"), traj, c.model.d);
  write_time_change(ctx.artifact("_time_change.csv"), traj);
  json report = trajectory_summary(traj);
  report["experiment"] = "pf-ode";
  report["u_final"] = traj.rescaled_times.back();
  write_json(ctx.artifact(".json"), report);
  ctx.log << "DONE pf-ode steps=" << traj.steps << '\n';
}

void run_loss_check(Context& ctx, const ScoreField& field, const Perturbation& e) {
  const auto& c = ctx.config;
  McSampling sampling;
  sampling.n_t = c.params.n_t;
  sampling.n_data = c.params.n_data;
  sampling.n_noise = c.params.n_noise;
  sampling.seed = ctx.seed;
  sampling.parallelism = ctx.parallelism;
  const FieldSpec perturbed = FieldSpec::perturbed(e);
  const McDifference diff = mc_objective_difference(field, perturbed, FieldSpec::optimal(),
                                                    make_schedule(c), sampling);
  const double half = field.measure().support_radius() + 8.0 * c.model.sigma_T;
  const Grid grid = Grid::cube(c.model.d, -half, half, c.params.grid_nodes);
  const double delta_l2 = weighted_l2_gap(perturbed, field, grid);
  const double bound = 3.0 * diff.std_error;
  const bool pass = std::abs(diff.delta - delta_l2) <= bound;
  ctx.certify("loss_decomposition", pass, bound - std::abs(diff.delta - delta_l2));
  json report = {{"experiment", "loss-check"},
                 {"delta_mc", diff.delta},
                 {"delta_l2", delta_l2},
                 {"combined_stderr", diff.std_error},
                 {"pass", pass},
                 {"samples", diff.first.samples},
                 {"objective_perturbed", diff.first.estimate},
                 {"objective_optimal", diff.second.estimate}};
  write_json(ctx.artifact(".json"), report);
}

void run_equilibria(Context& ctx, const ScoreField& field) {
  const auto& c = ctx.config;
  const double k = c.params.k;
  const double radius = k * c.model.sigma_eps;
  json items = json::array();
  for (std::size_t j = 0; j < field.measure().size(); ++j) {
    const Vector& xj = field.measure().point(j);
    json item = {{"datum", j}};
    bool pass = false;
    double margin = 0.0;
    try {
      const EquilibriumReport eq = find_equilibrium_near(field, xj, k);
      const ConcavityReport conc = check_concavity_ball(field, xj, k, 256, ctx.seed);
      const double gap = boundary_gap(field, xj, k, 128, ctx.seed);
      pass = eq.stable && eq.distance < radius && conc.concave && gap > 0.0;
      margin = std::min(conc.margin, gap);
      item["point"] = vec_json(eq.point);
      item["distance"] = eq.distance;
      item["gradient_norm"] = eq.gradient_norm;
      item["hessian_max_eigenvalue"] = eq.hessian_max_eigenvalue;
      item["stable"] = eq.stable;
      item["concave"] = conc.concave;
      item["concavity_margin"] = conc.margin;
      item["boundary_gap"] = gap;
    } catch (const NotFound& err) {
      item["error"] = err.what();
    } catch (const IllConditioned& err) {
      item["error"] = err.what();
    }
    item["pass"] = pass;
    items.push_back(item);
    ctx.certify("equilibrium[" + std::to_string(j) + "]", pass, margin);
  }
  json report = {{"experiment", "equilibria"}, {"k", k}, {"radius", radius}, {"equilibria", items}};
  write_json(ctx.artifact(".json"), report);
}

void run_basins(Context& ctx, const ScoreField& field, const Perturbation& e) {
  const auto& c = ctx.config;
  const Grid grid = Grid::cube(c.model.d, c.params.grid_lo, c.params.grid_hi, c.params.grid_nodes);
  BasinOptions options;
  options.k = c.params.k;
  options.control = make_step_control(c.params.integrator);
  options.parallelism = ctx.parallelism;
  const BasinReport basins = basin_classify(field, e, grid, c.params.t_end, options);
  json eqs = json::array();
  for (const auto& eq : basins.equilibria) eqs.push_back({{"point", vec_json(eq.point)}, {"datum", eq.nearest_datum_index}});
  json labels = json::array();
  std::size_t converged = 0, stuck = 0;
  for (const auto& label : basins.labels) {
    switch (label.kind) {
      case BasinLabelKind::converged:
        labels.push_back(label.equilibrium);
        ++converged;
        break;
      case BasinLabelKind::escaped: labels.push_back("escaped"); break;
      case BasinLabelKind::max_time:
        labels.push_back("max_time");
        ++stuck;
        break;
    }
  }
  json nodes = json::array();
  for (std::size_t i = 0; i < grid.size(); ++i) nodes.push_back(vec_json(grid.point(i)));
  const double fraction = static_cast<double>(converged) / static_cast<double>(grid.size());
  ctx.certify("basins_resolved", stuck == 0, fraction);
  json report = {{"experiment", "basins"},
                 {"grid", {{"lo", c.params.grid_lo}, {"hi", c.params.grid_hi}, {"nodes", c.params.grid_nodes}}},
                 {"equilibria", eqs},
                 {"nodes", nodes},
                 {"labels", labels},
                 {"terminal_gradient_norms", basins.terminal_gradient_norms}};
  write_json(ctx.artifact(".json"), report);
}

void run_growth(Context& ctx, const ScoreField& field) {
  const auto& c = ctx.config;
  const int d = c.model.d;
  const double target = std::pow(c.model.sigma_T, c.model.alpha - 2.0);
  const double ratio_target = std::pow(c.model.sigma_T, -c.model.alpha);
  const double scale = field.measure().support_radius() + c.model.sigma_T;
  std::vector<Vector> dirs;
  Rng rng = make_stream(ctx.seed, 0);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (std::size_t i = 0; i < c.params.directions; ++i) {
    Vector u(d);
    if (d == 1) {
      u[0] = i % 2 == 0 ? 1.0 : -1.0;
    } else if (d == 2) {
      const double a = 2.0 * std::numbers::pi * static_cast<double>(i) / static_cast<double>(c.params.directions);
      u << std::cos(a), std::sin(a);
    } else {
      do {
        for (int k = 0; k < d; ++k) u[k] = normal(rng);
      } while (u.norm() == 0.0);
      u /= u.norm();
    }
    dirs.push_back(u);
  }
  json rows = json::array();
  double growth_dev = 0.0, ratio_dev = 0.0, prev_growth = INFINITY, prev_ratio = INFINITY;
  bool growth_decreasing = true, ratio_decreasing = true;
  for (double f : c.params.radius_factors) {
    const double R = f * scale;
    growth_dev = 0.0;
    ratio_dev = 0.0;
    for (const Vector& u : dirs) {
      const Vector x = R * u;
      growth_dev = std::max(growth_dev, std::abs(field.s_star(x).norm() / R - target) / target);
      const double ratio = std::exp(field.lyapunov_denominator(x).log() - field.lyapunov(x).log());
      ratio_dev = std::max(ratio_dev, std::abs(ratio - ratio_target) / ratio_target);
    }
    growth_decreasing = growth_decreasing && growth_dev <= prev_growth;
    ratio_decreasing = ratio_decreasing && ratio_dev <= prev_ratio;
    prev_growth = growth_dev;
    prev_ratio = ratio_dev;
    rows.push_back({{"radius", R}, {"growth_rel_dev", growth_dev}, {"ratio_rel_dev", ratio_dev}});
  }
  ctx.certify("growth_limit", growth_dev <= 0.01 && growth_decreasing, 0.01 - growth_dev);
  ctx.certify("ratio_limit", ratio_dev <= 0.01 && ratio_decreasing, 0.01 - ratio_dev);
  json report = {{"experiment", "growth"},
                 {"growth_target", target},
                 {"ratio_target", ratio_target},
                 {"radii", rows},
                 {"certificates", certificates_json(ctx.result)}};
  write_json(ctx.artifact(".json"), report);
}

}  // namespace

int RunResult::exit_code() const {
  for (const auto& c : certificates)
    if (!c.pass) return exit_certificate_failure;
  return exit_ok;
}

std::string format_double(double value) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", value);
  return buf;
}

void write_trajectory_csv(std::ostream& out, const Trajectory& traj, int d) {
  out << 't';
  for (int i = 1; i <= d; ++i) out << ",x_" << i;
  out << ",L,grad_norm,speed\n";
  const double nan = std::nan("");
  for (std::size_t k = 0; k < traj.size(); ++k) {
    out << format_double(traj.times[k]);
    for (int i = 0; i < d; ++i) out << ',' << format_double(traj.states[k][i]);
    const bool diag = k < traj.diagnostics.size();
    out << ',' << format_double(diag ? std::exp(traj.diagnostics[k].log_l) : nan) << ','
        << format_double(diag ? traj.diagnostics[k].grad_norm : nan) << ','
        << format_double(diag ? traj.diagnostics[k].speed : nan) << '\n';
  }
}

RunResult run(const ExperimentConfig& config, const RunOptions& options, std::ostream& log) {
  validate(config);
  Context ctx{config,
              fs::path(options.out_dir.empty() ? config.output : options.out_dir),
              options.seed.value_or(config.seed),
              Parallelism{options.threads},
              log,
              {}};
  fs::create_directories(ctx.out_dir);
  const ScoreField field(config.model, make_measure(config));
  const Perturbation e = make_perturbation(config);
  switch (config.experiment) {
    case Experiment::flow: run_flow(ctx, field, e); break;
    case Experiment::langevin: run_langevin(ctx, field, e); break;
    case Experiment::pf_ode: run_pf_ode(ctx, field, e); break;
    case Experiment::loss_check: run_loss_check(ctx, field, e); break;
    case Experiment::equilibria: run_equilibria(ctx, field); break;
    case Experiment::basins: run_basins(ctx, field, e); break;
    case Experiment::growth: run_growth(ctx, field); break;
  }
  return ctx.result;
}

std::string describe(const ExperimentConfig& c) {
  validate(c);
  std::ostringstream out;
  const EmpiricalMeasure measure = make_measure(c);
  const Schedule schedule = make_schedule(c);
  const auto& m = c.model;
  out << "experiment      " << to_string(c.experiment) << '\n'
      << "seed            " << c.seed << '\n'
      << "d               " << m.d << '\n'
      << "alpha           " << format_double(m.alpha) << '\n'
      << "sigma_eps       " << format_double(m.sigma_eps) << '\n'
      << "sigma_T         " << format_double(m.sigma_T) << '\n'
      << "schedule        " << c.schedule.kind << " epsilon=" << format_double(c.schedule.epsilon)
      << " T=" << format_double(c.schedule.T) << '\n'
      << "measure         " << measure.size() << " points, support_radius="
      << format_double(measure.support_radius()) << '\n'
      << "perturbation    " << c.perturbation.kind << '\n';
  out << "sigma ladder   ";
  for (double s : noise_levels(c)) out << ' ' << format_double(s);
  out << '\n';
  const double u_end = u_of_t(schedule, m.alpha, schedule.T() - schedule.epsilon());
  out << "u(T - epsilon)  " << format_double(u_end)
      << (m.alpha == 2.0 ? "  [log(sigma_T / sigma_eps)]"
                         : "  [(sigma_T^(2-alpha) - sigma_eps^(2-alpha)) / (2-alpha)]")
      << '\n';
  if (m.alpha > -m.d)
    out << "k bound         " << format_double(m.k_bound()) << "  [sqrt(2(d+alpha+2) / (3(d+alpha)))]\n";
  else
    out << "k bound         undefined for alpha <= -d\n";
  return out.str();
}

}  // namespace scoredyn::cli
