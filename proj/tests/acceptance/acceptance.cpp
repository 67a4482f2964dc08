// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any failure.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Eigenvalues>

#include "../support/fixtures.hpp"
#include "../support/oracles.hpp"
#include "scoredyn/analysis.hpp"
#include "scoredyn/dynamics.hpp"
#include "scoredyn/loss.hpp"
#include "scoredyn/special_functions.hpp"

using namespace scoredyn;
using fixtures::vec;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

struct Criterion {
  int id;
  std::string name;
  double budget_seconds;
  std::function<Outcome()> body;
};

std::string fmt(const char* format, auto... args) {
  char buf[256];
  std::snprintf(buf, sizeof buf, format, args...);
  return buf;
}

std::string g17(double v) { return fmt("%.17g", v); }

double rel(double x, double ref) { return std::abs(x - ref) / std::abs(ref); }

// Shared between the determinism check and the criteria it reruns.
std::string c5_serialized, c7_serialized;

Outcome phi_oracle() {
  const std::vector<std::pair<double, double>> bounds{{1.0, 2.0}, {0.5, 3.0}, {0.1, 10.0}};
  double worst = 0.0;
  for (auto [a, b] : bounds)
    for (double s : {-3.0, -1.0, 0.0, 0.5, 1.0, 2.0, 5.0, 10.0})
      for (double z : {0.0, 0.1, 1.0, 10.0, 100.0, 1e4}) {
        const double err = std::abs(std::expm1(phi({a, b, s, z}).log() - oracle::log_phi(a, b, s, z)));
        worst = std::max(worst, err);
      }
  return {worst <= 1e-10, fmt("max rel err %.2e over 144 points", worst)};
}

Outcome phi_asymptote() {
  bool pass = true;
  double worst_final = 0.0;
  for (auto [a, b] : std::vector<std::pair<double, double>>{{1.0, 2.0}, {0.1, 3.0}})
    for (double s : {0.0, 1.0, 3.0}) {
      double prev = INFINITY;
      for (double m : {1e2, 1e3, 1e4}) {
        const double err = std::abs(phi_scaled({a, b, s, m * b * b}) / std::pow(b, 2 * (1 - s)) - 1.0);
        if (!(err < prev || err == 0.0)) pass = false;
        prev = err;
      }
      worst_final = std::max(worst_final, prev);
    }
  pass = pass && worst_final <= 1e-2;
  return {pass, fmt("max err at z=1e4 b^2: %.2e, decreasing along the ladder", worst_final)};
}

Outcome derivative_consistency() {
  std::mt19937_64 rng(101);
  std::uniform_real_distribution<double> shape(-2.0, 4.0), logz(std::log(0.1), std::log(50.0));
  double worst_dz = 0.0, worst_grad = 0.0, worst_hess = 0.0;
  for (int i = 0; i < 100; ++i) {
    const double s = shape(rng), z = std::exp(logz(rng));
    const double h = 1e-3 * z;
    auto p = [&](double zz) { return phi({0.5, 3.0, s, zz}).value(); };
    // Five-point stencil.
    const double fd = (-p(z + 2 * h) + 8 * p(z + h) - 8 * p(z - h) + p(z - 2 * h)) / (12 * h);
    worst_dz = std::max(worst_dz, rel(fd, phi_dz({0.5, 3.0, s, z})));
  }
  for (int i = 0; i < 100; ++i) {
    const int d = 1 + i % 3;
    const ScoreField f(ModelConfig{d, 1.0, 0.3, 3.0}, fixtures::random_measure(rng, d, 4));
    const Vector x = fixtures::random_point(rng, d, 1.5);
    const double s = shape(rng);
    const Vector g = f.grad_big_l(s, x);
    const Matrix hs = f.hess_big_l(s, x);
    const double h = 1e-5 * (1.0 + x.norm());
    Vector fdg(d);
    Matrix fdh(d, d);
    for (int k = 0; k < d; ++k) {
      Vector xp = x, xm = x;
      xp[k] += h;
      xm[k] -= h;
      fdg[k] = (f.big_l(s, xp).value() - f.big_l(s, xm).value()) / (2 * h);
      fdh.col(k) = (f.grad_big_l(s, xp) - f.grad_big_l(s, xm)) / (2 * h);
    }
    worst_grad = std::max(worst_grad, (fdg - g).norm() / g.norm());
    worst_hess = std::max(worst_hess, (fdh - hs).norm() / hs.norm());
  }
  const bool pass = worst_dz <= 1e-6 && worst_grad <= 1e-5 && worst_hess <= 1e-4;
  return {pass, fmt("phi_dz %.1e, grad %.1e, hess %.1e", worst_dz, worst_grad, worst_hess)};
}

Outcome growth_limit() {
  bool pass = true;
  std::string detail;
  for (double alpha : {0.0, 1.0, 2.0}) {
    const double sigma_T = 2.0;
    const ScoreField f(ModelConfig{2, alpha, 0.1, sigma_T}, fixtures::five_points());
    const double target = std::pow(sigma_T, alpha - 2.0);
    const double radius = 1e3 * (f.measure().support_radius() + sigma_T);
    double worst = 0.0;
    for (int k = 0; k < 64; ++k) {
      const double angle = 2 * std::numbers::pi * k / 64.0;
      const Vector u = vec({std::cos(angle), std::sin(angle)});
      worst = std::max(worst, std::abs(f.s_star(radius * u).norm() / radius - target) / target);
    }
    pass = pass && worst <= 0.01;
    detail += fmt("alpha=%g: %.2e  ", alpha, worst);
  }
  return {pass, "relative deviation " + detail};
}

Outcome loss_decomposition(unsigned threads) {
  const ScoreField f(ModelConfig{1, 1.0, 0.1, 2.0}, fixtures::three_points_1d());
  const Schedule sched = Schedule::geometric(0.01, 1.0, 0.1, 2.0);
  const double c = 0.5;
  const FieldSpec optimal = FieldSpec::optimal();
  const FieldSpec once = FieldSpec::perturbed(Perturbation::constant(vec({c})));
  const FieldSpec twice = FieldSpec::perturbed(Perturbation::constant(vec({2 * c})));
  const Grid grid = Grid::cube(1, -20.0, 20.0, 4001);
  const double gap1 = weighted_l2_gap(once, f, grid);
  const double gap2 = weighted_l2_gap(twice, f, grid);
  McSampling sampling;
  sampling.n_t = 1'000'000;
  sampling.seed = 2024;
  sampling.parallelism.threads = threads;
  const McDifference d1 = mc_objective_difference(f, once, optimal, sched, sampling);
  sampling.seed = 2025;
  const McDifference d2 = mc_objective_difference(f, twice, once, sched, sampling);
  const double z1 = std::abs(d1.delta - gap1) / d1.std_error;
  const double z2 = std::abs(d2.delta - (gap2 - gap1)) / d2.std_error;
  std::ostringstream s;
  for (const McDifference* d : {&d1, &d2})
    s << g17(d->delta) << ' ' << g17(d->std_error) << ' ' << g17(d->first.estimate) << ' '
      << g17(d->second.estimate) << '\n';
  c5_serialized = s.str();
  return {z1 <= 3.0 && z2 <= 3.0,
          fmt("(s*, s*+c): %.4f vs %.4f, %.2f se; (s*+c, s*+2c): %.4f vs %.4f, %.2f se", d1.delta, gap1, z1,
              d2.delta, gap2 - gap1, z2)};
}

StepControl tight() {
  StepControl ctl;
  ctl.rel_tol = 1e-11;
  ctl.abs_tol = 1e-13;
  return ctl;
}

StepControl rk4_fine() {
  StepControl ctl;
  ctl.method = StepMethod::rk4;
  ctl.step = 1e-3;
  return ctl;
}

Outcome time_change() {
  const Schedule sched = Schedule::geometric(0.01, 1.0, 0.05, 3.0);
  std::mt19937_64 rng(606);
  double worst = 0.0;
  for (double alpha : {1.0, 2.0}) {
    const ScoreField f(ModelConfig{2, alpha, 0.05, 3.0}, fixtures::five_points());
    for (int i = 0; i < 10; ++i) {
      const Vector x0 = fixtures::random_point(rng, 2, 3.0);
      PfOdeOptions po;
      po.diagnostics = false;
      for (int k = 1; k <= 25; ++k) po.output_times.push_back(0.99 * k / 25.0);
      po.output_times.back() = 0.99;
      FlowOptions fo;
      fo.diagnostics = false;
      fo.equilibrium_tol = 0.0;
      for (double t : po.output_times) fo.output_times.push_back(u_of_t(sched, alpha, t));
      const Trajectory pf = pf_ode_sample(f, FieldSpec::optimal(), sched, alpha, x0, rk4_fine(), po);
      const Trajectory fl = flow_integrate(f, Perturbation::zero(), x0, fo.output_times.back(), rk4_fine(), fo);
      std::size_t j = 0;
      for (std::size_t k = 0; k < po.output_times.size(); ++k) {
        const auto ip = std::find(pf.times.begin(), pf.times.end(), po.output_times[k]);
        while (j < fl.size() && fl.times[j] != fo.output_times[k]) ++j;
        if (ip == pf.times.end() || j == fl.size()) return {false, "missing output time"};
        const Vector& xp = pf.states[static_cast<std::size_t>(ip - pf.times.begin())];
        worst = std::max(worst, (xp - fl.states[j]).lpNorm<Eigen::Infinity>() / (1 + x0.norm()));
      }
    }
  }
  return {worst <= 1e-4, fmt("max sup-norm diff / (1+|x0|) = %.2e", worst)};
}

Outcome langevin_noise_off() {
  const ScoreField f(ModelConfig{2, 1.0, 0.1, 2.0}, fixtures::five_points());
  const Schedule sched = Schedule::geometric(0.01, 1.0, 0.1, 2.0);
  LangevinParams p;
  p.alpha = 1.0;
  p.levels = geometric_levels(2.0, 0.1, 5);
  p.steps_per_level = 20'000;
  p.step_scale = 1e-5;
  p.noise_scale = 0.0;
  p.x0 = vec({1.8, -1.4});
  p.record_stride = 1000;
  p.seed = 7;
  const Trajectory lg = langevin_sample(f, FieldSpec::optimal(), sched, p);
  FlowOptions fo;
  fo.diagnostics = false;
  fo.equilibrium_tol = 0.0;
  fo.output_times.assign(lg.rescaled_times.begin() + 1, lg.rescaled_times.end());
  const Trajectory fl = flow_integrate(f, Perturbation::zero(), *p.x0, fo.output_times.back(), tight(), fo);
  double worst = 0.0;
  std::size_t j = 0;
  for (std::size_t k = 0; k < lg.size(); ++k) {
    while (j < fl.size() && fl.times[j] != lg.rescaled_times[k]) ++j;
    if (j == fl.size()) return {false, "missing output time"};
    worst = std::max(worst, (lg.states[k] - fl.states[j]).lpNorm<Eigen::Infinity>());
  }
  std::ostringstream s;
  for (std::size_t k = 0; k < lg.size(); ++k)
    s << g17(lg.rescaled_times[k]) << ' ' << g17(lg.states[k][0]) << ' ' << g17(lg.states[k][1]) << '\n';
  c7_serialized = s.str();
  return {worst <= 1e-4, fmt("sup-norm diff %.2e over %zu recorded states", worst, lg.size())};
}

Outcome critical_points() {
  const double sigma_T = 2.0, alpha = 1.0;
  const ScoreField f(ModelConfig{2, alpha, 0.1, sigma_T}, fixtures::five_points());
  const double radius = 3.0 * f.measure().support_radius();
  std::mt19937_64 rng(808);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<Vector> starts;
  for (int i = 0; i < 100; ++i) {
    const double r = radius * std::sqrt(unit(rng)), a = 2 * std::numbers::pi * unit(rng);
    starts.push_back(vec({r * std::cos(a), r * std::sin(a)}));
  }
  const StepControl ctl;
  const double t_end = 1e3 * std::pow(sigma_T, 2.0 - alpha);
  const ConvergenceReport r = critical_convergence(f, starts, t_end, ctl);
  double worst_drop = -INFINITY;
  for (double d : r.worst_drops) worst_drop = std::max(worst_drop, d);
  const bool pass = r.max_terminal_norm <= 1e-6 && worst_drop <= 10 * ctl.rel_tol;
  return {pass, fmt("max terminal |s*| %.2e, worst relative L drop %.2e (allowed %.0e)", r.max_terminal_norm,
                    worst_drop, 10 * ctl.rel_tol)};
}

Outcome overfitting_certificate() {
  const ScoreField f(ModelConfig{2, 1.0, 1e-3, 10.0}, fixtures::five_points());
  const double k = 1.0;
  if (!(k < f.config().k_bound())) return {false, "k above bound"};
  bool pass = true;
  double min_gap = INFINITY, max_dist = 0.0, min_margin = INFINITY;
  for (std::size_t j = 0; j < f.measure().size(); ++j) {
    const Vector& xi = f.measure().point(j);
    const ConcavityReport conc = check_concavity_ball(f, xi, k, 256, j);
    const double gap = boundary_gap(f, xi, k, 128, j);
    try {
      const EquilibriumReport eq = find_equilibrium_near(f, xi, k);
      pass = pass && conc.concave && gap > 0.0 && eq.stable && eq.distance < k * 1e-3 &&
             eq.nearest_datum_index == j;
      max_dist = std::max(max_dist, eq.distance);
    } catch (const Error&) {
      pass = false;
    }
    min_gap = std::min(min_gap, gap);
    min_margin = std::min(min_margin, conc.margin);
  }
  return {pass, fmt("min concavity margin %.2e, min boundary gap %.2e, max equilibrium distance %.2e",
                    min_margin, min_gap, max_dist)};
}

Outcome basin_sanity() {
  const ScoreField f(ModelConfig{1, 1.0, 1e-3, 2.0}, EmpiricalMeasure({vec({-1.0}), vec({1.0})}));
  const Grid grid = Grid::cube(1, -2.0, 2.0, 201);
  const BasinReport r = basin_classify(f, Perturbation::zero(), grid, 10.0);
  if (r.equilibria.size() != 2) return {false, "expected two equilibria"};
  std::size_t wrong = 0, band = 0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double x = grid.point(i)[0];
    const BasinLabel& l = r.labels[i];
    if (x == 0.0) {
      band += l.kind != BasinLabelKind::converged;
      continue;
    }
    const bool ok = l.kind == BasinLabelKind::converged && (r.equilibria[l.equilibrium].point[0] > 0) == (x > 0);
    wrong += !ok;
  }
  return {wrong == 0, fmt("%zu cells, %zu mislabelled, %zu on the boundary", grid.size(), wrong, band)};
}

Outcome determinism() {
  const std::string c5 = c5_serialized, c7 = c7_serialized;
  if (c5.empty() || c7.empty()) return {false, "criteria 5 and 7 did not produce output"};
  loss_decomposition(4);
  langevin_noise_off();
  const bool pass = c5 == c5_serialized && c7 == c7_serialized;
  return {pass, fmt("criterion 5 (4 threads vs 1) %s, criterion 7 %s", c5 == c5_serialized ? "identical" : "differs",
                    c7 == c7_serialized ? "identical" : "differs")};
}

}  // namespace

int main() {
  const std::vector<Criterion> criteria{
      {1, "phi oracle equivalence", 10, phi_oracle},
      {2, "phi asymptote", 1, phi_asymptote},
      {3, "derivative consistency", 30, derivative_consistency},
      {4, "growth limit", 5, growth_limit},
      {5, "loss decomposition", 120, [] { return loss_decomposition(1); }},
      {6, "time-change equivalence", 30, time_change},
      {7, "noise-free Langevin equivalence", 10, langevin_noise_off},
      {8, "convergence to critical points", 120, critical_points},
      {9, "overfitting certificate", 60, overfitting_certificate},
      {10, "basin classification", 30, basin_sanity},
      {11, "determinism", 240, determinism},
  };
  int failures = 0;
  for (const Criterion& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome out;
    try {
      out = c.body();
    } catch (const std::exception& e) {
      out = {false, std::string("exception: ") + e.what()};
    }
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const bool in_time = seconds < c.budget_seconds;
    const bool pass = out.pass && in_time;
    failures += !pass;
    std::printf("%s  C%-2d %-32s %7.2fs / %gs  %s%s\n", pass ? "PASS" : "FAIL", c.id, c.name.c_str(), seconds,
                c.budget_seconds, out.detail.c_str(), in_time ? "" : "  [over budget]");
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failures, criteria.size());
  return failures == 0 ? 0 : 1;
}
