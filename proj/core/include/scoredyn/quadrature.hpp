#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <queue>
#include <string>
#include <vector>

#include "scoredyn/errors.hpp"

namespace scoredyn::quadrature {

struct Estimate {
  double value = 0.0;
  double error = 0.0;
};

// 21-point Kronrod extension of the 10-point Gauss rule (QUADPACK qk21).
namespace detail {
inline constexpr std::array<double, 5> kGaussWeights = {
    0.066671344308688137593568809893332, 0.149451349150580593145776339657697,
    0.219086362515982043995534934228163, 0.269266719309996355091226921569469,
    0.295524224714752870173892994651338};
inline constexpr std::array<double, 11> kKronrodNodes = {
    0.995657163025808080735527280689003, 0.973906528517171720077964012084452,
    0.930157491355708226001207180059508, 0.865063366688984510732096688423493,
    0.780817726586416897063717578345042, 0.679409568299024406234327365114874,
    0.562757134668604683339000099272694, 0.433395394129247190799265943165784,
    0.294392862701460198131126603103866, 0.148874338981631210884826001129720,
    0.0};
inline constexpr std::array<double, 11> kKronrodWeights = {
    0.011694638867371874278064396062192, 0.032558162307964727478818972459390,
    0.054755896574351996031381300244580, 0.075039674810919952767043140916190,
    0.093125454583697605535065465083366, 0.109387158802297641899210590325805,
    0.123491976262065851077958109831074, 0.134709217311473325928054001771707,
    0.142775938577060080797094273138717, 0.147739104901338491374841515972068,
    0.149445554002916905664936468389821};
}  // namespace detail

/// One Gauss-Kronrod 21 panel with the QUADPACK error heuristic.
template <class F>
Estimate gauss_kronrod21(const F& f, double lo, double hi) {
  using namespace detail;
  const double center = 0.5 * (lo + hi);
  const double half = 0.5 * (hi - lo);
  const double f_center = f(center);
  double gauss = 0.0;
  double kronrod = kKronrodWeights[10] * f_center;
  double abs_sum = std::abs(kronrod);
  std::array<double, 10> f_lo{}, f_hi{};
  for (int j = 0; j < 10; ++j) {
    const double dx = half * kKronrodNodes[j];
    f_lo[j] = f(center - dx);
    f_hi[j] = f(center + dx);
    const double pair = f_lo[j] + f_hi[j];
    kronrod += kKronrodWeights[j] * pair;
    abs_sum += kKronrodWeights[j] * (std::abs(f_lo[j]) + std::abs(f_hi[j]));
    if (j % 2 == 1) gauss += kGaussWeights[j / 2] * pair;
  }
  const double mean = 0.5 * kronrod;
  double asc = kKronrodWeights[10] * std::abs(f_center - mean);
  for (int j = 0; j < 10; ++j)
    asc += kKronrodWeights[j] * (std::abs(f_lo[j] - mean) + std::abs(f_hi[j] - mean));

  const double dhalf = std::abs(half);
  Estimate est;
  est.value = kronrod * half;
  abs_sum *= dhalf;
  asc *= dhalf;
  double err = std::abs((kronrod - gauss) * half);
  if (asc != 0.0 && err != 0.0)
    err = asc * std::min(1.0, std::pow(200.0 * err / asc, 1.5));
  constexpr double eps = std::numeric_limits<double>::epsilon();
  if (abs_sum > std::numeric_limits<double>::min() / (50.0 * eps))
    err = std::max(50.0 * eps * abs_sum, err);
  est.error = err;
  return est;
}

struct AdaptiveOptions {
  double rel_tol = 1e-12;
  double abs_tol = 0.0;
  int max_depth = 20;
};

/// Globally adaptive bisection on [lo, hi] seeded with the given breakpoints.
/// Throws NumericAccuracy if the tolerance is not met before a panel would
/// have to be split beyond max_depth.
template <class F>
Estimate integrate(const F& f, std::vector<double> breakpoints,
                   const AdaptiveOptions& opts = {}) {
  struct Panel {
    double lo, hi;
    Estimate est;
    int depth;
    bool operator<(const Panel& other) const { return est.error < other.est.error; }
  };
  if (breakpoints.size() < 2) throw InvalidArgs("integrate: need an interval");
  std::priority_queue<Panel> panels;
  Estimate total;
  for (std::size_t i = 0; i + 1 < breakpoints.size(); ++i) {
    const double lo = breakpoints[i];
    const double hi = breakpoints[i + 1];
    if (!(hi > lo)) continue;
    Panel p{lo, hi, gauss_kronrod21(f, lo, hi), 0};
    total.value += p.est.value;
    total.error += p.est.error;
    panels.push(p);
  }
  auto converged = [&] {
    return total.error <= std::max(opts.abs_tol, opts.rel_tol * std::abs(total.value));
  };
  while (!panels.empty() && !converged()) {
    Panel worst = panels.top();
    if (worst.depth >= opts.max_depth) {
      throw NumericAccuracy("adaptive quadrature did not converge: error " +
                            std::to_string(total.error) + " on value " +
                            std::to_string(total.value));
    }
    panels.pop();
    const double mid = 0.5 * (worst.lo + worst.hi);
    Panel left{worst.lo, mid, gauss_kronrod21(f, worst.lo, mid), worst.depth + 1};
    Panel right{mid, worst.hi, gauss_kronrod21(f, mid, worst.hi), worst.depth + 1};
    total.value += left.est.value + right.est.value - worst.est.value;
    total.error += left.est.error + right.est.error - worst.est.error;
    panels.push(left);
    panels.push(right);
  }
  // Re-sum to drop the drift accumulated by incremental updates.
  Estimate exact;
  while (!panels.empty()) {
    exact.value += panels.top().est.value;
    exact.error += panels.top().est.error;
    panels.pop();
  }
  return exact;
}

template <class F>
Estimate integrate(const F& f, double lo, double hi, const AdaptiveOptions& opts = {}) {
  return integrate(f, std::vector<double>{lo, hi}, opts);
}

}  // namespace scoredyn::quadrature
