#include "scoredyn/special_functions.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <boost/math/tools/roots.hpp>

#include "scoredyn/quadrature.hpp"

namespace scoredyn {

namespace {

// Integrand truncation depth below the peak, in nats.
constexpr double kTruncationDepth = 50.0;

// Log of expm1(y) / s for y = 2 s log(b/a), which has the sign of s.
double log_expm1_ratio(double y, double s) {
  if (y > 0.0) return y + std::log(-std::expm1(-y)) - std::log(s);
  return std::log(-std::expm1(y)) - std::log(-s);
}

// Solve g(delta) = target on [lo, hi] where g is monotone; only the location of
// the far truncation point matters, so a coarse bracket is sufficient.
template <class G>
double solve_monotone(const G& g, double target, double lo, double hi) {
  boost::uintmax_t max_iter = 100;
  auto shifted = [&](double d) { return g(d) - target; };
  const auto [left, right] = boost::math::tools::toms748_solve(
      shifted, lo, hi, boost::math::tools::eps_tolerance<double>(30), max_iter);
  return 0.5 * (left + right);
}

}  // namespace

void validate(const PhiArgs& args) {
  if (!(args.a > 0.0) || !std::isfinite(args.a))
    throw InvalidArgs("phi: lower bound a must be finite and positive");
  if (!(args.b > args.a) || !std::isfinite(args.b))
    throw InvalidArgs("phi: upper bound b must be finite and exceed a");
  if (!std::isfinite(args.s)) throw InvalidArgs("phi: shape s must be finite");
  if (!(args.z >= 0.0) || !std::isfinite(args.z))
    throw InvalidArgs("phi: z must be finite and non-negative");
}

LogPositive log_phi_at_zero(double a, double b, double s) {
  validate(PhiArgs{a, b, s, 0.0});
  const double log_ratio = std::log(b / a);
  if (s == 0.0) return LogPositive::from_log(std::log(2.0 * log_ratio));
  // (a^{-2s} - b^{-2s}) / s = b^{-2s} expm1(2 s log(b/a)) / s
  const double y = 2.0 * s * log_ratio;
  return LogPositive::from_log(-2.0 * s * std::log(b) + log_expm1_ratio(y, s));
}

double phi_at_zero(double a, double b, double s) { return log_phi_at_zero(a, b, s).value(); }

LogPositive phi(const PhiArgs& args) {
  validate(args);
  const double s = args.s;
  const double z = args.z;
  if (z == 0.0) return log_phi_at_zero(args.a, args.b, s);

  // Substituting u = u_peak * e^delta gives
  //   Phi = u_peak^s e^{-z u_peak} \int e^{s delta - c expm1(delta)} d delta,
  // with c = z u_peak. The exponent is concave in delta and maximal at 0.
  const double u_lo = 1.0 / (args.b * args.b);
  const double u_hi = 1.0 / (args.a * args.a);
  double u_peak = u_lo;
  double log_u_peak = -2.0 * std::log(args.b);
  if (s > 0.0) {
    const double u_star = s / z;
    if (u_star >= u_hi) {
      u_peak = u_hi;
      log_u_peak = -2.0 * std::log(args.a);
    } else if (u_star > u_lo) {
      u_peak = u_star;
      log_u_peak = std::log(s) - std::log(z);
    }
  }
  const double c = z * u_peak;
  const double d_lo = u_peak == u_lo ? 0.0 : std::log(u_lo / u_peak);
  const double d_hi = u_peak == u_hi ? 0.0 : std::log(u_hi / u_peak);
  auto exponent = [s, c](double delta) { return s * delta - c * std::expm1(delta); };

  double left = d_lo;
  double right = d_hi;
  if (d_lo < 0.0 && exponent(d_lo) < -kTruncationDepth)
    left = solve_monotone(exponent, -kTruncationDepth, d_lo, 0.0);
  if (d_hi > 0.0 && exponent(d_hi) < -kTruncationDepth)
    right = solve_monotone(exponent, -kTruncationDepth, 0.0, d_hi);

  std::vector<double> breaks;
  breaks.reserve(3);
  breaks.push_back(left);
  if (left < 0.0 && right > 0.0) breaks.push_back(0.0);
  breaks.push_back(right);

  auto integrand = [&exponent](double delta) { return std::exp(exponent(delta)); };
  quadrature::AdaptiveOptions opts;
  opts.rel_tol = 1e-12;
  opts.max_depth = 20;
  quadrature::Estimate est;
  try {
    est = quadrature::integrate(integrand, std::move(breaks), opts);
  } catch (const NumericAccuracy& e) {
    throw NumericAccuracy(std::string("phi(s=") + std::to_string(s) +
                          ", z=" + std::to_string(z) + "): " + e.what());
  }
  if (!(est.value > 0.0) || !std::isfinite(est.value))
    throw NumericAccuracy("phi: non-positive quadrature result");
  return LogPositive::from_log(s * log_u_peak - c + std::log(est.value));
}

double phi_dz(const PhiArgs& args) {
  return -phi(PhiArgs{args.a, args.b, args.s + 1.0, args.z}).value();
}

double phi_scaled(const PhiArgs& args) {
  if (!(args.z > 0.0)) throw InvalidArgs("phi_scaled: z must be positive");
  const LogPositive p = phi(args);
  return std::exp(std::log(args.z) + args.z / (args.b * args.b) + p.log());
}

}  // namespace scoredyn
