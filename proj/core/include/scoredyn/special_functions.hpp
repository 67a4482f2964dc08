#pragma once

#include "scoredyn/log_positive.hpp"

namespace scoredyn {

/// Arguments of the finite-interval kernel
///   Phi_a^b(s, z) = \int_{1/b^2}^{1/a^2} u^{s-1} e^{-z u} du.
/// a and b are the lower and upper noise bounds; z is a half squared distance.
struct PhiArgs {
  double a = 1.0;
  double b = 2.0;
  double s = 1.0;
  double z = 0.0;
};

/// Throws InvalidArgs unless 0 < a < b < inf, s finite and 0 <= z < inf.
void validate(const PhiArgs& args);

/// Phi_a^b(s, z) for every real s and z >= 0, in log form.
///
/// Uses the closed form at z = 0. Otherwise integrates in v = log u around the
/// integrand's maximum, truncated where the integrand has fallen 50 nats below
/// the peak, with adaptive Gauss-Kronrod (relative tolerance 1e-12, at most 20
/// bisection levels). Throws NumericAccuracy when the tolerance is missed.
LogPositive phi(const PhiArgs& args);

/// Closed form of Phi_a^b(s, 0): (a^{-2s} - b^{-2s}) / s, or log(b^2/a^2) at s = 0.
double phi_at_zero(double a, double b, double s);
LogPositive log_phi_at_zero(double a, double b, double s);

/// d/dz Phi_a^b(s, z) = -Phi_a^b(s + 1, z).
double phi_dz(const PhiArgs& args);

/// z e^{z/b^2} Phi_a^b(s, z) for z > 0; tends to b^{2(1-s)} as z grows.
double phi_scaled(const PhiArgs& args);

}  // namespace scoredyn
