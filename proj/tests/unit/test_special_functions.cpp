#include <cmath>
#include <vector>

#include <boost/math/special_functions/gamma.hpp>
#include <gtest/gtest.h>

#include "../support/oracles.hpp"
#include "scoredyn/errors.hpp"
#include "scoredyn/special_functions.hpp"

using scoredyn::PhiArgs;
using scoredyn::phi;
using scoredyn::phi_at_zero;
using scoredyn::phi_dz;
using scoredyn::phi_scaled;

namespace {

double rel(double x, double ref) { return std::abs(x - ref) / std::abs(ref); }

}  // namespace

TEST(Phi, ClosedFormExamples) {
  EXPECT_NEAR(phi({1, 2, 1, 0}).value(), 0.75, 1e-15);
  EXPECT_NEAR(phi({1, 2, 0, 0}).value(), std::log(4.0), 1e-15);
  EXPECT_NEAR(phi({1, 2, 1, 1}).value(), std::exp(-0.25) - std::exp(-1.0), 1e-14);
}

TEST(Phi, MatchesQuadratureOracle) {
  const double ref = oracle::phi(0.5, 3.0, 2.5, 7.3);
  EXPECT_LE(rel(phi({0.5, 3.0, 2.5, 7.3}).value(), ref), 1e-10);
}

TEST(Phi, OracleGrid) {
  const std::vector<std::pair<double, double>> bounds{{1.0, 2.0}, {0.5, 3.0}, {0.1, 10.0}};
  for (auto [a, b] : bounds)
    for (double s : {-3.0, -1.0, 0.0, 0.5, 1.0, 2.0, 5.0, 10.0})
      for (double z : {0.0, 0.1, 1.0, 10.0, 100.0, 1e4}) {
        const double got = phi({a, b, s, z}).log();
        const double ref = oracle::log_phi(a, b, s, z);
        EXPECT_LE(std::abs(std::expm1(got - ref)), 1e-10)
            << "a=" << a << " b=" << b << " s=" << s << " z=" << z;
      }
}

TEST(Phi, AgreesWithIncompleteGammaForPositiveShape) {
  for (double s : {0.5, 1.0, 1.5, 2.0, 3.5})
    for (double z : {0.01, 0.3, 2.0, 20.0, 150.0}) {
      const double ref = oracle::phi_gamma(1.0, 2.0, s, z);
      EXPECT_LE(rel(phi({1.0, 2.0, s, z}).value(), ref), 1e-10) << "s=" << s << " z=" << z;
    }
}

TEST(Phi, ExtremeArgumentsStayFinite) {
  for (double z : {1e-300, 1e-10, 1e8, 1e12}) {
    for (double s : {-20.0, 0.0, 20.0}) {
      const double lv = phi({1e-3, 1e3, s, z}).log();
      EXPECT_TRUE(std::isfinite(lv)) << s << " " << z;
    }
  }
}

TEST(Phi, InvalidArguments) {
  EXPECT_THROW(phi({0.0, 2, 1, 1}), scoredyn::InvalidArgs);
  EXPECT_THROW(phi({-1, 2, 1, 1}), scoredyn::InvalidArgs);
  EXPECT_THROW(phi({2, 2, 1, 1}), scoredyn::InvalidArgs);
  EXPECT_THROW(phi({3, 2, 1, 1}), scoredyn::InvalidArgs);
  EXPECT_THROW(phi({1, 2, 1, -1e-12}), scoredyn::InvalidArgs);
  EXPECT_THROW(phi({1, 2, NAN, 1}), scoredyn::InvalidArgs);
}

TEST(PhiAtZero, ClosedForm) {
  EXPECT_NEAR(phi_at_zero(1, 2, 1), 0.75, 1e-15);
  EXPECT_NEAR(phi_at_zero(1, 2, 0), 1.3862944, 1e-7);
  for (double s : {-2.0, -1e-9, 1e-9, 0.7, 4.0}) {
    const double expected = (std::pow(0.3, -2 * s) - std::pow(5.0, -2 * s)) / s;
    EXPECT_LE(rel(phi_at_zero(0.3, 5.0, s), expected), 1e-6) << s;
    EXPECT_LE(rel(phi_at_zero(0.3, 5.0, s), oracle::phi(0.3, 5.0, s, 0.0)), 1e-12) << s;
  }
  EXPECT_THROW(phi_at_zero(2, 1, 1), scoredyn::InvalidArgs);
}

TEST(PhiAtZero, SmallLowerBoundLimit) {
  const double a = 1e-6;
  const double s = 2.0;
  EXPECT_LE(rel(std::pow(a, 2 * s) * phi_at_zero(a, 1.0, s), 1.0 / s), 1e-6);
}

TEST(PhiDz, ExamplesAndIdentity) {
  EXPECT_NEAR(phi_dz({1, 2, 0, 0}), -0.75, 1e-15);
  EXPECT_LE(rel(phi_dz({1, 2, 1, 1}), -oracle::phi(1, 2, 2, 1)), 1e-10);
  for (double s : {-2.0, 0.0, 0.5, 3.0})
    for (double z : {0.0, 0.5, 5.0, 50.0}) {
      const double d = phi_dz({0.5, 3.0, s, z});
      EXPECT_LT(d, 0.0);
      EXPECT_LE(std::abs(d + phi({0.5, 3.0, s + 1.0, z}).value()),
                1e-10 * phi({0.5, 3.0, s + 1.0, z}).value());
    }
}

TEST(PhiDz, MatchesCentralDifference) {
  for (double s : {-1.0, 0.5, 2.0})
    for (double z : {0.5, 3.0, 40.0}) {
      const double h = 1e-6 * std::max(1.0, z);
      const double fd =
          (phi({0.5, 3.0, s, z + h}).value() - phi({0.5, 3.0, s, z - h}).value()) / (2 * h);
      EXPECT_LE(rel(fd, phi_dz({0.5, 3.0, s, z})), 1e-6) << s << " " << z;
    }
}

TEST(PhiScaled, Examples) {
  EXPECT_NEAR(phi_scaled({1, 2, 1, 40}), -std::expm1(-30.0), 1e-13);
  EXPECT_NEAR(phi_scaled({1, 2, 1, 2.0}), -std::expm1(-1.5), 1e-13);
  // Far from the limit at z = 400: the next term of the expansion is
  // (s - 1) b^{2(2-s)} / z, a 2% offset for s = 3, b = 2.
  const double scaled = phi_scaled({1, 2, 3, 400});
  const double reference = 400.0 * std::exp(100.0 + oracle::log_phi(1, 2, 3, 400));
  EXPECT_LE(rel(scaled, reference), 1e-10);
  EXPECT_NEAR(scaled / 0.0625 - 1.0, 2.0 * 4.0 / 400.0, 1e-3);
  EXPECT_LE(rel(phi_scaled({0.5, 3, 0, 1000}), 9.0), 0.01);
  EXPECT_THROW(phi_scaled({1, 2, 1, 0}), scoredyn::InvalidArgs);
}

TEST(PhiScaled, ErrorDecreasesTowardsLimit) {
  for (double s : {0.0, 1.0, 3.0}) {
    const double b = 2.0;
    const double limit = std::pow(b, 2 * (1 - s));
    double previous = INFINITY;
    for (double f : {1e2, 1e3, 1e4}) {
      const double err = rel(phi_scaled({1.0, b, s, f * b * b}), limit);
      EXPECT_TRUE(err < previous || err == 0.0) << s << " " << f;
      previous = err;
    }
    EXPECT_LE(previous, 1e-2);
  }
}

TEST(PhiProperties, PositiveDecreasingConvexInZ) {
  for (double s : {-3.0, -0.5, 0.0, 1.0, 4.0}) {
    double prev = INFINITY;
    for (double z = 0.0; z < 60.0; z += 0.37) {
      const double v = phi({0.5, 3.0, s, z}).value();
      EXPECT_GT(v, 0.0);
      EXPECT_LT(v, prev);
      prev = v;
      const double z2 = z + 1.3;
      const double mid = phi({0.5, 3.0, s, 0.5 * (z + z2)}).value();
      EXPECT_LE(mid, 0.5 * (v + phi({0.5, 3.0, s, z2}).value()) * (1 + 1e-13));
    }
  }
}

TEST(PhiProperties, SmallLowerBoundScaling) {
  // a^{2s} Phi(a, b, s, k a^2) -> k^{-s} gamma_lower(s, k) as a -> 0.
  const double a = 1e-5;
  for (double s : {0.5, 1.0, 2.5})
    for (double k : {0.5, 2.0, 10.0}) {
      const double lhs = std::pow(a, 2 * s) * phi({a, 1.0, s, k * a * a}).value();
      const double rhs = std::pow(k, -s) * boost::math::tgamma_lower(s, k);
      // The omitted piece \int_0^{a^2} v^{s-1} e^{-k v} dv is at most a^{2s} / s.
      EXPECT_LE(std::abs(lhs - rhs), std::pow(a, 2 * s) / s + 1e-10 * rhs) << s << " " << k;
      EXPECT_LE(rel(lhs, rhs), 1e-4);
    }
}
