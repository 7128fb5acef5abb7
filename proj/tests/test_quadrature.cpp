#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <numbers>

#include "aew/quadrature.hpp"

namespace {

TEST(Quadrature, ExactOnCubics) {
  // Simpson is exact through degree 3; the adaptive wrapper must not spoil it
  auto f = [](double x) { return 2.0 * x * x * x - x * x + 3.0 * x - 5.0; };
  const double got = aew::integrate(f, -1.0, 2.0);
  const double want = (0.5 * 16 - 8.0 / 3.0 + 6.0 - 10.0) - (0.5 - (-1.0 / 3.0) + 1.5 - (-5.0));
  EXPECT_NEAR(got, want, 1e-12);
}

TEST(Quadrature, SmoothFunctionToTolerance) {
  const double got = aew::integrate([](double x) { return std::exp(x); }, 0.0, 1.0);
  EXPECT_NEAR(got, std::exp(1.0) - 1.0, 1e-10);
}

TEST(Quadrature, EmptyIntervalIsZeroAndReversedThrows) {
  auto f = [](double) { return 1.0; };
  EXPECT_EQ(aew::integrate(f, 0.5, 0.5), 0.0);
  EXPECT_THROW(aew::integrate(f, 1.0, 0.0), std::invalid_argument);
}

TEST(Quadrature, RejectsNonFiniteIntegrand) {
  auto f = [](double x) { return 1.0 / x; };  // infinite at 0
  EXPECT_THROW(aew::integrate(f, 0.0, 1.0, {}), std::runtime_error);
}

TEST(Quadrature, RejectsBadTolerance) {
  auto f = [](double) { return 1.0; };
  EXPECT_THROW(aew::integrate(f, 0.0, 1.0, {0.0, 60}), std::invalid_argument);
  EXPECT_THROW(aew::integrate(f, 0.0, 1.0, {-1e-10, 60}), std::invalid_argument);
}

TEST(Quadrature, KinkHandledByPiecewiseSplit) {
  // |x| on [-1, 1]: a single kink at 0; the piecewise variant must nail it
  auto f = [](double x) { return std::fabs(x); };
  const double got = aew::integrate_piecewise(f, -1.0, 1.0, {0.0});
  EXPECT_NEAR(got, 1.0, 1e-12);
}

TEST(Quadrature, PiecewiseIgnoresOutOfRangeHints) {
  auto f = [](double x) { return x * x; };
  const double got = aew::integrate_piecewise(f, 0.0, 1.0, {-5.0, 0.5, 7.0, 0.5});
  EXPECT_NEAR(got, 1.0 / 3.0, 1e-12);
}

TEST(Quadrature, SteepGaussianNeedsSeeding) {
  // exp(-x^2/t) for tiny t is a spike at 0; hint points make it convergent
  const double t = 1e-6;
  auto f = [t](double x) { return std::exp(-x * x / t); };
  const double s = std::sqrt(t);
  const double got = aew::integrate_piecewise(f, 0.0, 1.0, {s, 10.0 * s});
  const double want = 0.5 * std::sqrt(std::numbers::pi * t) * std::erf(1.0 / s);
  EXPECT_NEAR(got, want, 1e-12);
}

TEST(Quadrature, ToleranceKnobActuallyTightens) {
  auto f = [](double x) { return std::sin(20.0 * x); };
  const double want = (1.0 - std::cos(20.0)) / 20.0;
  aew::QuadOptions loose{1e-4, 60};
  aew::QuadOptions tight{1e-12, 60};
  const double e_loose = std::fabs(aew::integrate(f, 0.0, 1.0, loose) - want);
  const double e_tight = std::fabs(aew::integrate(f, 0.0, 1.0, tight) - want);
  EXPECT_LE(e_tight, 1e-11);
  EXPECT_LE(e_tight, e_loose + 1e-15);
}

}  // namespace
