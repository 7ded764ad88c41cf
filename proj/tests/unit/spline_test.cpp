#include <cmath>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <gtest/gtest.h>

#include "npbrake/spline.hpp"

namespace npb {
namespace {

CubicSpline SineSpline() {
  std::vector<double> x, v;
  for (int i = 0; i <= 20; ++i) {
    x.push_back(0.25 * i * i / 20.0 + 0.3 * i);  // uneven knots
    v.push_back(std::sin(x.back()));
  }
  return CubicSpline(x, v);
}

TEST(Spline, LinearProfileIsExact) {
  const CubicSpline s = CubicSpline::Linear(2.0, 0.5, 0.0, 10.0);
  for (double x : {-3.0, 0.0, 1.7, 9.99, 14.0}) {
    const auto e = s.Evaluate(x);
    EXPECT_NEAR(e.value, 2.0 + 0.5 * x, 1e-12);
    EXPECT_NEAR(e.d1, 0.5, 1e-12);
    EXPECT_NEAR(e.d2, 0.0, 1e-12);
  }
}

TEST(Spline, ConstantIntegral) {
  const CubicSpline s = CubicSpline::Constant(3.0, 1.0, 5.0);
  EXPECT_NEAR(s(2.5), 3.0, 1e-14);
  EXPECT_NEAR(s.Integral(4.0), 9.0, 1e-12);
}

TEST(Spline, InterpolatesKnots) {
  const CubicSpline s = SineSpline();
  for (std::size_t i = 0; i < s.knots().size(); ++i) {
    EXPECT_NEAR(s(s.knots()[i]), s.values()[i], 1e-13);
  }
}

TEST(Spline, NaturalEndsAndC2AtKnots) {
  const CubicSpline s = SineSpline();
  const auto k = s.knots();
  EXPECT_NEAR(s.Evaluate(k.front()).d2, 0.0, 1e-12);
  EXPECT_NEAR(s.Evaluate(k.back()).d2, 0.0, 1e-12);
  const double eps = 1e-9;
  for (std::size_t i = 1; i + 1 < k.size(); ++i) {
    const auto lo = s.Evaluate(k[i] - eps);
    const auto hi = s.Evaluate(k[i] + eps);
    EXPECT_NEAR(lo.value, hi.value, 1e-8);
    EXPECT_NEAR(lo.d1, hi.d1, 1e-7);
    EXPECT_NEAR(lo.d2, hi.d2, 1e-6);
  }
}

TEST(Spline, DerivativesMatchDifferences) {
  const CubicSpline s = SineSpline();
  const double h = 1e-5;
  for (double x = 0.1; x < 10.0; x += 0.37) {
    const auto e = s.Evaluate(x);
    EXPECT_NEAR(e.d1, (s(x + h) - s(x - h)) / (2 * h), 1e-6);
    EXPECT_NEAR(e.d2, (s.Evaluate(x + h).d1 - s.Evaluate(x - h).d1) / (2 * h), 1e-5);
  }
}

TEST(Spline, IntegralMatchesQuadrature) {
  const CubicSpline s = SineSpline();
  const double x0 = s.knots().front();
  for (double x : {0.4, 3.3, 7.9, 11.0, 13.5}) {
    const double q = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
        [&](double t) { return s(t); }, x0, x, 15, 1e-13);
    EXPECT_NEAR(s.Integral(x), q, 1e-10) << "x=" << x;
  }
}

TEST(Spline, ContinuesLinearlyOutside) {
  const CubicSpline s = SineSpline();
  const double hi = s.knots().back();
  const auto end = s.Evaluate(hi);
  EXPECT_NEAR(s(hi + 2.0), end.value + 2.0 * end.d1, 1e-12);
  EXPECT_NEAR(s.Evaluate(hi + 2.0).d2, 0.0, 1e-12);
}

}  // namespace
}  // namespace npb
