#pragma once

#include <span>
#include <vector>

namespace npb {

// Natural cubic spline through (knot, value) pairs. Outside the knot range
// the spline continues linearly, which keeps it C2 everywhere.
class CubicSpline {
 public:
  struct Sample {
    double value = 0.0;
    double d1 = 0.0;
    double d2 = 0.0;
  };

  CubicSpline() = default;
  CubicSpline(std::span<const double> knots, std::span<const double> values);

  // Spline with a constant value on [lo, hi].
  static CubicSpline Constant(double value, double lo, double hi);
  // Spline with an exactly linear profile on [lo, hi].
  static CubicSpline Linear(double value_lo, double slope, double lo, double hi);

  Sample Evaluate(double x) const;
  double operator()(double x) const { return Evaluate(x).value; }

  // Integral of the spline from the first knot to x.
  double Integral(double x) const;

  std::span<const double> knots() const { return knots_; }
  std::span<const double> values() const { return values_; }

 private:
  std::size_t Segment(double x) const;

  std::vector<double> knots_;
  std::vector<double> values_;
  // Per-segment coefficients of v(t) = a + b t + c t^2 + d t^3, t = x - x_i.
  std::vector<double> b_, c_, d_;
  // Cumulative integral at each knot.
  std::vector<double> cumulative_;
};

}  // namespace npb
