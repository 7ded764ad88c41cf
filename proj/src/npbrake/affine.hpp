#pragma once

namespace npb {

// c0 + c_v2 * v^2 + c_vd * vdot. Quantities the planner constrains are all
// of this form for frozen stage parameters.
struct AffineScalar {
  double c0 = 0.0;
  double c_v2 = 0.0;
  double c_vd = 0.0;

  constexpr double operator()(double v2, double vdot) const {
    return c0 + c_v2 * v2 + c_vd * vdot;
  }

  constexpr AffineScalar& operator+=(const AffineScalar& o) {
    c0 += o.c0;
    c_v2 += o.c_v2;
    c_vd += o.c_vd;
    return *this;
  }
  constexpr AffineScalar& operator-=(const AffineScalar& o) {
    c0 -= o.c0;
    c_v2 -= o.c_v2;
    c_vd -= o.c_vd;
    return *this;
  }
  constexpr AffineScalar& operator*=(double k) {
    c0 *= k;
    c_v2 *= k;
    c_vd *= k;
    return *this;
  }

  static constexpr AffineScalar Constant(double c) { return {c, 0.0, 0.0}; }
  static constexpr AffineScalar SpeedSquared(double k) { return {0.0, k, 0.0}; }
  static constexpr AffineScalar Acceleration(double k) { return {0.0, 0.0, k}; }
};

constexpr AffineScalar operator+(AffineScalar a, const AffineScalar& b) { return a += b; }
constexpr AffineScalar operator-(AffineScalar a, const AffineScalar& b) { return a -= b; }
constexpr AffineScalar operator-(AffineScalar a) { return a *= -1.0; }
constexpr AffineScalar operator*(double k, AffineScalar a) { return a *= k; }
constexpr AffineScalar operator*(AffineScalar a, double k) { return a *= k; }

}  // namespace npb
