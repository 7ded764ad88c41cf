#include "npbrake/spline.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "npbrake/errors.hpp"

namespace npb {

CubicSpline::CubicSpline(std::span<const double> knots,
                         std::span<const double> values)
    : knots_(knots.begin(), knots.end()),
      values_(values.begin(), values.end()) {
  const std::size_t n = knots_.size();
  if (n < 2 || values_.size() != n) {
    Throw(ErrorCode::kInvalidArgument,
          "spline needs >= 2 knots and one value per knot");
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (!std::isfinite(knots_[i]) || !std::isfinite(values_[i])) {
      Throw(ErrorCode::kInvalidArgument, "spline data must be finite");
    }
    if (i > 0 && !(knots_[i] > knots_[i - 1])) {
      Throw(ErrorCode::kInvalidArgument,
            "spline knots must be strictly increasing");
    }
  }

  // Second derivatives M_i from the tridiagonal system, M_0 = M_{n-1} = 0.
  std::vector<double> m(n, 0.0);
  if (n > 2) {
    const std::size_t k = n - 2;
    std::vector<double> diag(k), upper(k), rhs(k);
    for (std::size_t i = 1; i + 1 < n; ++i) {
      const double h0 = knots_[i] - knots_[i - 1];
      const double h1 = knots_[i + 1] - knots_[i];
      diag[i - 1] = 2.0 * (h0 + h1);
      upper[i - 1] = h1;
      rhs[i - 1] = 6.0 * ((values_[i + 1] - values_[i]) / h1 -
                          (values_[i] - values_[i - 1]) / h0);
    }
    // Thomas algorithm; the lower diagonal equals the shifted upper one.
    for (std::size_t i = 1; i < k; ++i) {
      const double w = upper[i - 1] / diag[i - 1];
      diag[i] -= w * upper[i - 1];
      rhs[i] -= w * rhs[i - 1];
    }
    m[k] = rhs[k - 1] / diag[k - 1];
    for (std::size_t i = k - 1; i >= 1; --i) {
      m[i] = (rhs[i - 1] - upper[i - 1] * m[i + 1]) / diag[i - 1];
    }
  }

  b_.resize(n - 1);
  c_.resize(n - 1);
  d_.resize(n - 1);
  cumulative_.assign(n, 0.0);
  for (std::size_t i = 0; i + 1 < n; ++i) {
    const double h = knots_[i + 1] - knots_[i];
    b_[i] = (values_[i + 1] - values_[i]) / h - h * (2.0 * m[i] + m[i + 1]) / 6.0;
    c_[i] = 0.5 * m[i];
    d_[i] = (m[i + 1] - m[i]) / (6.0 * h);
    cumulative_[i + 1] =
        cumulative_[i] + h * (values_[i] + h * (b_[i] / 2.0 +
                                                h * (c_[i] / 3.0 + h * d_[i] / 4.0)));
  }
}

CubicSpline CubicSpline::Constant(double value, double lo, double hi) {
  const double knots[] = {lo, hi};
  const double values[] = {value, value};
  return CubicSpline(knots, values);
}

CubicSpline CubicSpline::Linear(double value_lo, double slope, double lo,
                                double hi) {
  const double knots[] = {lo, hi};
  const double values[] = {value_lo, value_lo + slope * (hi - lo)};
  return CubicSpline(knots, values);
}

std::size_t CubicSpline::Segment(double x) const {
  if (x <= knots_.front()) return 0;
  if (x >= knots_.back()) return knots_.size() - 2;
  const auto it = std::upper_bound(knots_.begin(), knots_.end(), x);
  return static_cast<std::size_t>(it - knots_.begin()) - 1;
}

CubicSpline::Sample CubicSpline::Evaluate(double x) const {
  const std::size_t n = knots_.size();
  if (x < knots_.front()) {
    const double t = x - knots_.front();
    return {values_.front() + b_.front() * t, b_.front(), 0.0};
  }
  if (x > knots_.back()) {
    const double h = knots_[n - 1] - knots_[n - 2];
    const double slope = b_.back() + h * (2.0 * c_.back() + 3.0 * h * d_.back());
    const double t = x - knots_.back();
    return {values_.back() + slope * t, slope, 0.0};
  }
  const std::size_t i = Segment(x);
  const double t = x - knots_[i];
  return {values_[i] + t * (b_[i] + t * (c_[i] + t * d_[i])),
          b_[i] + t * (2.0 * c_[i] + 3.0 * t * d_[i]),
          2.0 * c_[i] + 6.0 * t * d_[i]};
}

double CubicSpline::Integral(double x) const {
  const std::size_t n = knots_.size();
  if (x < knots_.front()) {
    const double t = x - knots_.front();
    return t * (values_.front() + 0.5 * b_.front() * t);
  }
  if (x > knots_.back()) {
    const Sample end = Evaluate(knots_.back());
    const double t = x - knots_.back();
    return cumulative_[n - 1] + t * (end.value + 0.5 * end.d1 * t);
  }
  const std::size_t i = Segment(x);
  const double t = x - knots_[i];
  return cumulative_[i] +
         t * (values_[i] + t * (b_[i] / 2.0 + t * (c_[i] / 3.0 + t * d_[i] / 4.0)));
}

}  // namespace npb
