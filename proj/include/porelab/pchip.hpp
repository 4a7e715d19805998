#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

#include "porelab/core.hpp"

namespace porelab {

/// Shape-preserving piecewise cubic Hermite interpolant (Fritsch-Carlson
/// monotonicity with Fritsch-Butland interior slopes).
///
/// Interior slopes are the weighted harmonic mean of the neighbouring secants
/// when both have the same sign and zero otherwise; end slopes use the
/// one-sided three-point formula, clipped so they never point against the
/// adjacent secant or exceed three times it. On every interval the cubic is
/// therefore monotone and stays between its two node values. Outside
/// [x_front, x_back] the interpolant is held constant.
class Pchip {
 public:
  Pchip() = default;

  Pchip(std::span<const double> x, std::span<const double> y) : x_(x.begin(), x.end()), y_(y.begin(), y.end()) {
    if (x_.size() != y_.size()) throw ParameterError("pchip: x and y lengths differ");
    if (x_.size() < 2) throw ParameterError("pchip: at least two nodes required");
    for (std::size_t i = 0; i < x_.size(); ++i)
      if (!std::isfinite(x_[i]) || !std::isfinite(y_[i])) throw DataError("pchip: non-finite node");
    for (std::size_t i = 1; i < x_.size(); ++i)
      if (!(x_[i] > x_[i - 1])) throw ParameterError("pchip: x must be strictly increasing");
    compute_slopes();
  }

  double operator()(double x) const {
    if (x <= x_.front()) return y_.front();
    if (x >= x_.back()) return y_.back();
    const auto it = std::upper_bound(x_.begin(), x_.end(), x);
    const auto k = static_cast<std::size_t>(it - x_.begin()) - 1;
    const double h = x_[k + 1] - x_[k];
    const double t = (x - x_[k]) / h;
    const double s = 1.0 - t;
    // Hermite form relative to y_k: exactly constant on flat intervals.
    return y_[k] + t * t * (3.0 - 2.0 * t) * (y_[k + 1] - y_[k]) + h * t * s * (s * d_[k] - t * d_[k + 1]);
  }

  const std::vector<double>& nodes_x() const noexcept { return x_; }
  const std::vector<double>& nodes_y() const noexcept { return y_; }
  const std::vector<double>& slopes() const noexcept { return d_; }

 private:
  static bool same_sign(double a, double b) { return (a > 0.0 && b > 0.0) || (a < 0.0 && b < 0.0); }

  void compute_slopes() {
    const std::size_t n = x_.size();
    std::vector<double> h(n - 1), delta(n - 1);
    for (std::size_t k = 0; k + 1 < n; ++k) {
      h[k] = x_[k + 1] - x_[k];
      delta[k] = (y_[k + 1] - y_[k]) / h[k];
    }
    d_.assign(n, 0.0);
    if (n == 2) {
      d_[0] = d_[1] = delta[0];
      return;
    }
    for (std::size_t k = 1; k + 1 < n; ++k) {
      if (!same_sign(delta[k - 1], delta[k])) continue;
      const double w1 = 2.0 * h[k] + h[k - 1];
      const double w2 = h[k] + 2.0 * h[k - 1];
      d_[k] = (w1 + w2) / (w1 / delta[k - 1] + w2 / delta[k]);
    }
    d_[0] = end_slope(h[0], h[1], delta[0], delta[1]);
    d_[n - 1] = end_slope(h[n - 2], h[n - 3], delta[n - 2], delta[n - 3]);
  }

  static double end_slope(double h0, double h1, double d0, double d1) {
    double d = ((2.0 * h0 + h1) * d0 - h0 * d1) / (h0 + h1);
    if (!same_sign(d, d0)) return 0.0;
    if (!same_sign(d0, d1) && std::abs(d) > std::abs(3.0 * d0)) d = 3.0 * d0;
    return d;
  }

  std::vector<double> x_;
  std::vector<double> y_;
  std::vector<double> d_;
};

}  // namespace porelab
