#pragma once

#include <cmath>
#include <complex>
#include <utility>
#include <vector>

#include "acoofdm/error.hpp"
#include "acoofdm/types.hpp"

namespace acoofdm {

/// Unit-average-power signaling alphabet. Square QAM constructions keep the
/// per-dimension PAM levels around so expectation integrals can run in one
/// dimension instead of two.
class Constellation {
 public:
  explicit Constellation(std::vector<cplx> points) : points_(std::move(points)) {
    if (points_.size() < 2) fail(errc::unsupported_order, "constellation needs at least 2 points");
    double power = 0.0;
    for (const cplx& x : points_) power += std::norm(x);
    power /= static_cast<double>(points_.size());
    if (std::abs(power - 1.0) > 1e-12)
      fail(errc::unsupported_order, "constellation average power must be 1");
    for (std::size_t a = 0; a < points_.size(); ++a)
      for (std::size_t b = a + 1; b < points_.size(); ++b)
        if (std::abs(points_[a] - points_[b]) < 1e-12)
          fail(errc::unsupported_order, "constellation points must be distinct");
    double ma = 0.0;
    for (const cplx& x : points_) ma += std::abs(x);
    mean_abs_ = ma / static_cast<double>(points_.size());
  }

  /// Square M-QAM (M = 4, 16, 64, ...) on the Gray-labeled integer grid,
  /// scaled to unit average power.
  static Constellation qam(int order) {
    if (order < 4) fail(errc::unsupported_order, "QAM order must be at least 4");
    int side = static_cast<int>(std::lround(std::sqrt(static_cast<double>(order))));
    if (side * side != order || (order & (order - 1)) != 0)
      fail(errc::unsupported_order, "QAM order must be an even power of 2");

    // Per-dimension levels -(L-1), ..., L-1 scaled so E{Re^2} = E{Im^2} = 1/2.
    const double scale = std::sqrt(3.0 / (2.0 * (static_cast<double>(side) * side - 1.0)));
    std::vector<double> levels(side);
    for (int a = 0; a < side; ++a) levels[a] = scale * (2 * a - side + 1);

    int bits = 0;
    while ((1 << bits) < side) ++bits;
    std::vector<cplx> pts(order);
    for (int n = 0; n < order; ++n) {
      // Gray-map each half of the symbol index to a grid coordinate.
      int hi = n >> bits, lo = n & (side - 1);
      pts[n] = cplx(levels[hi ^ (hi >> 1)], levels[lo ^ (lo >> 1)]);
    }
    Constellation c(std::move(pts));
    c.pam_levels_ = std::move(levels);
    return c;
  }

  const std::vector<cplx>& points() const { return points_; }
  int order() const { return static_cast<int>(points_.size()); }
  double mean_abs() const { return mean_abs_; }

  /// True when the alphabet is a product of two identical PAM sets.
  bool separable() const { return !pam_levels_.empty(); }
  const std::vector<double>& pam_levels() const { return pam_levels_; }

 private:
  std::vector<cplx> points_;
  std::vector<double> pam_levels_;
  double mean_abs_ = 0.0;
};

inline double mean_abs(const Constellation& c) { return c.mean_abs(); }

}  // namespace acoofdm
