#pragma once

#include <cmath>
#include <complex>
#include <limits>
#include <string>
#include <vector>

#include "acoofdm/error.hpp"

namespace acoofdm {

using cplx = std::complex<double>;

inline constexpr double inf = std::numeric_limits<double>::infinity();

/// System-level parameters of the link. The transform size is 2N; data symbols
/// occupy the N/2 odd subcarriers of the first half and their Hermitian images.
struct SystemParams {
  int n = 64;                    ///< N; total subcarriers 2N, N/2 data-bearing
  double bandwidth = 1e6;        ///< W, per-subcarrier bandwidth (Hz)
  double noise_psd = 1e-18;      ///< sigma^2 (A^2/Hz)
  double electrical_budget = inf;  ///< P (W)
  double optical_budget = inf;     ///< P_o (W)
  double circuit_power = 0.2;      ///< P_c (W)
  double rate_floor = 0.0;         ///< r (bits/s), EE problems only

  int data_subcarriers() const { return n / 2; }
};

inline void validate(const SystemParams& p) {
  if (p.n < 2 || p.n % 2 != 0)
    fail(errc::invalid_geometry, "subcarrier parameter N must be a positive even integer");
  if (!(p.bandwidth > 0.0) || !(p.noise_psd > 0.0))
    fail(errc::invalid_geometry, "bandwidth and noise PSD must be positive");
  if (!(p.electrical_budget > 0.0) || !(p.optical_budget > 0.0) || !(p.circuit_power > 0.0))
    fail(errc::invalid_geometry, "power budgets must be positive");
  if (!(p.rate_floor >= 0.0)) fail(errc::invalid_geometry, "rate floor must be nonnegative");
}

// The electrical budget is expected to exceed the square of the optical one;
// violations are legal inputs but usually indicate a misconfigured scenario.
inline std::string consistency_warning(const SystemParams& p) {
  if (std::isfinite(p.electrical_budget) && std::isfinite(p.optical_budget) &&
      p.electrical_budget <= p.optical_budget * p.optical_budget) {
    return "electrical budget P does not exceed P_o^2; check units";
  }
  return {};
}

/// Per-data-subcarrier transmit powers p_{2i-1}, i = 1..N/2. Even subcarriers
/// and the mirrored odd half are implicit (zero and symmetric respectively).
struct PowerAllocation {
  std::vector<double> powers;

  double total() const {
    double s = 0.0;
    for (double p : powers) s += p;
    return s;
  }
  int active_count() const {
    int c = 0;
    for (double p : powers)
      if (p > 0.0) ++c;
    return c;
  }
};

}  // namespace acoofdm
