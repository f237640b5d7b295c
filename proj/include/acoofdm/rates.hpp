#pragma once

#include <algorithm>
#include <cmath>
#include <variant>
#include <vector>

#include "acoofdm/constellation.hpp"
#include "acoofdm/error.hpp"
#include "acoofdm/quadrature.hpp"
#include "acoofdm/types.hpp"

namespace acoofdm {

// All dimensionless SNR arguments below follow one convention:
//   snr = p |H|^2 / (4 sigma^2 W)
// i.e. the post-clipping per-subcarrier SNR including the 1/2 receive
// amplitude factor. Helpers taking (p, H, params) convert through this.
inline double effective_snr(double p, cplx h, const SystemParams& sys) {
  return p * std::norm(h) / (4.0 * sys.noise_psd * sys.bandwidth);
}

inline double gaussian_rate(double p, cplx h, const SystemParams& sys) {
  return sys.bandwidth * std::log2(1.0 + effective_snr(p, h, sys));
}

namespace detail {

// Mutual information of Y = sqrt(s) X + Z in bits per channel use, with X
// uniform on a unit-power alphabet and Z unit-variance complex Gaussian.
// Product alphabets factor into two PAM subchannels with per-dimension noise
// variance 1/2, which turns the expectation into a 1-D integral.
inline double mi_pam(double s, const std::vector<double>& lv, const std::vector<NoiseNode1>& nodes) {
  const int L = static_cast<int>(lv.size());
  const double rs = std::sqrt(s);
  std::vector<double> d(L);
  double acc = 0.0;
  for (int n = 0; n < L; ++n) {
    for (const NoiseNode1& nd : nodes) {
      double dmin = inf;
      for (int k = 0; k < L; ++k) {
        double t = rs * (lv[n] - lv[k]) + nd.z;
        d[k] = t * t;
        dmin = std::min(dmin, d[k]);
      }
      double sum = 0.0;
      for (int k = 0; k < L; ++k) sum += std::exp(dmin - d[k]);
      acc += nd.w * (std::log(sum) - dmin);
    }
  }
  double nats = std::log(static_cast<double>(L)) - 0.5 - acc / L;
  if (!std::isfinite(nats)) fail(errc::quadrature_failure, "non-finite mutual information sum");
  return nats;
}

inline double mi_complex(double s, const std::vector<cplx>& pts, const std::vector<NoiseNode2>& nodes) {
  const int M = static_cast<int>(pts.size());
  const double rs = std::sqrt(s);
  std::vector<double> d(M);
  double acc = 0.0;
  for (int n = 0; n < M; ++n) {
    for (const NoiseNode2& nd : nodes) {
      double dmin = inf;
      for (int k = 0; k < M; ++k) {
        cplx diff = rs * (pts[n] - pts[k]);
        double re = diff.real() + nd.re;
        double im = diff.imag() + nd.im;
        d[k] = re * re + im * im;
        dmin = std::min(dmin, d[k]);
      }
      double sum = 0.0;
      for (int k = 0; k < M; ++k) sum += std::exp(dmin - d[k]);
      acc += nd.w * (std::log(sum) - dmin);
    }
  }
  double nats = std::log(static_cast<double>(M)) - 1.0 - acc / M;
  if (!std::isfinite(nats)) fail(errc::quadrature_failure, "non-finite mutual information sum");
  return nats;
}

inline double mmse_pam(double s, const std::vector<double>& lv, const std::vector<NoiseNode1>& nodes) {
  const int L = static_cast<int>(lv.size());
  const double rs = std::sqrt(s);
  std::vector<double> d(L);
  double acc = 0.0;
  for (int n = 0; n < L; ++n) {
    for (const NoiseNode1& nd : nodes) {
      double dmin = inf;
      for (int k = 0; k < L; ++k) {
        double t = rs * (lv[n] - lv[k]) + nd.z;
        d[k] = t * t;
        dmin = std::min(dmin, d[k]);
      }
      double den = 0.0, num = 0.0;
      for (int k = 0; k < L; ++k) {
        double e = std::exp(dmin - d[k]);
        den += e;
        num += e * lv[k];
      }
      double err = lv[n] - num / den;
      acc += nd.w * err * err;
    }
  }
  double v = acc / L;
  if (!std::isfinite(v)) fail(errc::quadrature_failure, "non-finite MMSE sum");
  return v;
}

inline double mmse_complex(double s, const std::vector<cplx>& pts, const std::vector<NoiseNode2>& nodes) {
  const int M = static_cast<int>(pts.size());
  const double rs = std::sqrt(s);
  std::vector<double> d(M);
  double acc = 0.0;
  for (int n = 0; n < M; ++n) {
    for (const NoiseNode2& nd : nodes) {
      double dmin = inf;
      for (int k = 0; k < M; ++k) {
        cplx diff = rs * (pts[n] - pts[k]);
        double re = diff.real() + nd.re;
        double im = diff.imag() + nd.im;
        d[k] = re * re + im * im;
        dmin = std::min(dmin, d[k]);
      }
      double den = 0.0;
      cplx num = 0.0;
      for (int k = 0; k < M; ++k) {
        double e = std::exp(dmin - d[k]);
        den += e;
        num += e * pts[k];
      }
      acc += nd.w * std::norm(pts[n] - num / den);
    }
  }
  double v = acc / M;
  if (!std::isfinite(v)) fail(errc::quadrature_failure, "non-finite MMSE sum");
  return v;
}

}  // namespace detail

/// Mutual information in bits per channel use at the given effective SNR.
inline double mi_norm(double snr, const Constellation& c, const QuadratureSpec& q) {
  if (!(snr >= 0.0)) fail(errc::out_of_domain, "snr must be nonnegative");
  if (c.separable()) {
    auto nodes = noise_nodes_1d(q);
    return 2.0 * detail::mi_pam(snr, c.pam_levels(), nodes) / std::log(2.0);
  }
  auto nodes = noise_nodes_2d(q);
  return detail::mi_complex(snr, c.points(), nodes) / std::log(2.0);
}

/// MMSE of estimating X from sqrt(snr) X + Z; 1 at snr = 0, decreasing to 0.
inline double mmse(double snr, const Constellation& c, const QuadratureSpec& q) {
  if (!(snr >= 0.0)) fail(errc::out_of_domain, "snr must be nonnegative");
  if (c.separable()) {
    auto nodes = noise_nodes_1d(q);
    return 2.0 * detail::mmse_pam(snr, c.pam_levels(), nodes);
  }
  auto nodes = noise_nodes_2d(q);
  return detail::mmse_complex(snr, c.points(), nodes);
}

/// Unique snr with mmse(snr) = target, by bracket doubling plus bisection on
/// the strictly decreasing MMSE curve.
inline double mmse_inverse(double target, const Constellation& c, const QuadratureSpec& q) {
  if (!(target > 0.0) || target > 1.0) fail(errc::out_of_domain, "MMSE target must lie in (0, 1]");
  if (target == 1.0) return 0.0;
  double lo = 0.0, hi = 1.0;
  int guard = 0;
  while (mmse(hi, c, q) > target) {
    lo = hi;
    hi *= 2.0;
    if (++guard > 1100) fail(errc::bisection_failure, "could not bracket MMSE target");
  }
  for (int iter = 0; iter < 400 && (hi - lo) > 1e-12 * std::max(1.0, hi); ++iter) {
    double mid = 0.5 * (lo + hi);
    (mmse(mid, c, q) > target ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

/// Closed-form achievable-rate lower bound in bits per channel use. Negative
/// near zero SNR by construction; reported raw.
inline double lower_bound_norm(double snr, const Constellation& c) {
  if (!(snr >= 0.0)) fail(errc::out_of_domain, "snr must be nonnegative");
  const auto& pts = c.points();
  const int M = static_cast<int>(pts.size());
  const double l2 = std::log(2.0);
  double acc = 0.0;
  for (int n = 0; n < M; ++n) {
    double sum = 0.0;
    for (int k = 0; k < M; ++k) sum += std::exp(-0.5 * snr * std::norm(pts[n] - pts[k]));
    acc += std::log(sum);
  }
  return std::log2(static_cast<double>(M)) + 1.0 - 1.0 / l2 - acc / (M * l2);
}

/// Derivative of lower_bound_norm with respect to snr (bits per unit snr).
inline double lower_bound_norm_deriv(double snr, const Constellation& c) {
  const auto& pts = c.points();
  const int M = static_cast<int>(pts.size());
  double acc = 0.0;
  for (int n = 0; n < M; ++n) {
    double den = 0.0, num = 0.0;
    for (int k = 0; k < M; ++k) {
      double a = 0.5 * std::norm(pts[n] - pts[k]);
      double e = std::exp(-snr * a);
      den += e;
      num += a * e;
    }
    acc += num / den;
  }
  return acc / (M * std::log(2.0));
}

/// Monotone cubic (Fritsch-Carlson) interpolant of the MMSE curve on a log
/// grid. Optional accelerator for solvers that invert the MMSE many times;
/// read-only and freely shareable once built.
class MmseTable {
 public:
  MmseTable(const Constellation& c, const QuadratureSpec& q, int grid_size = 1025)
      : MmseTable(c, q, grid_size, 1e-3, find_tail(c, q)) {}

  MmseTable(const Constellation& c, const QuadratureSpec& q, int grid_size, double s_lo, double s_hi) {
    if (grid_size < 8) fail(errc::out_of_domain, "MMSE table grid too small");
    u_.reserve(grid_size + 1);
    v_.reserve(grid_size + 1);
    u_.push_back(0.0);
    v_.push_back(std::log(mmse(0.0, c, q)));
    const double ratio = std::log(s_hi / s_lo) / (grid_size - 1);
    for (int j = 0; j < grid_size; ++j) {
      double s = s_lo * std::exp(ratio * j);
      u_.push_back(std::log1p(s));
      v_.push_back(std::log(mmse(s, c, q)));
    }
    build_slopes();
  }

  double eval(double snr) const {
    if (snr <= 0.0) return std::exp(v_.front());
    double u = std::log1p(snr);
    if (u >= u_.back()) {  // exponential tail, linear in (u, log mmse)
      double m = slope_.back();
      return std::exp(v_.back() + m * (u - u_.back()));
    }
    std::size_t j = std::upper_bound(u_.begin(), u_.end(), u) - u_.begin() - 1;
    double h = u_[j + 1] - u_[j];
    double t = (u - u_[j]) / h;
    double h00 = (1 + 2 * t) * (1 - t) * (1 - t);
    double h10 = t * (1 - t) * (1 - t);
    double h01 = t * t * (3 - 2 * t);
    double h11 = t * t * (t - 1);
    return std::exp(h00 * v_[j] + h10 * h * d_[j] + h01 * v_[j + 1] + h11 * h * d_[j + 1]);
  }

  double inverse(double target) const {
    if (!(target > 0.0) || target > 1.0) fail(errc::out_of_domain, "MMSE target must lie in (0, 1]");
    if (target >= eval(0.0)) return 0.0;
    double lo = 0.0, hi = std::expm1(u_.back());
    while (eval(hi) > target) hi *= 2.0;
    for (int iter = 0; iter < 200 && (hi - lo) > 1e-12 * std::max(1.0, hi); ++iter) {
      double mid = 0.5 * (lo + hi);
      (eval(mid) > target ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
  }

 private:
  static double find_tail(const Constellation& c, const QuadratureSpec& q) {
    double s = 1.0;
    while (mmse(s, c, q) > 1e-9 && s < 1e9) s *= 2.0;
    return s;
  }

  void build_slopes() {
    const std::size_t n = u_.size();
    std::vector<double> delta(n - 1);
    for (std::size_t j = 0; j + 1 < n; ++j) delta[j] = (v_[j + 1] - v_[j]) / (u_[j + 1] - u_[j]);
    d_.assign(n, 0.0);
    d_[0] = delta[0];
    d_[n - 1] = delta[n - 2];
    for (std::size_t j = 1; j + 1 < n; ++j) {
      if (delta[j - 1] * delta[j] <= 0.0) {
        d_[j] = 0.0;
      } else {
        double h0 = u_[j] - u_[j - 1], h1 = u_[j + 1] - u_[j];
        double w1 = 2 * h1 + h0, w2 = h1 + 2 * h0;
        d_[j] = (w1 + w2) / (w1 / delta[j - 1] + w2 / delta[j]);
      }
    }
    slope_ = d_;
  }

  std::vector<double> u_, v_, d_, slope_;
};

struct GaussianModel {};

struct FiniteAlphabetModel {
  Constellation constellation;
  QuadratureSpec quad;
};

struct LowerBoundModel {
  Constellation constellation;
};

using RateModel = std::variant<GaussianModel, FiniteAlphabetModel, LowerBoundModel>;

inline const char* model_name(const RateModel& m) {
  if (std::holds_alternative<GaussianModel>(m)) return "gaussian";
  if (std::holds_alternative<FiniteAlphabetModel>(m)) return "finite";
  return "lower";
}

/// Achievable rate of one subcarrier in bits/s under the given model.
inline double fa_mutual_info(double p, cplx h, const Constellation& c, const SystemParams& sys,
                             const QuadratureSpec& q) {
  if (!(p >= 0.0)) fail(errc::out_of_domain, "power must be nonnegative");
  return sys.bandwidth * mi_norm(effective_snr(p, h, sys), c, q);
}

inline double rate_lower_bound(double p, cplx h, const Constellation& c, const SystemParams& sys) {
  if (!(p >= 0.0)) fail(errc::out_of_domain, "power must be nonnegative");
  return sys.bandwidth * lower_bound_norm(effective_snr(p, h, sys), c);
}

inline double subcarrier_rate(double p, cplx h, const RateModel& model, const SystemParams& sys) {
  return std::visit(
      [&](const auto& m) -> double {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, GaussianModel>)
          return gaussian_rate(p, h, sys);
        else if constexpr (std::is_same_v<T, FiniteAlphabetModel>)
          return fa_mutual_info(p, h, m.constellation, sys, m.quad);
        else
          return rate_lower_bound(p, h, m.constellation, sys);
      },
      model);
}

template <class ChannelLike>
inline double total_rate(const PowerAllocation& alloc, const ChannelLike& ch, const RateModel& model,
                         const SystemParams& sys) {
  if (alloc.powers.size() != ch.gains.size())
    fail(errc::dimension_mismatch, "allocation and channel sizes differ");
  double sum = 0.0;
  for (std::size_t i = 0; i < alloc.powers.size(); ++i)
    sum += subcarrier_rate(alloc.powers[i], ch.gains[i], model, sys);
  return sum;
}

template <class ChannelLike>
inline double spectral_efficiency(const PowerAllocation& alloc, const ChannelLike& ch,
                                  const RateModel& model, const SystemParams& sys) {
  return total_rate(alloc, ch, model, sys) / (2.0 * sys.n * sys.bandwidth);
}

template <class ChannelLike>
inline double energy_efficiency(const PowerAllocation& alloc, const ChannelLike& ch,
                                const RateModel& model, const SystemParams& sys) {
  return total_rate(alloc, ch, model, sys) / (2.0 * alloc.total() + sys.circuit_power);
}

}  // namespace acoofdm
