#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <fstream>
#include <numbers>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "acoofdm/constellation.hpp"
#include "acoofdm/error.hpp"
#include "acoofdm/rng.hpp"
#include "acoofdm/types.hpp"

namespace acoofdm {

/// One ACO-OFDM frame of length 2N: Hermitian-arranged frequency symbols
/// (power already folded in), real time samples, and the zero-clipped signal.
struct OfdmFrame {
  std::vector<cplx> freq_symbols;
  std::vector<double> time_samples;
  std::vector<double> clipped;
};

/// Reference synthesis via the full complex inverse DFT,
/// x_k = (1/sqrt(2N)) sum_l X_l exp(j pi k l / N), followed by zero clipping.
/// `symbols` hold the N/2 odd-subcarrier inputs; `powers` their allocation.
inline OfdmFrame synthesize(const std::vector<cplx>& symbols, const PowerAllocation& powers,
                            int n) {
  if (n < 2 || n % 2 != 0) fail(errc::dimension_mismatch, "frame size N must be even and >= 2");
  const std::size_t half = static_cast<std::size_t>(n) / 2;
  if (symbols.size() != half || powers.powers.size() != half)
    fail(errc::dimension_mismatch, "need N/2 symbols and N/2 powers");

  OfdmFrame f;
  const std::size_t len = 2 * static_cast<std::size_t>(n);
  f.freq_symbols.assign(len, cplx{0.0, 0.0});
  for (std::size_t i = 1; i <= half; ++i) {
    cplx s = std::sqrt(powers.powers[i - 1]) * symbols[i - 1];
    f.freq_symbols[2 * i - 1] = s;
    f.freq_symbols[len - (2 * i - 1)] = std::conj(s);
  }

  f.time_samples.resize(len);
  f.clipped.resize(len);
  const double norm = 1.0 / std::sqrt(static_cast<double>(len));
  for (std::size_t k = 0; k < len; ++k) {
    cplx acc{0.0, 0.0};
    for (std::size_t l = 0; l < len; ++l) {
      if (f.freq_symbols[l] == cplx{0.0, 0.0}) continue;
      double ang = std::numbers::pi * static_cast<double>(k) * static_cast<double>(l) /
                   static_cast<double>(n);
      acc += f.freq_symbols[l] * cplx{std::cos(ang), std::sin(ang)};
    }
    f.time_samples[k] = norm * acc.real();
    f.clipped[k] = std::max(f.time_samples[k], 0.0);
  }
  return f;
}

/// Zero clipping, x̂_k = max(x_k, 0). Idempotent.
inline OfdmFrame clip(OfdmFrame frame) {
  frame.clipped.resize(frame.time_samples.size());
  for (std::size_t k = 0; k < frame.time_samples.size(); ++k)
    frame.clipped[k] = std::max(frame.time_samples[k], 0.0);
  return frame;
}

/// Sample mean of the clipped signal over a frame batch.
inline double empirical_optical_power(const std::vector<OfdmFrame>& frames) {
  std::size_t count = 0;
  double sum = 0.0;
  for (const auto& f : frames) {
    count += f.clipped.size();
    for (double x : f.clipped) sum += x;
  }
  if (count < 10000) fail(errc::too_few_samples, "need at least 1e4 clipped samples");
  return sum / static_cast<double>(count);
}

/// Forward DFT of the clipped signal restricted to odd subcarriers, compared
/// against half the transmitted symbols. Returns the largest deviation
/// relative to the largest half-symbol magnitude (0 for an all-zero frame).
inline double half_amplitude_check(const OfdmFrame& frame) {
  const std::size_t len = frame.clipped.size();
  if (len == 0 || frame.freq_symbols.size() != len)
    fail(errc::dimension_mismatch, "malformed frame");
  const std::size_t n = len / 2;
  const double norm = 1.0 / std::sqrt(static_cast<double>(len));
  double scale = 0.0;
  for (std::size_t l = 1; l < len; l += 2) scale = std::max(scale, 0.5 * std::abs(frame.freq_symbols[l]));
  if (scale == 0.0) return 0.0;
  double worst = 0.0;
  for (std::size_t l = 1; l < len; l += 2) {
    cplx acc{0.0, 0.0};
    for (std::size_t k = 0; k < len; ++k) {
      double ang = std::numbers::pi * static_cast<double>(k) * static_cast<double>(l) /
                   static_cast<double>(n);
      acc += frame.clipped[k] * cplx{std::cos(ang), -std::sin(ang)};
    }
    worst = std::max(worst, std::abs(norm * acc - 0.5 * frame.freq_symbols[l]) / scale);
  }
  return worst;
}

/// Worst antisymmetry violation |x_l + x_{l+N}| relative to the frame peak.
inline double antisymmetry_check(const OfdmFrame& frame) {
  const std::size_t len = frame.time_samples.size();
  const std::size_t n = len / 2;
  double peak = 0.0;
  for (double x : frame.time_samples) peak = std::max(peak, std::abs(x));
  if (peak == 0.0) return 0.0;
  double worst = 0.0;
  for (std::size_t l = 0; l < n; ++l)
    worst = std::max(worst, std::abs(frame.time_samples[l] + frame.time_samples[l + n]) / peak);
  return worst;
}

/// Fast synthesizer with precomputed trig tables, using the real form
/// x_k = sqrt(2/N) sum_i sqrt(p_i) Re{X_i exp(j pi k (2i-1)/N)}.
class FrameSynthesizer {
 public:
  explicit FrameSynthesizer(int n) : n_(n) {
    if (n < 2 || n % 2 != 0) fail(errc::dimension_mismatch, "frame size N must be even and >= 2");
    const std::size_t half = static_cast<std::size_t>(n) / 2;
    const std::size_t len = 2 * static_cast<std::size_t>(n);
    cos_.resize(half * len);
    sin_.resize(half * len);
    for (std::size_t i = 0; i < half; ++i) {
      double base = std::numbers::pi * static_cast<double>(2 * i + 1) / static_cast<double>(n);
      for (std::size_t k = 0; k < len; ++k) {
        cos_[i * len + k] = std::cos(base * static_cast<double>(k));
        sin_[i * len + k] = std::sin(base * static_cast<double>(k));
      }
    }
  }

  int size() const { return n_; }

  OfdmFrame frame(const std::vector<cplx>& symbols, const PowerAllocation& powers) const {
    const std::size_t half = static_cast<std::size_t>(n_) / 2;
    const std::size_t len = 2 * static_cast<std::size_t>(n_);
    if (symbols.size() != half || powers.powers.size() != half)
      fail(errc::dimension_mismatch, "need N/2 symbols and N/2 powers");
    OfdmFrame f;
    f.freq_symbols.assign(len, cplx{0.0, 0.0});
    f.time_samples.assign(len, 0.0);
    f.clipped.resize(len);
    const double amp = std::sqrt(2.0 / static_cast<double>(n_));
    for (std::size_t i = 0; i < half; ++i) {
      double w = std::sqrt(powers.powers[i]);
      cplx s = w * symbols[i];
      f.freq_symbols[2 * i + 1] = s;
      f.freq_symbols[len - (2 * i + 1)] = std::conj(s);
      if (s == cplx{0.0, 0.0}) continue;
      double a = s.real(), b = s.imag();
      const double* c = cos_.data() + i * len;
      const double* sn = sin_.data() + i * len;
      for (std::size_t k = 0; k < len; ++k) f.time_samples[k] += a * c[k] - b * sn[k];
    }
    for (std::size_t k = 0; k < len; ++k) {
      f.time_samples[k] *= amp;
      f.clipped[k] = std::max(f.time_samples[k], 0.0);
    }
    return f;
  }

 private:
  int n_;
  std::vector<double> cos_;
  std::vector<double> sin_;
};

/// Monte Carlo summary of the signal-model identities over a frame batch.
struct WaveformReport {
  std::size_t frames = 0;
  double max_antisymmetry = 0.0;    ///< antisymmetry residual, relative
  double max_half_amplitude = 0.0;  ///< receiver-side 1/2-amplitude residual
  double mean_optical = 0.0;        ///< sample mean of the clipped signal
  double predicted_optical = 0.0;   ///< clipped-Gaussian mean sqrt(sum p / (2 pi N))
  double optical_bound = 0.0;       ///< (1/sqrt(2N)) sum sqrt(p) E{|X|}
  double electrical_ratio = 0.0;    ///< sum E{x̂²} / sum E{x²}, ideally 1/2
  double parseval_ratio = 0.0;      ///< sum E{x²} / (2 sum p), ideally 1
};

/// Runs `frame_count` random frames (constellation symbols when given,
/// otherwise circular Gaussian) and collects the report. The expensive
/// half-amplitude DFT runs on every `check_stride`-th frame.
inline WaveformReport waveform_report(int n, const PowerAllocation& powers,
                                      const std::optional<Constellation>& constellation,
                                      std::size_t frame_count, std::uint64_t seed,
                                      std::size_t check_stride = 1000) {
  FrameSynthesizer synth(n);
  const std::size_t half = static_cast<std::size_t>(n) / 2;
  if (powers.powers.size() != half) fail(errc::dimension_mismatch, "need N/2 powers");
  if (frame_count * 2 * static_cast<std::size_t>(n) < 10000)
    fail(errc::too_few_samples, "need at least 1e4 clipped samples");

  std::mt19937_64 gen(derive_seed(seed, 0xacull));
  auto uniform = [&] { return (gen() >> 11) * 0x1.0p-53; };
  double spare = 0.0;
  bool have_spare = false;
  auto normal = [&] {
    if (have_spare) {
      have_spare = false;
      return spare;
    }
    double u1 = 0.0;
    while (u1 == 0.0) u1 = uniform();
    double r = std::sqrt(-2.0 * std::log(u1));
    double t = 2.0 * std::numbers::pi * uniform();
    spare = r * std::sin(t);
    have_spare = true;
    return r * std::cos(t);
  };

  std::vector<cplx> symbols(half);
  double sum_clip = 0.0, sum_clip_sq = 0.0, sum_sq = 0.0;
  std::size_t samples = 0;
  WaveformReport rep;
  rep.frames = frame_count;
  for (std::size_t f = 0; f < frame_count; ++f) {
    for (std::size_t i = 0; i < half; ++i) {
      if (constellation) {
        std::size_t idx = std::min<std::size_t>(
            static_cast<std::size_t>(uniform() * constellation->points().size()),
            constellation->points().size() - 1);
        symbols[i] = constellation->points()[idx];
      } else {
        symbols[i] = cplx{normal(), normal()} * std::sqrt(0.5);
      }
    }
    OfdmFrame fr = synth.frame(symbols, powers);
    rep.max_antisymmetry = std::max(rep.max_antisymmetry, antisymmetry_check(fr));
    if (f % check_stride == 0)
      rep.max_half_amplitude = std::max(rep.max_half_amplitude, half_amplitude_check(fr));
    for (std::size_t k = 0; k < fr.time_samples.size(); ++k) {
      sum_sq += fr.time_samples[k] * fr.time_samples[k];
      sum_clip += fr.clipped[k];
      sum_clip_sq += fr.clipped[k] * fr.clipped[k];
    }
    samples += fr.time_samples.size();
  }

  double total_power = powers.total();
  rep.mean_optical = sum_clip / static_cast<double>(samples);
  // Under the unitary 1/sqrt(2N) DFT and unit-power symbols, each sample has
  // variance sum p / N, so the clipped mean is sqrt(sum p / (2 pi N)).
  rep.predicted_optical =
      std::sqrt(total_power / (2.0 * std::numbers::pi * static_cast<double>(n)));
  double mean_abs_x = constellation ? constellation->mean_abs() : 0.5 * std::sqrt(std::numbers::pi);
  double amp_sum = 0.0;
  for (double p : powers.powers) amp_sum += std::sqrt(p);
  rep.optical_bound = mean_abs_x * amp_sum / std::sqrt(2.0 * static_cast<double>(n));
  rep.electrical_ratio = sum_sq > 0.0 ? sum_clip_sq / sum_sq : 0.0;
  double frame_mean_sq = sum_sq / static_cast<double>(frame_count);
  // Parseval over the 2N Hermitian slots: sum E{x^2} = 2 sum p.
  rep.parseval_ratio = total_power > 0.0 ? frame_mean_sq / (2.0 * total_power) : 0.0;
  return rep;
}

/// Columnar text dump (index, x, x̂) for inspection.
inline void dump_frame(const OfdmFrame& frame, const std::string& path) {
  std::ofstream out(path);
  if (!out) fail(errc::io_error, "cannot open " + path);
  out << "index\tx\tx_clipped\n";
  for (std::size_t k = 0; k < frame.time_samples.size(); ++k)
    out << k << '\t' << frame.time_samples[k] << '\t' << frame.clipped[k] << '\n';
  if (!out) fail(errc::io_error, "write failed for " + path);
}

}  // namespace acoofdm
