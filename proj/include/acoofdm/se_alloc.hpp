#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "acoofdm/channel.hpp"
#include "acoofdm/error.hpp"
#include "acoofdm/rates.hpp"
#include "acoofdm/types.hpp"

namespace acoofdm {

/// Solver output. `objective` is the optimized metric: spectral efficiency
/// (bits/s/Hz) for the SE solvers, energy efficiency (bits/s/W) for the EE
/// solver. `dual` is the budget multiplier (mu or lambda) or the final ratio q.
struct AllocationResult {
  PowerAllocation alloc;
  double objective = 0.0;
  double dual = 0.0;
  int iterations = 0;
  double kkt_residual = 0.0;
  double budget_used = 0.0;
};

/// Electrical budget after folding in the optical constraint. The Gaussian
/// reformulation is exact; the finite-alphabet one is the safe approximation
/// through E{|X|}, shared by the lower-bound model.
inline double effective_budget(const SystemParams& sys, const RateModel& model) {
  double po = sys.optical_budget;
  if (!std::isfinite(po)) return sys.electrical_budget;
  double optical_cap;
  if (std::holds_alternative<GaussianModel>(model)) {
    optical_cap = sys.n * 3.141592653589793 * po * po;
  } else {
    double ma = std::visit(
        [](const auto& m) -> double {
          using T = std::decay_t<decltype(m)>;
          if constexpr (std::is_same_v<T, GaussianModel>)
            return 1.0;
          else
            return m.constellation.mean_abs();
        },
        model);
    optical_cap = 4.0 * po * po / (ma * ma);
  }
  return std::min(sys.electrical_budget, optical_cap);
}

namespace detail {

// 4 sigma^2 W / |H|^2 per data subcarrier; infinite for dead subcarriers,
// which every solver below treats as excluded.
inline std::vector<double> noise_floors(const ChannelState& ch, const SystemParams& sys) {
  std::vector<double> n(ch.gains.size());
  for (std::size_t i = 0; i < ch.gains.size(); ++i) {
    double g2 = std::norm(ch.gains[i]);
    n[i] = g2 > 0.0 ? 4.0 * sys.noise_psd * sys.bandwidth / g2 : inf;
  }
  return n;
}

// Water level theta with sum_i [theta - n_i]+ = budget, by the sorted-prefix
// closed form.
inline double water_level(const std::vector<double>& floors, double budget) {
  std::vector<double> f;
  f.reserve(floors.size());
  for (double n : floors)
    if (std::isfinite(n)) f.push_back(n);
  if (f.empty()) return 0.0;
  std::sort(f.begin(), f.end());
  double prefix = 0.0, theta = 0.0;
  for (std::size_t m = 0; m < f.size(); ++m) {
    prefix += f[m];
    double cand = (budget + prefix) / static_cast<double>(m + 1);
    if (cand > f[m]) theta = cand;
  }
  return theta;
}

// Euclidean projection onto {p >= 0, sum p <= budget}.
inline std::vector<double> project_budget_simplex(std::vector<double> v, double budget) {
  double pos_sum = 0.0;
  for (double& x : v) {
    if (x < 0.0) x = 0.0;
    pos_sum += x;
  }
  if (pos_sum <= budget) return v;
  std::vector<double> s = v;
  std::sort(s.begin(), s.end(), std::greater<double>());
  double cum = 0.0, tau = 0.0;
  for (std::size_t j = 0; j < s.size(); ++j) {
    cum += s[j];
    double cand = (cum - budget) / static_cast<double>(j + 1);
    if (cand < s[j]) tau = cand;
  }
  for (double& x : v) x = std::max(x - tau, 0.0);
  return v;
}

}  // namespace detail

/// Classical water-filling for Gaussian inputs; exact closed form.
inline AllocationResult waterfill(const ChannelState& ch, double budget, const SystemParams& sys) {
  if (!(budget > 0.0) || !std::isfinite(budget))
    fail(errc::infeasible, "water-filling needs a positive finite budget");
  auto floors = detail::noise_floors(ch, sys);
  double theta = detail::water_level(floors, budget);

  AllocationResult r;
  r.alloc.powers.assign(floors.size(), 0.0);
  double used = 0.0, spread = 0.0;
  for (std::size_t i = 0; i < floors.size(); ++i) {
    if (std::isfinite(floors[i]) && theta > floors[i]) {
      r.alloc.powers[i] = theta - floors[i];
      used += r.alloc.powers[i];
      spread = std::max(spread, std::abs(r.alloc.powers[i] + floors[i] - theta));
    }
  }
  r.budget_used = used;
  r.dual = theta > 0.0 ? 1.0 / (2.0 * sys.n * theta * std::log(2.0)) : 0.0;
  r.kkt_residual = spread;
  r.iterations = 0;
  r.objective = spectral_efficiency(r.alloc, ch, RateModel{GaussianModel{}}, sys);
  return r;
}

/// Mercury water-filling for finite-alphabet inputs: bisection on the dual
/// lambda with per-subcarrier MMSE inversion. An MmseTable pointer swaps the
/// exact inversion for the interpolated one.
inline AllocationResult mercury_waterfill(const ChannelState& ch, double budget,
                                          const Constellation& c, const SystemParams& sys,
                                          const QuadratureSpec& quad,
                                          const MmseTable* table = nullptr) {
  if (!(budget > 0.0)) fail(errc::infeasible, "mercury water-filling needs a positive budget");
  auto floors = detail::noise_floors(ch, sys);
  const double sat_mmse = 1e-6;  // treat the alphabet as resolved below this
  auto invert = [&](double target) {
    return table ? table->inverse(target) : mmse_inverse(target, c, quad);
  };
  auto forward = [&](double snr) { return table ? table->eval(snr) : mmse(snr, c, quad); };
  const double s_sat = invert(sat_mmse);

  auto demand = [&](double lam, std::vector<double>& p) {
    double tot = 0.0;
    for (std::size_t i = 0; i < floors.size(); ++i) {
      p[i] = 0.0;
      if (!std::isfinite(floors[i])) continue;
      double arg = lam * floors[i];  // lambda / (|H|^2 / 4 sigma^2 W)
      if (arg >= 1.0) continue;
      double snr = arg <= sat_mmse ? s_sat : invert(arg);
      p[i] = snr * floors[i];
      tot += p[i];
    }
    return tot;
  };

  AllocationResult r;
  r.alloc.powers.assign(floors.size(), 0.0);
  std::vector<double> p(floors.size(), 0.0);

  double sat_total = demand(0.0, p);
  if (sat_total <= budget) {
    // lambda -> 0 limit: every subcarrier parked at the resolution SNR.
    r.alloc.powers = p;
    r.budget_used = sat_total;
    r.dual = 0.0;
    r.iterations = 0;
    r.kkt_residual = 0.0;
  } else {
    double lam_hat = 0.0;
    for (double n : floors)
      if (std::isfinite(n)) lam_hat = std::max(lam_hat, 1.0 / n);
    if (!(lam_hat > 0.0)) fail(errc::bisection_failure, "no usable subcarrier to bracket lambda");
    double lo = 0.0, hi = lam_hat;
    int iters = 0;
    while (hi - lo > 1e-9 * lam_hat) {
      double mid = 0.5 * (lo + hi);
      double tot = demand(mid, p);
      if (tot > budget) {
        lo = mid;
      } else {
        hi = mid;
        if (budget - tot <= 1e-8 * budget) break;  // feasible side, close enough
      }
      if (++iters > 200) fail(errc::bisection_failure, "lambda bisection did not terminate");
    }
    double used = demand(hi, p);
    r.alloc.powers = p;
    r.budget_used = used;
    r.dual = hi;
    r.iterations = iters;
    double res = 0.0;
    for (std::size_t i = 0; i < floors.size(); ++i) {
      if (r.alloc.powers[i] <= 0.0) continue;
      double snr = r.alloc.powers[i] / floors[i];
      if (snr >= s_sat * (1.0 - 1e-9)) continue;  // capped at resolution, not on the level
      res = std::max(res, std::abs(forward(snr) / floors[i] - hi));
    }
    r.kkt_residual = res;
  }
  r.objective = spectral_efficiency(r.alloc, ch, RateModel{FiniteAlphabetModel{c, quad}}, sys);
  return r;
}

/// Lower-bound SE maximization: projected gradient ascent with Barzilai-Borwein
/// steps and backtracking on the budget simplex. The objective is smooth and
/// concave, so the multiplier can be read off the active coordinates at the end.
inline AllocationResult lower_bound_se_opt(const ChannelState& ch, double budget,
                                           const Constellation& c, const SystemParams& sys) {
  if (!(budget > 0.0) || !std::isfinite(budget))
    fail(errc::infeasible, "lower-bound solver needs a positive finite budget");
  auto floors = detail::noise_floors(ch, sys);
  const std::size_t m = floors.size();

  auto value = [&](const std::vector<double>& p) {
    double v = 0.0;
    for (std::size_t i = 0; i < m; ++i)
      v += std::isfinite(floors[i]) ? lower_bound_norm(p[i] / floors[i], c)
                                    : lower_bound_norm(0.0, c);
    return v;
  };
  auto gradient = [&](const std::vector<double>& p, std::vector<double>& g) {
    for (std::size_t i = 0; i < m; ++i)
      g[i] = std::isfinite(floors[i])
                 ? lower_bound_norm_deriv(p[i] / floors[i], c) / floors[i]
                 : 0.0;
  };

  std::vector<double> x(m, 0.0);
  std::size_t usable = 0;
  for (std::size_t i = 0; i < m; ++i)
    if (std::isfinite(floors[i])) ++usable;
  if (usable == 0) {
    AllocationResult r;
    r.alloc.powers = x;
    r.objective = value(x) / (2.0 * sys.n);
    return r;
  }
  for (std::size_t i = 0; i < m; ++i)
    if (std::isfinite(floors[i])) x[i] = budget / static_cast<double>(usable);

  std::vector<double> g(m), g_new(m), x_new(m);
  gradient(x, g);
  double fx = value(x);
  double step = budget / (usable * std::max(1e-300, *std::max_element(g.begin(), g.end())));
  int it = 0;
  const int max_iter = 20000;
  for (; it < max_iter; ++it) {
    for (std::size_t i = 0; i < m; ++i) x_new[i] = x[i] + step * g[i];
    x_new = detail::project_budget_simplex(std::move(x_new), budget);
    double decr = 0.0, move = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      double d = x_new[i] - x[i];
      decr += g[i] * d;
      move += d * d;
    }
    double f_new = value(x_new);
    int bt = 0;
    while (f_new < fx + 1e-4 * decr && bt < 60) {
      step *= 0.5;
      for (std::size_t i = 0; i < m; ++i) x_new[i] = x[i] + step * g[i];
      x_new = detail::project_budget_simplex(std::move(x_new), budget);
      decr = move = 0.0;
      for (std::size_t i = 0; i < m; ++i) {
        double d = x_new[i] - x[i];
        decr += g[i] * d;
        move += d * d;
      }
      f_new = value(x_new);
      ++bt;
    }
    if (move <= 1e-30 * budget * budget) {
      x = x_new;
      fx = f_new;
      break;
    }
    gradient(x_new, g_new);
    double sy = 0.0;
    for (std::size_t i = 0; i < m; ++i) sy += (x_new[i] - x[i]) * (g[i] - g_new[i]);
    step = sy > 0.0 ? move / sy : step * 2.0;
    step = std::clamp(step, 1e-12 * budget, 1e6 * budget);
    x.swap(x_new);
    g.swap(g_new);
    fx = f_new;
  }

  gradient(x, g);
  double mu = 0.0;
  int active = 0;
  for (std::size_t i = 0; i < m; ++i)
    if (x[i] > 1e-14 * budget) {
      mu += g[i];
      ++active;
    }
  mu = active > 0 ? mu / active : 0.0;
  double res = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    if (!std::isfinite(floors[i])) continue;
    if (x[i] > 1e-14 * budget)
      res = std::max(res, std::abs(g[i] - mu));
    else
      res = std::max(res, std::max(g[i] - mu, 0.0));
  }
  double rel_res = res / std::max(mu, 1e-300);
  if (it >= max_iter && rel_res > 1e-5)
    fail(errc::solver_failure, "projected gradient did not reach stationarity");

  AllocationResult r;
  r.alloc.powers = x;
  r.budget_used = std::accumulate(x.begin(), x.end(), 0.0);
  r.dual = mu / (2.0 * sys.n);  // multiplier of the SE objective
  r.iterations = it;
  r.kkt_residual = rel_res;
  r.objective = spectral_efficiency(r.alloc, ch, RateModel{LowerBoundModel{c}}, sys);
  return r;
}

/// Dispatch on the rate model with the model-appropriate effective budget.
inline AllocationResult se_maximize(const ChannelState& ch, const SystemParams& sys,
                                    const RateModel& model, const MmseTable* table = nullptr) {
  validate(sys);
  double budget = effective_budget(sys, model);
  return std::visit(
      [&](const auto& m) -> AllocationResult {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, GaussianModel>)
          return waterfill(ch, budget, sys);
        else if constexpr (std::is_same_v<T, FiniteAlphabetModel>)
          return mercury_waterfill(ch, budget, m.constellation, sys, m.quad, table);
        else
          return lower_bound_se_opt(ch, budget, m.constellation, sys);
      },
      model);
}

}  // namespace acoofdm
