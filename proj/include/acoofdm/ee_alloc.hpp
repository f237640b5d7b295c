#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "acoofdm/error.hpp"
#include "acoofdm/rates.hpp"
#include "acoofdm/se_alloc.hpp"
#include "acoofdm/types.hpp"

namespace acoofdm {

/// One Dinkelbach iterate: ratio guess, iteration index, and the value of the
/// parametric objective R(p) - q (2 sum p + P_c) at the subproblem solution.
struct DinkelbachState {
  double q = 0.0;
  int iteration = 0;
  double f_value = 0.0;
};

/// Budget simplex intersected with the rate superlevel set {total_rate >= r}.
struct FeasibleSet {
  double budget = inf;
  double rate_floor = 0.0;
  RateModel model;
};

namespace detail {

// Per-subcarrier marginal rate curves R_i'(p) are positive and decreasing, so
// every subproblem optimum lies on the one-parameter path p(c) defined by
// R_i'(p_i) = c on active subcarriers. Budget and rate-floor levels c_B, c_r
// bracket the feasible stretch of that path.
class MarginalPath {
 public:
  MarginalPath(const ChannelState& ch, const SystemParams& sys, const RateModel& model,
               const MmseTable* table)
      : ch_(ch), sys_(sys), model_(model), table_(table), floors_(noise_floors(ch, sys)) {
    const double l2 = std::log(2.0);
    if (const auto* fa = std::get_if<FiniteAlphabetModel>(&model_)) {
      s_sat_ = table_ ? table_->inverse(sat_mmse_) : mmse_inverse(sat_mmse_, fa->constellation, fa->quad);
    } else if (const auto* lb = std::get_if<LowerBoundModel>(&model_)) {
      deriv0_ = lower_bound_norm_deriv(0.0, lb->constellation);
    }
    for (double n : floors_) {
      if (!std::isfinite(n)) continue;
      double c0;
      if (std::holds_alternative<GaussianModel>(model_))
        c0 = sys_.bandwidth / (l2 * n);
      else if (std::holds_alternative<FiniteAlphabetModel>(model_))
        c0 = sys_.bandwidth / (l2 * n);  // mmse(0) = 1
      else
        c0 = sys_.bandwidth * deriv0_ / n;
      c_hat_ = std::max(c_hat_, c0);
    }
  }

  bool usable() const { return c_hat_ > 0.0; }
  double level_cap() const { return c_hat_; }

  std::vector<double> alloc(double c) const {
    std::vector<double> p(floors_.size(), 0.0);
    const double l2 = std::log(2.0);
    for (std::size_t i = 0; i < floors_.size(); ++i) {
      double n = floors_[i];
      if (!std::isfinite(n)) continue;
      if (std::holds_alternative<GaussianModel>(model_)) {
        p[i] = std::max(sys_.bandwidth / (c * l2) - n, 0.0);
      } else if (const auto* fa = std::get_if<FiniteAlphabetModel>(&model_)) {
        double arg = c <= 0.0 ? 0.0 : c * l2 * n / sys_.bandwidth;
        if (arg >= 1.0) continue;
        double snr = arg <= sat_mmse_
                         ? s_sat_
                         : (table_ ? table_->inverse(arg) : mmse_inverse(arg, fa->constellation, fa->quad));
        p[i] = snr * n;
      } else {
        const auto& lb = std::get<LowerBoundModel>(model_);
        double target = c * n / sys_.bandwidth;
        if (target >= deriv0_) continue;
        p[i] = deriv_inverse(target, lb.constellation) * n;
      }
    }
    return p;
  }

  double demand(double c) const {
    auto p = alloc(c);
    double t = 0.0;
    for (double x : p) t += x;
    return t;
  }

  double rate(const PowerAllocation& p) const { return total_rate(p, ch_, model_, sys_); }

  // Demand of the lambda -> 0 saturated allocation; finite only for alphabets
  // with a resolution cap.
  double saturation_demand() const {
    if (!std::holds_alternative<FiniteAlphabetModel>(model_)) return inf;
    return demand(0.0);
  }

  // Smallest marginal level whose demand fits the budget.
  double level_for_budget(double budget) const {
    if (!usable()) return 0.0;
    if (std::holds_alternative<GaussianModel>(model_)) {
      if (!std::isfinite(budget)) fail(errc::infeasible, "budget must be finite for this model");
      double theta = water_level(floors_, budget);
      return sys_.bandwidth / (theta * std::log(2.0));
    }
    if (saturation_demand() <= budget) return 0.0;
    if (!std::isfinite(budget)) fail(errc::infeasible, "budget must be finite for this model");
    double lo = 0.0, hi = c_hat_;
    for (int it = 0; it < 200 && hi - lo > 1e-11 * c_hat_; ++it) {
      double mid = 0.5 * (lo + hi);
      double d = demand(mid);
      if (d > budget) {
        lo = mid;
      } else {
        hi = mid;
        if (budget - d <= 1e-10 * budget) break;
      }
    }
    return hi;
  }

  // Level at which the path rate drops to the floor; clamped below by c_lo.
  // Returns the feasible side (rate >= floor). +inf means the floor never binds.
  double level_for_rate(double floor, double c_lo) const {
    if (!(floor > 0.0)) return inf;
    double lo = std::max(c_lo, 1e-14 * c_hat_);
    if (rate(PowerAllocation{alloc(lo)}) < floor)
      fail(errc::infeasible_qos, "rate floor exceeds the achievable rate");
    double hi = c_hat_;
    if (rate(PowerAllocation{alloc(hi)}) >= floor) return inf;
    for (int it = 0; it < 200 && hi - lo > 1e-11 * c_hat_; ++it) {
      double mid = 0.5 * (lo + hi);
      double rm = rate(PowerAllocation{alloc(mid)});
      if (rm >= floor) {
        lo = mid;
        if (rm - floor <= 1e-10 * floor) break;
      } else {
        hi = mid;
      }
    }
    return lo;
  }

 private:
  double deriv_inverse(double target, const Constellation& c) const {
    double lo = 0.0, hi = 1.0;
    int guard = 0;
    while (lower_bound_norm_deriv(hi, c) > target) {
      lo = hi;
      hi *= 2.0;
      if (++guard > 1100) fail(errc::bisection_failure, "could not bracket marginal level");
    }
    for (int it = 0; it < 200 && hi - lo > 1e-12 * std::max(1.0, hi); ++it) {
      double mid = 0.5 * (lo + hi);
      (lower_bound_norm_deriv(mid, c) > target ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
  }

  static constexpr double sat_mmse_ = 1e-6;

  const ChannelState& ch_;
  const SystemParams& sys_;
  const RateModel& model_;
  const MmseTable* table_;
  std::vector<double> floors_;
  double c_hat_ = 0.0;
  double s_sat_ = 0.0;
  double deriv0_ = 0.0;
};

// Feasible stretch [c_B, c_r] of the marginal path, computed once per problem.
struct PathInterval {
  double c_budget = 0.0;
  double c_rate = inf;
};

inline PathInterval path_interval(const MarginalPath& path, double budget, double rate_floor) {
  if (!(budget > 0.0)) fail(errc::infeasible, "budget must be positive");
  PathInterval iv;
  iv.c_budget = path.level_for_budget(budget);
  iv.c_rate = path.level_for_rate(rate_floor, iv.c_budget);
  return iv;
}

}  // namespace detail

/// Exact maximizer of R(p) - q (2 sum p + P_c) over the feasible set: the
/// unconstrained stationary level 2q clamped into the feasible path stretch.
inline PowerAllocation ee_subproblem(double q, const ChannelState& ch, const SystemParams& sys,
                                     const RateModel& model, const MmseTable* table = nullptr) {
  if (!(q >= 0.0)) fail(errc::out_of_domain, "Dinkelbach parameter must be nonnegative");
  validate(sys);
  detail::MarginalPath path(ch, sys, model, table);
  auto iv = detail::path_interval(path, effective_budget(sys, model), sys.rate_floor);
  double c = std::clamp(2.0 * q, iv.c_budget, iv.c_rate);
  return PowerAllocation{path.alloc(c)};
}

/// Euclidean projection onto the feasible set. Exact water-level form when the
/// rate floor is absent or slack; log-barrier descent when it binds.
inline PowerAllocation project_feasible(const PowerAllocation& p_tilde, const FeasibleSet& fs,
                                        const ChannelState& ch, const SystemParams& sys) {
  const double budget = fs.budget;
  const double floor = fs.rate_floor;
  const auto& v = p_tilde.powers;
  if (v.size() != ch.gains.size()) fail(errc::dimension_mismatch, "allocation size mismatch");

  auto rate_of = [&](const std::vector<double>& p) {
    return total_rate(PowerAllocation{p}, ch, fs.model, sys);
  };

  bool nonneg = true;
  double tot = 0.0;
  for (double x : v) {
    nonneg = nonneg && x >= 0.0;
    tot += x;
  }
  if (nonneg && tot <= budget && (floor <= 0.0 || rate_of(v) >= floor)) return p_tilde;

  std::vector<double> base = std::isfinite(budget) ? detail::project_budget_simplex(v, budget)
                                                   : [&] {
                                                       auto w = v;
                                                       for (double& x : w) x = std::max(x, 0.0);
                                                       return w;
                                                     }();
  if (floor <= 0.0 || rate_of(base) >= floor) return PowerAllocation{std::move(base)};

  // Rate floor active. Feasibility first, via the maximum-rate point.
  if (!std::isfinite(budget) && !std::holds_alternative<FiniteAlphabetModel>(fs.model))
    fail(errc::infeasible, "projection needs a finite budget for this model");
  detail::MarginalPath path(ch, sys, fs.model, nullptr);
  double c_b = path.level_for_budget(budget);
  std::vector<double> x = path.alloc(c_b);
  double rmax = rate_of(x);
  if (rmax < floor * (1.0 - 1e-9)) fail(errc::infeasible, "feasible set is empty");
  if (rmax <= floor * (1.0 + 1e-12)) return PowerAllocation{std::move(x)};  // single feasible point

  // Strictly interior start: pull the max-rate point off the budget face just
  // far enough that the rate stays above the floor.
  const std::size_t m = v.size();
  const double scale = std::isfinite(budget) ? budget : std::max(tot, 1.0);
  const std::vector<double> pmax = x;
  bool interior = false;
  for (double shrink : {1e-3, 1e-6, 1e-8, 1e-10}) {
    for (std::size_t i = 0; i < m; ++i) x[i] = (1.0 - shrink) * pmax[i] + 1e-13 * scale;
    double s = 0.0;
    for (double xi : x) s += xi;
    if (s < budget && rate_of(x) > floor) {
      interior = true;
      break;
    }
  }
  if (!interior) return PowerAllocation{pmax};  // sliver-thin set; pmax is feasible

  auto barrier = [&](const std::vector<double>& p, double t) {
    double tp = 0.0;
    for (double xi : p) {
      if (xi <= 0.0) return inf;
      tp += xi;
    }
    if (std::isfinite(budget) && tp >= budget) return inf;
    double slack = rate_of(p) - floor;
    if (slack <= 0.0) return inf;
    double phi = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      double d = p[i] - v[i];
      phi += t * d * d - std::log(p[i]);
    }
    if (std::isfinite(budget)) phi -= std::log(budget - tp);
    phi -= std::log(slack);
    return phi;
  };
  auto marginal = [&](double p, std::size_t i) {
    return std::visit(
        [&](const auto& mm) -> double {
          using T = std::decay_t<decltype(mm)>;
          double g2 = std::norm(ch.gains[i]);
          if (g2 <= 0.0) return 0.0;
          double n = 4.0 * sys.noise_psd * sys.bandwidth / g2;
          if constexpr (std::is_same_v<T, GaussianModel>)
            return sys.bandwidth / (std::log(2.0) * (n + p));
          else if constexpr (std::is_same_v<T, FiniteAlphabetModel>)
            return sys.bandwidth * mmse(p / n, mm.constellation, mm.quad) / (std::log(2.0) * n);
          else
            return sys.bandwidth * lower_bound_norm_deriv(p / n, mm.constellation) / n;
        },
        fs.model);
  };

  std::vector<double> grad(m), cand(m);
  double t = 100.0 / (scale * scale);
  for (int round = 0; round < 15; ++round, t *= 10.0) {
    double phi = barrier(x, t);
    for (int inner = 0; inner < 400; ++inner) {
      double tp = 0.0;
      for (double xi : x) tp += xi;
      double slack = rate_of(x) - floor;
      double bud = std::isfinite(budget) ? 1.0 / (budget - tp) : 0.0;
      for (std::size_t i = 0; i < m; ++i)
        grad[i] = 2.0 * t * (x[i] - v[i]) - 1.0 / x[i] + bud - marginal(x[i], i) / slack;
      // Jacobi-preconditioned step keeps the boundary terms tame.
      double step = 1.0, gnorm = 0.0;
      for (std::size_t i = 0; i < m; ++i) {
        double h = 2.0 * t + 1.0 / (x[i] * x[i]) + bud * bud;
        cand[i] = grad[i] / h;
        gnorm = std::max(gnorm, std::abs(cand[i]));
      }
      if (gnorm <= 1e-13 * scale) break;
      double phi_new = inf;
      for (int bt = 0; bt < 60; ++bt) {
        std::vector<double> y(m);
        for (std::size_t i = 0; i < m; ++i) y[i] = x[i] - step * cand[i];
        phi_new = barrier(y, t);
        if (phi_new <= phi - 1e-4 * step * gnorm * gnorm) {
          x = std::move(y);
          phi = phi_new;
          break;
        }
        step *= 0.5;
      }
      if (!(phi_new <= phi)) break;  // no descent possible at this scale
    }
  }

  double tp = 0.0;
  for (double xi : x) tp += xi;
  if (!(tp <= budget * (1.0 + 1e-12)) || rate_of(x) < floor * (1.0 - 1e-9))
    fail(errc::solver_failure, "projection failed to certify feasibility");
  return PowerAllocation{std::move(x)};
}

/// Dinkelbach iteration for max EE subject to budget and rate floor. The
/// ratio sequence is nondecreasing; convergence is declared at relative gap
/// 1e-8 within 50 iterations.
inline AllocationResult ee_maximize(const ChannelState& ch, const SystemParams& sys,
                                    const RateModel& model, const MmseTable* table = nullptr,
                                    std::vector<DinkelbachState>* trace = nullptr) {
  validate(sys);
  detail::MarginalPath path(ch, sys, model, table);
  auto iv = detail::path_interval(path, effective_budget(sys, model), sys.rate_floor);

  double q = 0.0;
  for (int it = 1; it <= 50; ++it) {
    double c = std::clamp(2.0 * q, iv.c_budget, iv.c_rate);
    PowerAllocation p{path.alloc(c)};
    double total = p.total();
    double rate = path.rate(p);
    double denom = 2.0 * total + sys.circuit_power;
    double f_value = rate - q * denom;
    double q_new = rate / denom;
    if (trace) trace->push_back({q_new, it, f_value});
    if (std::abs(q_new - q) <= 1e-8 * std::max(q_new, std::numeric_limits<double>::min())) {
      AllocationResult r;
      r.alloc = std::move(p);
      r.objective = q_new;
      r.dual = q_new;
      r.iterations = it;
      r.kkt_residual = std::abs(q_new - q);  // |f| / denom at the solved parameter
      r.budget_used = total;
      return r;
    }
    q = q_new;
  }
  fail(errc::solver_failure, "Dinkelbach iteration did not converge in 50 steps");
}

}  // namespace acoofdm
