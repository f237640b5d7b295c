#include <catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "acoofdm/ee_alloc.hpp"
#include "oracles.hpp"

using namespace acoofdm;

namespace {

const std::vector<double> kFloors{0.5, 0.8, 1.1, 2.0};

SystemParams ee_sys(double budget = 1.0, double rate_floor = 0.0) {
  SystemParams sys = testutil::reference_system();
  sys.electrical_budget = budget;
  sys.optical_budget = inf;
  sys.rate_floor = rate_floor;
  return sys;
}

bool has_code(const error& e, errc c) { return e.code() == c; }

}  // namespace

TEST_CASE("Dinkelbach iterates are monotone and certified", "[ee_alloc]") {
  SystemParams sys = ee_sys();
  auto ch = testutil::channel_from_floors(kFloors, sys);

  for (const RateModel& model :
       {RateModel{GaussianModel{}},
        RateModel{FiniteAlphabetModel{Constellation::qam(4), QuadratureSpec{}}},
        RateModel{LowerBoundModel{Constellation::qam(4)}}}) {
    std::vector<DinkelbachState> trace;
    auto r = ee_maximize(ch, sys, model, nullptr, &trace);
    REQUIRE_FALSE(trace.empty());
    CHECK(r.iterations <= 50);
    CHECK(r.iterations == static_cast<int>(trace.size()));
    for (std::size_t i = 0; i < trace.size(); ++i) {
      CHECK(trace[i].f_value >= -1e-9 * sys.bandwidth);
      if (i > 0) CHECK(trace[i].q >= trace[i - 1].q - 1e-9 * trace[i].q);
    }
    double denom = 2.0 * r.budget_used + sys.circuit_power;
    CHECK(r.kkt_residual <= 1e-8 * std::max(r.objective, 1.0));
    CHECK(std::abs(trace.back().f_value) <= 1.01e-8 * r.objective * denom + 1e-9);
    CHECK(r.objective == Catch::Approx(r.dual).epsilon(1e-15));
  }
}

TEST_CASE("EE matches nested grid oracles", "[ee_alloc][oracle]") {
  SystemParams sys = ee_sys();
  auto ch = testutil::channel_from_floors(kFloors, sys);

  SECTION("Gaussian against the 2-D (total power, waterfill split) search") {
    auto r = ee_maximize(ch, sys, RateModel{GaussianModel{}});
    double best = 0.0;
    for (int k = 1; k <= 4000; ++k) {
      double b = sys.electrical_budget * k / 4000.0;
      auto wf = waterfill(ch, b, sys);
      double rate = total_rate(wf.alloc, ch, RateModel{GaussianModel{}}, sys);
      best = std::max(best, rate / (2.0 * wf.alloc.total() + sys.circuit_power));
    }
    CHECK(r.objective >= best - 1e-4 * best);
    CHECK(std::abs(r.objective - best) <= 1e-3 * best);
  }
  SECTION("all models against the separable DP oracle") {
    for (const RateModel& model :
         {RateModel{GaussianModel{}},
          RateModel{FiniteAlphabetModel{Constellation::qam(4), QuadratureSpec{}}},
          RateModel{LowerBoundModel{Constellation::qam(4)}}}) {
      auto r = ee_maximize(ch, sys, model);
      auto closures = testutil::rate_closures(ch, model, sys);
      double oracle =
          testutil::ee_oracle(closures, sys.electrical_budget, 400, sys.circuit_power);
      CHECK(r.objective >= oracle - 1e-4 * oracle);
    }
  }
}

TEST_CASE("tight budgets collapse EE onto the SE solution", "[ee_alloc]") {
  SystemParams sys = ee_sys(0.05);
  auto ch = testutil::channel_from_floors(kFloors, sys);
  auto ee = ee_maximize(ch, sys, RateModel{GaussianModel{}});
  auto wf = waterfill(ch, 0.05, sys);
  REQUIRE(ee.alloc.powers.size() == wf.alloc.powers.size());
  for (std::size_t i = 0; i < wf.alloc.powers.size(); ++i)
    CHECK(ee.alloc.powers[i] == Catch::Approx(wf.alloc.powers[i]).margin(1e-6));
  CHECK(ee.budget_used == Catch::Approx(0.05).epsilon(1e-6));
}

TEST_CASE("huge circuit power pushes the argmax to the SE optimum", "[ee_alloc]") {
  SystemParams sys = ee_sys(0.6);
  sys.circuit_power = 1e9;
  auto ch = testutil::channel_from_floors(kFloors, sys);
  auto ee = ee_maximize(ch, sys, RateModel{GaussianModel{}});
  auto wf = waterfill(ch, 0.6, sys);
  for (std::size_t i = 0; i < wf.alloc.powers.size(); ++i)
    CHECK(ee.alloc.powers[i] == Catch::Approx(wf.alloc.powers[i]).margin(1e-6));
  CHECK(ee.objective <= 1e-2);  // EE itself collapses
}

TEST_CASE("ee_subproblem endpoint behavior", "[ee_alloc]") {
  SystemParams sys = ee_sys(0.4, 0.0);
  auto ch = testutil::channel_from_floors(kFloors, sys);
  RateModel gauss{GaussianModel{}};

  SECTION("q = 0 reduces to rate maximization; the budget binds") {
    auto p = ee_subproblem(0.0, ch, sys, gauss);
    CHECK(p.total() == Catch::Approx(0.4).epsilon(1e-6));
    auto wf = waterfill(ch, 0.4, sys);
    for (std::size_t i = 0; i < p.powers.size(); ++i)
      CHECK(p.powers[i] == Catch::Approx(wf.alloc.powers[i]).margin(1e-6));
  }
  SECTION("huge q shuts the system down when no floor is present") {
    auto p = ee_subproblem(1e12, ch, sys, gauss);
    CHECK(p.total() <= 1e-9);
  }
  SECTION("huge q lands on the rate floor when present") {
    SystemParams qos = ee_sys(0.4, 6e5);
    auto p = ee_subproblem(1e12, ch, qos, gauss);
    double rate = total_rate(p, ch, gauss, qos);
    CHECK(rate == Catch::Approx(6e5).epsilon(1e-6));
  }
  SECTION("Gaussian interior stationarity") {
    double q = 1.1e6;  // chosen so 2q lies inside (c_budget, c_rate)
    auto p = ee_subproblem(q, ch, sys, gauss);
    REQUIRE(p.total() < 0.4 * (1.0 - 1e-9));
    REQUIRE(p.total() > 0.0);
    for (std::size_t i = 0; i < p.powers.size(); ++i) {
      if (p.powers[i] <= 0.0) continue;
      double lhs = sys.bandwidth / ((kFloors[i] + p.powers[i]) * std::log(2.0));
      CHECK(lhs == Catch::Approx(2.0 * q).epsilon(1e-9));
    }
  }
  SECTION("negative q is rejected") {
    CHECK_THROWS_MATCHES(ee_subproblem(-1.0, ch, sys, gauss), error,
                         Catch::Matchers::Predicate<error>(
                             [](const error& e) { return has_code(e, errc::out_of_domain); }));
  }
}

TEST_CASE("project_feasible", "[ee_alloc]") {
  SystemParams sys = ee_sys(1.0);
  auto ch = testutil::channel_from_floors(kFloors, sys);
  RateModel gauss{GaussianModel{}};

  SECTION("feasible points pass through unchanged") {
    FeasibleSet fs{1.0, 0.0, gauss};
    PowerAllocation p{{0.1, 0.2, 0.1, 0.05}};
    auto out = project_feasible(p, fs, ch, sys);
    CHECK(out.powers == p.powers);
  }
  SECTION("simplex projection in the floor-free case") {
    FeasibleSet fs{1.0, 0.0, gauss};
    auto out = project_feasible(PowerAllocation{{0.6, 0.6}}, fs,
                                testutil::channel_from_floors({0.5, 0.5}, sys), sys);
    CHECK(out.powers[0] == Catch::Approx(0.5).margin(1e-12));
    CHECK(out.powers[1] == Catch::Approx(0.5).margin(1e-12));

    auto clipped = project_feasible(PowerAllocation{{1.5, 0.1}}, fs,
                                    testutil::channel_from_floors({0.5, 0.5}, sys), sys);
    CHECK(clipped.powers[0] == Catch::Approx(1.0).margin(1e-12));
    CHECK(clipped.powers[1] == Catch::Approx(0.0).margin(1e-12));
  }
  SECTION("binding rate floor is met to 1e-6 relative") {
    auto wf = waterfill(ch, 1.0, sys);
    double rmax = total_rate(wf.alloc, ch, gauss, sys);
    double floor = 0.9 * rmax;
    FeasibleSet fs{1.0, floor, gauss};
    auto out = project_feasible(PowerAllocation{{0.01, 0.01, 0.01, 0.01}}, fs, ch, sys);
    double rate = total_rate(out, ch, gauss, sys);
    CHECK(rate >= floor * (1.0 - 1e-6));
    CHECK(out.total() <= 1.0 + 1e-9);
    for (double p : out.powers) CHECK(p >= 0.0);
  }
  SECTION("empty feasible sets are reported") {
    auto wf = waterfill(ch, 1.0, sys);
    double rmax = total_rate(wf.alloc, ch, gauss, sys);
    FeasibleSet fs{1.0, 2.0 * rmax, gauss};
    CHECK_THROWS_MATCHES(
        project_feasible(PowerAllocation{{0.1, 0.1, 0.1, 0.1}}, fs, ch, sys), error,
        Catch::Matchers::Predicate<error>(
            [](const error& e) { return has_code(e, errc::infeasible); }));
  }
}

TEST_CASE("QoS floors: feasible, binding, infeasible", "[ee_alloc]") {
  SystemParams sys = ee_sys(1.0);
  auto ch = testutil::channel_from_floors(kFloors, sys);
  RateModel gauss{GaussianModel{}};
  auto wf = waterfill(ch, 1.0, sys);
  double rmax = total_rate(wf.alloc, ch, gauss, sys);

  auto unconstrained = ee_maximize(ch, sys, gauss);
  double r0 = total_rate(unconstrained.alloc, ch, gauss, sys);

  SECTION("floor below the unconstrained rate changes nothing") {
    SystemParams s2 = ee_sys(1.0, 0.5 * r0);
    auto r = ee_maximize(ch, s2, gauss);
    CHECK(r.objective == Catch::Approx(unconstrained.objective).epsilon(1e-9));
  }
  SECTION("binding floor is met with equality and EE drops") {
    SystemParams s2 = ee_sys(1.0, 0.5 * (r0 + rmax));
    auto r = ee_maximize(ch, s2, gauss);
    double rate = total_rate(r.alloc, ch, gauss, s2);
    CHECK(rate >= s2.rate_floor * (1.0 - 1e-6));
    CHECK(rate <= s2.rate_floor * (1.0 + 1e-4));
    CHECK(r.objective < unconstrained.objective);
  }
  SECTION("EE is nonincreasing in the floor") {
    double prev = inf;
    for (double frac : {0.0, 0.3, 0.6, 0.8, 0.95}) {
      SystemParams s2 = ee_sys(1.0, frac * rmax);
      auto r = ee_maximize(ch, s2, gauss);
      CHECK(r.objective <= prev * (1.0 + 1e-9));
      prev = r.objective;
    }
  }
  SECTION("unreachable floor raises infeasible-qos") {
    SystemParams s2 = ee_sys(1.0, 1.2 * rmax);
    CHECK_THROWS_MATCHES(ee_maximize(ch, s2, gauss), error,
                         Catch::Matchers::Predicate<error>([](const error& e) {
                           return has_code(e, errc::infeasible_qos);
                         }));
  }
}

TEST_CASE("EE results respect constraints, the identity, and dominate waterfill",
          "[ee_alloc][property]") {
  SystemParams sys = ee_sys(1.0);
  auto ch = testutil::channel_from_floors(kFloors, sys);

  for (const RateModel& model :
       {RateModel{GaussianModel{}},
        RateModel{FiniteAlphabetModel{Constellation::qam(4), QuadratureSpec{}}},
        RateModel{LowerBoundModel{Constellation::qam(4)}}}) {
    auto r = ee_maximize(ch, sys, model);
    double budget = effective_budget(sys, model);
    double sum = 0.0;
    for (double p : r.alloc.powers) {
      CHECK(p >= 0.0);
      sum += p;
    }
    CHECK(sum <= budget + 1e-9);

    // EE-SE ratio identity: the reported objective is exactly the ratio.
    double ratio = energy_efficiency(r.alloc, ch, model, sys);
    CHECK(r.objective == Catch::Approx(ratio).epsilon(1e-9));

    // Dominates spending the entire budget.
    PowerAllocation full = [&] {
      if (std::holds_alternative<GaussianModel>(model))
        return waterfill(ch, budget, sys).alloc;
      return se_maximize(ch, sys, model).alloc;
    }();
    CHECK(r.objective >= energy_efficiency(full, ch, model, sys) - 1e-9 * r.objective);
  }
}
