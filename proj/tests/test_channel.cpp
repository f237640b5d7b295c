#include <catch_amalgamated.hpp>

#include <cmath>
#include <complex>
#include <numbers>

#include "acoofdm/channel.hpp"
#include "acoofdm/error.hpp"
#include "oracles.hpp"

using namespace acoofdm;

namespace {

Geometry room_geom(double d_unused = 0.0) {
  (void)d_unused;
  Geometry g;
  g.irradiance_angle = std::numbers::pi / 3.0;
  g.incidence_angle = std::numbers::pi / 4.0;
  g.half_power_angle = std::numbers::pi / 3.0;
  g.fov = std::numbers::pi / 2.0;
  return g;
}

}  // namespace

TEST_CASE("Lambertian order is 1 at 60 degrees half-power angle", "[channel]") {
  CHECK(lambertian_order(std::numbers::pi / 3.0) == Catch::Approx(1.0).margin(1e-14));
}

TEST_CASE("Lambertian gain regression value and scaling laws", "[channel]") {
  Geometry g = room_geom();

  SECTION("frozen reference evaluation at d = 3.64") {
    CHECK(lambertian_gain(g, 3.64) == Catch::Approx(8.4938065692276182e-07).epsilon(1e-14));
  }
  SECTION("doubling distance quarters the gain") {
    double g1 = lambertian_gain(g, 2.0);
    double g2 = lambertian_gain(g, 4.0);
    CHECK(g2 == Catch::Approx(0.25 * g1).epsilon(1e-14));
  }
  SECTION("out-of-FOV incidence gives zero") {
    g.fov = 0.5;
    g.incidence_angle = 0.9;
    CHECK(lambertian_gain(g, 3.0) == 0.0);
  }
  SECTION("invalid inputs are rejected") {
    CHECK_THROWS_AS(lambertian_gain(room_geom(), 0.0), error);
    CHECK_THROWS_AS(lambertian_gain(room_geom(), -1.0), error);
    Geometry bad = room_geom();
    bad.irradiance_angle = std::numbers::pi / 2.0;  // must be < pi/2
    CHECK_THROWS_AS(lambertian_gain(bad, 3.0), error);
    bad = room_geom();
    bad.half_power_angle = 0.0;
    CHECK_THROWS_AS(lambertian_gain(bad, 3.0), error);
    bad = room_geom();
    bad.detector_area = 0.0;
    CHECK_THROWS_AS(lambertian_gain(bad, 3.0), error);
  }
}

TEST_CASE("LOS gain is a unit-modulus rotation of the Lambertian gain", "[channel]") {
  const double gl = 3.2e-6;
  CHECK(los_gain(gl, 0.0, 1e-8) == cplx{gl, 0.0});
  for (double f : {1e6, 3e6, 1.7e7}) {
    CHECK(std::abs(los_gain(gl, f, 1.2e-8)) == Catch::Approx(gl).epsilon(1e-14));
  }
  // quarter-period phase: f = 1/(4 tau) -> -j g_L
  const double tau = 1.1e-8;
  cplx h = los_gain(gl, 1.0 / (4.0 * tau), tau);
  CHECK(h.real() == Catch::Approx(0.0).margin(1e-20));
  CHECK(h.imag() == Catch::Approx(-gl).epsilon(1e-12));
}

TEST_CASE("diffuse gain is a first-order low-pass", "[channel]") {
  DiffuseParams dp{0.1, 10e-9, 0.0};
  CHECK(diffuse_gain(dp, 0.0) == cplx{0.1, 0.0});
  double f3db = 1.0 / (2.0 * std::numbers::pi * dp.decay_time);
  CHECK(std::abs(diffuse_gain(dp, f3db)) == Catch::Approx(0.1 / std::sqrt(2.0)).epsilon(1e-12));

  DiffuseParams off{0.0, 10e-9, 0.0};
  for (double f : {0.0, 1e6, 1e8}) CHECK(std::abs(diffuse_gain(off, f)) == 0.0);

  SECTION("|H_D| strictly decreasing in frequency") {
    double prev = std::abs(diffuse_gain(dp, 1e5));
    for (double f = 2e5; f <= 2e6; f += 1e5) {
      double cur = std::abs(diffuse_gain(dp, f));
      CHECK(cur < prev);
      prev = cur;
    }
  }
  SECTION("optional extra delay only rotates the phase") {
    DiffuseParams delayed{0.1, 10e-9, 7e-9};
    for (double f : {1e6, 5e6}) {
      CHECK(std::abs(diffuse_gain(delayed, f)) ==
            Catch::Approx(std::abs(diffuse_gain(dp, f))).epsilon(1e-14));
    }
  }
}

TEST_CASE("single-LED LOS-only gains have constant magnitude", "[channel]") {
  SystemParams sys = testutil::reference_system();
  Geometry g = testutil::room_leds()[0];
  ChannelState ch = subcarrier_gains(g, testutil::los_only(), sys);
  REQUIRE(ch.gains.size() == 32);
  double gl = lambertian_gain(g, distance(g));
  for (const auto& h : ch.gains) CHECK(std::abs(h) == Catch::Approx(gl).epsilon(1e-12));
}

TEST_CASE("reference room LED distances", "[channel]") {
  auto leds = testutil::room_leds();
  CHECK(distance(leds[0]) == Catch::Approx(3.2015621187164243).epsilon(1e-15));
  CHECK(distance(leds[1]) == Catch::Approx(4.0311288741492746).epsilon(1e-15));
  CHECK(distance(leds[2]) == Catch::Approx(4.2720018726587652).epsilon(1e-15));
  CHECK(distance(leds[3]) == Catch::Approx(4.924428900898052).epsilon(1e-15));
}

TEST_CASE("reference room subcarrier gains regression vector", "[channel]") {
  SystemParams sys = testutil::reference_system();

  SECTION("with diffuse component") {
    ChannelState ch = testutil::room_channel(sys);
    REQUIRE(ch.gains.size() == 32);
    auto expect = [&](int i, double re, double im) {
      CHECK(ch.gains[i - 1].real() == Catch::Approx(re).epsilon(1e-12));
      CHECK(ch.gains[i - 1].imag() == Catch::Approx(im).epsilon(1e-12));
    };
    expect(1, 0.099609629593536309, -0.006258712835409859);
    expect(2, 0.096571635799819713, -0.018203498200428044);
    expect(5, 0.075772591167934014, -0.042849114725329651);
    expect(16, 0.020857772876799689, -0.040632241838344824);
    expect(32, 0.0059999974932231533, -0.023745331203203771);
  }
  SECTION("LOS only") {
    ChannelState ch = testutil::room_channel(sys, true);
    auto expect = [&](int i, double re, double im) {
      CHECK(ch.gains[i - 1].real() == Catch::Approx(re).epsilon(1e-12));
      CHECK(ch.gains[i - 1].imag() == Catch::Approx(im).epsilon(1e-12));
    };
    expect(1, 2.861352819048504e-06, -2.350083526888822e-07);
    expect(2, 2.7827570175302919e-06, -6.9824333646127372e-07);
    expect(5, 2.1104688249074865e-06, -1.9173311377477823e-06);
    expect(16, -2.1745692943932051e-06, -1.4980947754597696e-06);
    expect(32, 8.3159823284291737e-07, 1.8075310399042577e-06);
    CHECK(std::abs(ch.gains[0]) == Catch::Approx(2.8709874400474765e-06).epsilon(1e-12));
  }
}

TEST_CASE("subcarrier frequencies are the odd multiples of W", "[channel]") {
  SystemParams sys = testutil::reference_system();
  ChannelState ch = testutil::room_channel(sys);
  for (std::size_t i = 0; i < ch.frequencies.size(); ++i)
    CHECK(ch.frequencies[i] == (2.0 * static_cast<double>(i) + 1.0) * sys.bandwidth);
}

TEST_CASE("diffuse-dominated gains are nonincreasing across subcarriers", "[channel]") {
  SystemParams sys = testutil::reference_system();
  ChannelState ch = testutil::room_channel(sys);
  for (std::size_t i = 1; i < ch.gains.size(); ++i)
    CHECK(std::abs(ch.gains[i]) <= std::abs(ch.gains[i - 1]) + 1e-15);
}

TEST_CASE("subcarrier gains are deterministic", "[channel]") {
  SystemParams sys = testutil::reference_system();
  ChannelState a = testutil::room_channel(sys);
  ChannelState b = testutil::room_channel(sys);
  for (std::size_t i = 0; i < a.gains.size(); ++i) CHECK(a.gains[i] == b.gains[i]);
}
