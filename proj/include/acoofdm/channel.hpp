#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <vector>

#include "acoofdm/error.hpp"
#include "acoofdm/types.hpp"

namespace acoofdm {

inline constexpr double speed_of_light = 299792458.0;

/// LED-to-receiver link geometry for the generalized Lambertian model.
/// Angles are radians; positions are meters and feed the distance and
/// propagation-delay terms.
struct Geometry {
  std::array<double, 3> led_position{0.0, 0.0, 0.0};
  std::array<double, 3> receiver_position{0.0, 0.0, 0.0};
  double irradiance_angle = 0.0;     ///< theta at the LED
  double incidence_angle = 0.0;      ///< phi at the detector
  double half_power_angle = 1.0472;  ///< Phi_1/2
  double detector_area = 1e-4;       ///< A_r (m^2)
  double fov = 1.5708;               ///< Psi
  double filter_gain = 1.0;          ///< T(phi)
  double concentrator_gain = 1.0;    ///< G(phi)
};

/// First-order low-pass model of the aggregate diffuse reflections. The decay
/// time here is unrelated to the LOS propagation delay. extra_delay shifts the
/// diffuse arrival relative to the LOS path (phase only); zero by default
/// since no standard value exists.
struct DiffuseParams {
  double efficiency = 0.1;    ///< eta_D
  double decay_time = 10e-9;  ///< tau_d (s)
  double extra_delay = 0.0;   ///< Delta T (s)
};

/// Frequency-domain channel: one complex gain per data subcarrier.
struct ChannelState {
  std::vector<cplx> gains;
  std::vector<double> frequencies;
};

inline double distance(const Geometry& g) {
  double d2 = 0.0;
  for (int a = 0; a < 3; ++a) {
    double t = g.led_position[a] - g.receiver_position[a];
    d2 += t * t;
  }
  return std::sqrt(d2);
}

inline double lambertian_order(double half_power_angle) {
  return -std::log(2.0) / std::log(std::cos(half_power_angle));
}

/// DC gain of the LOS path at distance d. Zero outside the field of view.
inline double lambertian_gain(const Geometry& g, double d) {
  constexpr double half_pi = 1.5707963267948966;
  if (!(d > 0.0)) fail(errc::invalid_geometry, "distance must be positive");
  if (!(g.detector_area > 0.0)) fail(errc::invalid_geometry, "detector area must be positive");
  if (!(g.half_power_angle > 0.0) || !(g.half_power_angle < half_pi))
    fail(errc::invalid_geometry, "half-power angle must lie in (0, pi/2)");
  if (!(g.incidence_angle >= 0.0) || !(g.incidence_angle < half_pi) ||
      !(g.irradiance_angle >= 0.0) || !(g.irradiance_angle < half_pi))
    fail(errc::invalid_geometry, "incidence and irradiance angles must lie in [0, pi/2)");
  if (g.incidence_angle > g.fov) return 0.0;
  const double m = lambertian_order(g.half_power_angle);
  return (m + 1.0) * g.detector_area * std::cos(g.incidence_angle) *
         std::pow(std::cos(g.irradiance_angle), m) * g.filter_gain * g.concentrator_gain /
         (6.283185307179586 * d * d);
}

inline cplx los_gain(double g_l, double f, double tau) {
  double ph = -6.283185307179586 * f * tau;
  return g_l * cplx(std::cos(ph), std::sin(ph));
}

inline void validate(const DiffuseParams& dp) {
  if (!(dp.efficiency >= 0.0) || !(dp.decay_time > 0.0) || !std::isfinite(dp.extra_delay))
    fail(errc::invalid_geometry, "diffuse parameters out of range");
}

inline cplx diffuse_gain(const DiffuseParams& dp, double f) {
  cplx h = dp.efficiency / cplx(1.0, 6.283185307179586 * dp.decay_time * f);
  if (dp.extra_delay != 0.0) {
    double ph = -6.283185307179586 * f * dp.extra_delay;
    h *= cplx(std::cos(ph), std::sin(ph));
  }
  return h;
}

/// Gains of the N/2 data subcarriers at f = (2i-1) W. LOS contributions of all
/// LEDs add coherently (one photodetector sees the superposed field); the
/// diffuse term models the room as a whole and enters once.
inline ChannelState subcarrier_gains(const std::vector<Geometry>& leds, const DiffuseParams& dp,
                                     const SystemParams& sys) {
  validate(sys);
  validate(dp);
  ChannelState ch;
  const int count = sys.data_subcarriers();
  ch.gains.resize(count);
  ch.frequencies.resize(count);
  for (int i = 1; i <= count; ++i) {
    double f = (2.0 * i - 1.0) * sys.bandwidth;
    cplx h = 0.0;
    for (const Geometry& g : leds) {
      double d = distance(g);
      h += los_gain(lambertian_gain(g, d), f, d / speed_of_light);
    }
    h += diffuse_gain(dp, f);
    ch.frequencies[i - 1] = f;
    ch.gains[i - 1] = h;
  }
  return ch;
}

inline ChannelState subcarrier_gains(const Geometry& led, const DiffuseParams& dp,
                                     const SystemParams& sys) {
  return subcarrier_gains(std::vector<Geometry>{led}, dp, sys);
}

}  // namespace acoofdm
