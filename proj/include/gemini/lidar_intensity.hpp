#pragma once

#include <cmath>
#include <numbers>

#include "gemini/error.hpp"

// Received lidar intensity from geometrical optics, a surface BRDF and the
// static radar equation. Units: lengths in m, angles in rad, power in W.
namespace gemini::lidar {

inline constexpr double pi = std::numbers::pi;

/// Full divergence of a Gaussian beam: 4 lambda / (pi D_rx).
inline double beamwidth(double wavelength, double aperture) {
  if (!(wavelength > 0.0) || !(aperture > 0.0))
    fail(Errc::NonPositiveInput, "wavelength and aperture must be positive");
  return 4.0 * wavelength / (pi * aperture);
}

/// Circular footprint at range R: pi R^2 theta_bw^2 / 4.
inline double footprint_area(double range, double beam_width) {
  if (!(range >= 0.0)) fail(Errc::NonPositiveRange, "range must be >= 0");
  return pi * range * range * beam_width * beam_width / 4.0;
}

inline void check_reflectivity(double rho) {
  if (!(rho >= 0.0 && rho <= 1.0)) fail(Errc::ReflectivityOutOfRange, "reflectivity must lie in [0, 1]");
}

/// Lambertian BRDF rho / pi, in 1/sr.
inline double brdf_lambert(double rho) {
  check_reflectivity(rho);
  return rho / pi;
}

struct OrenNayarTerms {
  double a;
  double b;
};

/// A = 1 - 0.5 s^2 / (s^2 + 0.33), B = 0.45 s^2 / (s^2 + 0.09).
inline OrenNayarTerms oren_nayar_terms(double sigma) {
  if (!(sigma >= 0.0)) fail(Errc::InvalidArgument, "roughness must be >= 0");
  const double s2 = sigma * sigma;
  return {1.0 - 0.5 * s2 / (s2 + 0.33), 0.45 * s2 / (s2 + 0.09)};
}

/// Monostatic Oren-Nayar BRDF: (rho / pi) [A + B sin(theta) tan(theta)].
inline double brdf_oren_nayar(double rho, double sigma, double theta) {
  check_reflectivity(rho);
  if (!(theta >= 0.0)) fail(Errc::InvalidArgument, "incidence angle must be >= 0");
  if (theta >= pi / 2) fail(Errc::GrazingAngle, "incidence angle must be below pi/2");
  const auto [a, b] = oren_nayar_terms(sigma);
  return brdf_lambert(rho) * (a + b * std::sin(theta) * std::tan(theta));
}

/// Effective backscatter cross section 4 pi cos(theta) A_fp(R) f_r, in m^2.
inline double backscatter_cross_section(double theta, double range, double f_r, double beam_width) {
  return 4.0 * pi * std::cos(theta) * footprint_area(range, beam_width) * f_r;
}

/// Static lidar equation: P_t D_rx^2 / (4 pi R^4 theta_bw^2) eta_opt eta_atm sigma_bs.
inline double received_intensity(double transmit_power, double aperture, double range, double beam_width,
                                 double eta_opt, double eta_atm, double sigma_bs) {
  if (!(range > 0.0)) fail(Errc::NonPositiveRange, "range must be positive");
  const double r2 = range * range;
  return transmit_power * aperture * aperture / (4.0 * pi * r2 * r2 * beam_width * beam_width) * eta_opt *
         eta_atm * sigma_bs;
}

}  // namespace gemini::lidar
