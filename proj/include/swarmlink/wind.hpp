#pragma once

// Atmospheric disturbance models: Dryden and Von Karman turbulence spectra,
// turbulence series synthesis, wind-shear response and airflow drag.
//
// Spectra are functions of the spatial frequency Omega (rad/m) and are
// two-sided: the integral over (-inf, inf) of the u-component Dryden
// spectrum is sigma_u^2.

#include <cmath>
#include <complex>
#include <cstdint>
#include <memory>
#include <mutex>
#include <numbers>
#include <utility>
#include <vector>

#include <fftw3.h>

#include "swarmlink/dynamics.hpp"
#include "swarmlink/error.hpp"
#include "swarmlink/rng.hpp"

namespace swarmlink::wind {

enum class TurbulenceModel { Dryden, VonKarman };
enum class Component : int { U = 0, V = 1, W = 2 };

struct TurbulenceSpec {
  static constexpr double kVonKarmanA = 1.339;

  Vec3 sigma = Vec3::Ones();            ///< m/s
  Vec3 length = Vec3::Constant(200.0);  ///< m
  TurbulenceModel model = TurbulenceModel::Dryden;

  void validate() const {
    detail::require((sigma.array() >= 0.0).all(),
                    "TurbulenceSpec: sigma must be >= 0");
    detail::require((length.array() > 0.0).all(),
                    "TurbulenceSpec: length must be > 0");
  }
};

/// Scalar coupling between mean-wind change and ground-speed change.
struct WindShearCoeff {
  double p = 0.0;
};

struct ShearResponse {
  double delta_ground_speed;
  double delta_airspeed;
};

inline double dryden_psd(const TurbulenceSpec& spec, Component c,
                         double omega) {
  detail::require(omega >= 0.0, "dryden_psd: omega must be >= 0");
  const int i = static_cast<int>(c);
  const double s2 = spec.sigma[i] * spec.sigma[i];
  const double L = spec.length[i];
  const double x2 = (L * omega) * (L * omega);
  const double scale = s2 * L / std::numbers::pi;
  if (c == Component::U) return scale / (1.0 + x2);
  const double den = 1.0 + 4.0 * x2;
  return scale * (1.0 + 12.0 * x2) / (den * den);
}

/// Von Karman spectra. The lateral and vertical forms use the printed
/// denominator (1 + 2a (L Omega)^2)^(11/6), not the textbook (1 + (2a L Omega)^2).
inline double von_karman_psd(const TurbulenceSpec& spec, Component c,
                             double omega) {
  detail::require(omega >= 0.0, "von_karman_psd: omega must be >= 0");
  constexpr double a = TurbulenceSpec::kVonKarmanA;
  const int i = static_cast<int>(c);
  const double s2 = spec.sigma[i] * spec.sigma[i];
  const double L = spec.length[i];
  const double scale = s2 * L / std::numbers::pi;
  if (c == Component::U) {
    const double x = a * L * omega;
    return scale / std::pow(1.0 + x * x, 5.0 / 6.0);
  }
  const double y = 2.0 * a * L * omega;
  const double num = 1.0 + (8.0 / 3.0) * y * y;
  const double den = std::pow(1.0 + 2.0 * a * (L * omega) * (L * omega),
                              11.0 / 6.0);
  return scale * num / den;
}

inline double turbulence_psd(const TurbulenceSpec& spec, Component c,
                             double omega) {
  return spec.model == TurbulenceModel::Dryden ? dryden_psd(spec, c, omega)
                                               : von_karman_psd(spec, c, omega);
}

/// Spatial frequency of DFT bin k for n samples at spacing dx, folded to >= 0.
inline double bin_frequency(std::size_t k, std::size_t n, double dx) {
  const std::size_t folded = k <= n / 2 ? k : n - k;
  return 2.0 * std::numbers::pi * static_cast<double>(folded) /
         (static_cast<double>(n) * dx);
}

namespace internal {

struct FftwPlanDeleter {
  void operator()(fftw_plan p) const { fftw_destroy_plan(p); }
};
using FftwPlan = std::unique_ptr<std::remove_pointer_t<fftw_plan>, FftwPlanDeleter>;

/// In-place complex DFT; sign = FFTW_FORWARD or FFTW_BACKWARD (unnormalized).
inline void dft_in_place(std::vector<std::complex<double>>& data, int sign) {
  // FFTW planning is not reentrant; execution is.
  static std::mutex planner_mutex;
  auto* buf = reinterpret_cast<fftw_complex*>(data.data());
  FftwPlan plan;
  {
    std::lock_guard lock(planner_mutex);
    plan.reset(fftw_plan_dft_1d(static_cast<int>(data.size()), buf, buf, sign,
                                FFTW_ESTIMATE));
  }
  fftw_execute(plan.get());
}

}  // namespace internal

/// Samples of one turbulence velocity component along a straight path.
///
/// White Gaussian noise is shaped in the frequency domain by
/// sqrt(2 pi Phi(|Omega_k|) / dx) so that the periodogram
/// (dx / 2 pi n) |Y_k|^2 has expectation Phi(Omega_k). The DC bin is zeroed,
/// which makes the series exactly zero-mean.
inline std::vector<double> synthesize_turbulence(const TurbulenceSpec& spec,
                                                 Component c,
                                                 double sample_spacing,
                                                 std::size_t n_samples,
                                                 std::uint64_t seed) {
  spec.validate();
  swarmlink::detail::require(sample_spacing > 0.0,
                             "synthesize_turbulence: sample_spacing must be > 0");
  swarmlink::detail::require(
      n_samples >= 2 && (n_samples & (n_samples - 1)) == 0,
      "synthesize_turbulence: n_samples must be a power of two >= 2");

  Rng rng(seed);
  std::vector<std::complex<double>> buf(n_samples);
  for (auto& z : buf) z = {rng.normal(), 0.0};
  internal::dft_in_place(buf, FFTW_FORWARD);

  buf[0] = 0.0;
  for (std::size_t k = 1; k < n_samples; ++k) {
    const double omega = bin_frequency(k, n_samples, sample_spacing);
    const double gain = std::sqrt(2.0 * std::numbers::pi *
                                  turbulence_psd(spec, c, omega) /
                                  sample_spacing);
    buf[k] *= gain;
  }
  internal::dft_in_place(buf, FFTW_BACKWARD);

  std::vector<double> out(n_samples);
  const double inv_n = 1.0 / static_cast<double>(n_samples);
  for (std::size_t i = 0; i < n_samples; ++i) out[i] = buf[i].real() * inv_n;
  return out;
}

inline ShearResponse wind_shear_response(const WindShearCoeff& coeff,
                                         double delta_wind) {
  swarmlink::detail::require(std::abs(coeff.p) < 1.0,
                             "wind_shear_response: |p| must be < 1");
  return {coeff.p * delta_wind, (1.0 - coeff.p) * delta_wind};
}

/// F_D = rho v^2 C_D S. There is no 1/2 factor here, unlike the textbook
/// drag equation, so this is twice the conventional dynamic-pressure force.
inline double airflow_drag_force(double air_density, double airflow_speed,
                                 double drag_coeff, double windward_area) {
  swarmlink::detail::require(air_density >= 0 && airflow_speed >= 0 &&
                                 drag_coeff >= 0 && windward_area >= 0,
                             "airflow_drag_force: inputs must be >= 0");
  return air_density * airflow_speed * airflow_speed * drag_coeff *
         windward_area;
}

}  // namespace swarmlink::wind
