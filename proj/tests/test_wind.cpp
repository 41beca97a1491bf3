#include <cmath>
#include <complex>
#include <numbers>
#include <numeric>
#include <vector>

#include <gtest/gtest.h>

#include "swarmlink/rng.hpp"
#include "swarmlink/wind.hpp"

using namespace swarmlink;
using namespace swarmlink::wind;

namespace {

using cd = std::complex<double>;

std::vector<cd> direct_dft(const std::vector<cd>& x, int sign) {
  const std::size_t n = x.size();
  std::vector<cd> y(n);
  for (std::size_t k = 0; k < n; ++k) {
    cd acc = 0.0;
    for (std::size_t j = 0; j < n; ++j)
      acc += x[j] * std::polar(1.0, sign * 2.0 * std::numbers::pi *
                                        static_cast<double>((j * k) % n) / static_cast<double>(n));
    y[k] = acc;
  }
  return y;
}

TurbulenceSpec spec_of(TurbulenceModel m) {
  TurbulenceSpec s;
  s.model = m;
  s.sigma = Vec3(1.5, 2.0, 0.7);
  s.length = Vec3(150.0, 80.0, 30.0);
  return s;
}

}  // namespace

TEST(Psd, ZeroFrequencyValueIsSigmaSquaredLOverPi) {
  for (auto m : {TurbulenceModel::Dryden, TurbulenceModel::VonKarman}) {
    const auto s = spec_of(m);
    for (int c = 0; c < 3; ++c) {
      const double expect = s.sigma[c] * s.sigma[c] * s.length[c] / std::numbers::pi;
      EXPECT_EQ(turbulence_psd(s, static_cast<Component>(c), 0.0), expect);
    }
  }
}

TEST(Psd, PrintedFormsAtASamplePoint) {
  TurbulenceSpec s;
  s.sigma = Vec3::Ones();
  s.length = Vec3::Constant(100.0);
  const double w = 0.01;  // L w = 1
  const double scale = 100.0 / std::numbers::pi;
  EXPECT_NEAR(dryden_psd(s, Component::U, w), scale / 2.0, 1e-12);
  EXPECT_NEAR(dryden_psd(s, Component::V, w), scale * 13.0 / 25.0, 1e-12);
  const double a = 1.339;
  EXPECT_NEAR(von_karman_psd(s, Component::U, w), scale / std::pow(1 + a * a, 5.0 / 6.0), 1e-12);
  EXPECT_NEAR(von_karman_psd(s, Component::W, w),
              scale * (1 + 8.0 / 3.0 * 4 * a * a) / std::pow(1 + 2 * a, 11.0 / 6.0), 1e-12);
}

TEST(Psd, MonotoneNonIncreasingForLongitudinal) {
  for (auto m : {TurbulenceModel::Dryden, TurbulenceModel::VonKarman}) {
    const auto s = spec_of(m);
    double prev = turbulence_psd(s, Component::U, 0.0);
    for (double w = 1e-5; w < 10.0; w *= 1.1) {
      const double v = turbulence_psd(s, Component::U, w);
      EXPECT_LE(v, prev);
      EXPECT_GT(v, 0.0);
      prev = v;
    }
  }
}

// Two-sided spectrum: the integral over the whole line is the variance.
// Substituting Omega = tan(t) / L turns the Dryden u integrand into 1/pi.
TEST(Psd, DrydenIntegratesToVariance) {
  const auto s = spec_of(TurbulenceModel::Dryden);
  for (int c = 0; c < 3; ++c) {
    const double L = s.length[c];
    const int n = 20000;
    const double h = std::numbers::pi / n;
    double total = 0.0;
    for (int i = 0; i < n; ++i) {
      const double t = -std::numbers::pi / 2 + (i + 0.5) * h;
      const double om = std::abs(std::tan(t)) / L;
      total += turbulence_psd(s, static_cast<Component>(c), om) / (L * std::cos(t) * std::cos(t)) * h;
    }
    EXPECT_NEAR(total, s.sigma[c] * s.sigma[c], 1e-6 * s.sigma[c] * s.sigma[c]);
  }
}

TEST(Psd, NegativeFrequencyRejected) {
  EXPECT_THROW(dryden_psd(TurbulenceSpec{}, Component::U, -1.0), DomainError);
  EXPECT_THROW(von_karman_psd(TurbulenceSpec{}, Component::V, -1.0), DomainError);
}

TEST(Fft, MatchesDirectDft) {
  Rng rng(3);
  for (std::size_t n : {8u, 64u, 256u}) {
    std::vector<cd> x(n);
    for (auto& z : x) z = {rng.normal(), rng.normal()};
    for (int sign : {FFTW_FORWARD, FFTW_BACKWARD}) {
      auto y = x;
      internal::dft_in_place(y, sign);
      const auto oracle = direct_dft(x, sign);
      for (std::size_t k = 0; k < n; ++k) EXPECT_LT(std::abs(y[k] - oracle[k]), 1e-9);
    }
  }
}

TEST(Synthesis, ZeroMeanAndDeterministic) {
  const auto s = spec_of(TurbulenceModel::Dryden);
  const auto a = synthesize_turbulence(s, Component::U, 1.0, 1024, 99);
  const auto b = synthesize_turbulence(s, Component::U, 1.0, 1024, 99);
  const auto c = synthesize_turbulence(s, Component::U, 1.0, 1024, 100);
  EXPECT_EQ(a, b);
  EXPECT_NE(a, c);
  EXPECT_NEAR(std::accumulate(a.begin(), a.end(), 0.0) / a.size(), 0.0, 1e-12);
}

TEST(Synthesis, ZeroSigmaGivesSilence) {
  auto s = spec_of(TurbulenceModel::VonKarman);
  s.sigma = Vec3::Zero();
  for (double v : synthesize_turbulence(s, Component::W, 2.0, 256, 1)) EXPECT_EQ(v, 0.0);
}

TEST(Synthesis, RejectsBadLengths) {
  EXPECT_THROW(synthesize_turbulence(TurbulenceSpec{}, Component::U, 1.0, 1000, 1), DomainError);
  EXPECT_THROW(synthesize_turbulence(TurbulenceSpec{}, Component::U, 0.0, 1024, 1), DomainError);
}

// Averaged over many realizations the periodogram (dx / 2 pi n) |Y_k|^2
// approaches the target spectrum bin by bin.
TEST(Synthesis, EnsemblePeriodogramTracksTarget) {
  const auto s = spec_of(TurbulenceModel::VonKarman);
  const std::size_t n = 256;
  const double dx = 2.0;
  const int runs = 400;
  std::vector<double> mean(n / 2, 0.0);
  for (int r = 0; r < runs; ++r) {
    const auto x = synthesize_turbulence(s, Component::V, dx, n, derive_seed(5, "ens", r));
    std::vector<cd> buf(x.begin(), x.end());
    const auto y = direct_dft(buf, -1);
    for (std::size_t k = 1; k < n / 2; ++k)
      mean[k] += dx / (2 * std::numbers::pi * n) * std::norm(y[k]) / runs;
  }
  for (std::size_t k = 1; k < n / 2; k += 7) {
    const double target = turbulence_psd(s, Component::V, bin_frequency(k, n, dx));
    EXPECT_NEAR(mean[k] / target, 1.0, 0.2) << "bin " << k;
  }
}

TEST(Shear, SplitsWindChange) {
  const auto r = wind_shear_response({0.3}, 2.0);
  EXPECT_DOUBLE_EQ(r.delta_ground_speed, 0.6);
  EXPECT_DOUBLE_EQ(r.delta_airspeed, 1.4);
  EXPECT_THROW(wind_shear_response({1.0}, 1.0), DomainError);
}

TEST(Drag, FullExpressionWithoutHalf) {
  EXPECT_DOUBLE_EQ(airflow_drag_force(1.225, 10.0, 0.5, 0.2), 1.225 * 100.0 * 0.5 * 0.2);
  EXPECT_THROW(airflow_drag_force(1.0, -1.0, 1.0, 1.0), DomainError);
}
