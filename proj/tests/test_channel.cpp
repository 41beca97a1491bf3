#include <cmath>
#include <numbers>
#include <vector>

#include <gtest/gtest.h>

#include "swarmlink/channel.hpp"
#include "swarmlink/linkbudget.hpp"

using namespace swarmlink;
using namespace swarmlink::channel;

namespace {

LinkParams ground_link() {
  LinkParams l;
  l.tx_height = 50.0;
  l.rx_height = 2.0;
  l.wavelength = 0.125;
  return l;
}

}  // namespace

TEST(Friis, PathLossAtTwoKilometres) {
  LinkParams l;
  l.distance = 2000.0;
  // 20 log10(4 pi 2000 / 0.125)
  EXPECT_NEAR(-to_db(friis_received_power(l)), 106.066597, 1e-6);
  l.distance = 0.0;
  EXPECT_THROW(friis_received_power(l), DomainError);
}

TEST(Friis, InverseSquare) {
  LinkParams l;
  l.distance = 10.0;
  const double p10 = friis_received_power(l);
  l.distance = 100.0;
  EXPECT_NEAR(to_db(p10) - to_db(friis_received_power(l)), 20.0, 1e-12);
}

TEST(TwoRay, GeometryPathDifferenceIsStable) {
  LinkParams l = ground_link();
  for (double d : {1.0, 30.0, 1e3}) {
    l.distance = d;
    const auto g = two_ray_geometry(l);
    EXPECT_NEAR(g.path_difference, g.reflected_distance - g.los_distance,
                1e-9 * g.reflected_distance);
  }
  l.distance = 1e7;
  const auto g = two_ray_geometry(l);
  EXPECT_NEAR(g.path_difference, 2.0 * 50.0 * 2.0 / 1e7, 1e-15);
}

TEST(TwoRay, NoReflectionReducesToFriisAtLosDistance) {
  LinkParams l = ground_link();
  l.ground_reflection = 0.0;
  for (double d = 1.0; d < 1e6; d *= 3.7) {
    l.distance = d;
    LinkParams f = l;
    f.distance = two_ray_geometry(l).los_distance;
    EXPECT_LE(std::abs(two_ray_received_power(l) / friis_received_power(f) - 1.0), 1e-12);
  }
}

TEST(TwoRay, FarFieldApproximation) {
  // Beyond crossover: Pr -> Pt Gt Gr (ht hr)^2 / d^4.
  LinkParams l = ground_link();
  l.distance = 1000.0 * crossover_distance(l);
  const double approx = l.tx_power * std::pow(l.tx_height * l.rx_height, 2) / std::pow(l.distance, 4);
  EXPECT_NEAR(two_ray_received_power(l) / approx, 1.0, 1e-4);
}

TEST(TwoRay, SeparateGainsOnEachRay) {
  LinkParams l = ground_link();
  l.distance = 500.0;
  l.los_gain = 4.0;
  l.reflected_gain = 0.0;
  LinkParams f = l;
  f.distance = two_ray_geometry(l).los_distance;
  f.tx_gain = 4.0;
  EXPECT_NEAR(two_ray_received_power(l) / friis_received_power(f), 1.0, 1e-12);
}

TEST(Qpsk, GrayMapAndRoundTrip) {
  const std::vector<std::uint8_t> bits{0, 0, 0, 1, 1, 1, 1, 0};
  const auto s = qpsk_modulate(bits);
  const double a = std::numbers::sqrt2 / 2;
  EXPECT_EQ(s[0], IqSymbol(a, a));
  EXPECT_EQ(s[1], IqSymbol(a, -a));
  EXPECT_EQ(s[2], IqSymbol(-a, -a));
  EXPECT_EQ(s[3], IqSymbol(-a, a));
  for (const auto& x : s) EXPECT_NEAR(std::norm(x), 1.0, 1e-15);
  EXPECT_EQ(qpsk_demodulate(s), bits);
  // Neighbours around the circle differ in one bit.
  for (int i = 0; i < 4; ++i) {
    const int j = (i + 1) % 4;
    const int diff = (bits[2 * i] != bits[2 * j]) + (bits[2 * i + 1] != bits[2 * j + 1]);
    EXPECT_EQ(diff, 1);
  }
  EXPECT_THROW(qpsk_modulate({1, 0, 1}), DomainError);
}

TEST(Channel, NoiseVarianceMatchesEbN0) {
  const std::vector<IqSymbol> zeros(200000, IqSymbol(0.0, 0.0));
  FadingParams f;
  f.seed = 77;
  const double ebn0_db = 3.0;
  const auto y = apply_channel(zeros, f, ebn0_db);
  double var = 0.0;
  for (const auto& v : y) var += v.real() * v.real() + v.imag() * v.imag();
  var /= 2.0 * y.size();
  const double expect = 0.5 / from_db(ebn0_db) / 2.0;  // N0/2 with Eb = 1/2
  EXPECT_NEAR(var / expect, 1.0, 0.02);
}

TEST(Channel, FadingGainStatistics) {
  const std::vector<IqSymbol> ones(200000, IqSymbol(1.0, 0.0));
  const double inf = std::numeric_limits<double>::infinity();
  FadingParams ray{FadingKind::Rayleigh, 10.0, 3};
  const auto y = apply_channel(ones, ray, inf, Receiver::Raw);
  double power = 0.0;
  IqSymbol mean = 0.0;
  for (const auto& v : y) {
    power += std::norm(v);
    mean += v;
  }
  EXPECT_NEAR(power / y.size(), 1.0, 0.01);
  EXPECT_NEAR(std::abs(mean / static_cast<double>(y.size())), 0.0, 0.01);

  FadingParams ric{FadingKind::Rician, 10.0, 4};
  const auto z = apply_channel(ones, ric, inf, Receiver::Raw);
  mean = 0.0;
  power = 0.0;
  for (const auto& v : z) {
    mean += v;
    power += std::norm(v);
  }
  EXPECT_NEAR(mean.real() / z.size(), std::sqrt(10.0 / 11.0), 0.005);
  EXPECT_NEAR(power / z.size(), 1.0, 0.01);
}

TEST(Channel, CoherentReceiverUndoesNoiselessFading) {
  const std::vector<std::uint8_t> bits{0, 1, 1, 1, 0, 0, 1, 0};
  const auto s = qpsk_modulate(bits);
  FadingParams f{FadingKind::Rayleigh, 0.0, 8};
  const auto y = apply_channel(s, f, std::numeric_limits<double>::infinity());
  for (std::size_t i = 0; i < s.size(); ++i) EXPECT_LT(std::abs(y[i] - s[i]), 1e-12);
}

TEST(Ber, TheoryAtZeroDb) {
  // erfc(1) = 0.157299207050285...
  EXPECT_NEAR(ber_qpsk_awgn_theoretical(0.0), 0.0786496035251426, 1e-15);
  EXPECT_NEAR(ber_qpsk_rayleigh_theoretical(0.0), 0.5 * (1 - std::sqrt(0.5)), 1e-15);
  EXPECT_GT(ber_qpsk_rayleigh_theoretical(10.0), ber_qpsk_awgn_theoretical(10.0));
}

TEST(Ber, MonteCarloIndependentOfWorkerCount) {
  FadingParams f{FadingKind::Rician, 10.0, 0};
  MonteCarloOptions one{1u << 14, 1}, four{1u << 14, 4};
  const auto a = ber_monte_carlo(f, 4.0, 200000, 17, one);
  const auto b = ber_monte_carlo(f, 4.0, 200000, 17, four);
  EXPECT_EQ(a.n_errors, b.n_errors);
  EXPECT_EQ(a.n_bits, 200000u);
}

TEST(Ber, RayleighMonteCarloMatchesClosedForm) {
  FadingParams f{FadingKind::Rayleigh, 0.0, 0};
  for (double e : {0.0, 5.0, 10.0}) {
    const auto r = ber_monte_carlo(f, e, 400000, 23);
    const double p = ber_qpsk_rayleigh_theoretical(e);
    const double sd = std::sqrt(p * (1 - p) / r.n_bits);
    EXPECT_LT(std::abs(r.ber - p), 4 * sd) << e;
  }
}

TEST(Ber, RejectsTooFewBits) {
  EXPECT_THROW(ber_monte_carlo(FadingParams{}, 0.0, 5000, 1), DomainError);
  EXPECT_THROW(ber_monte_carlo(FadingParams{}, 0.0, 10001, 1), DomainError);
}
