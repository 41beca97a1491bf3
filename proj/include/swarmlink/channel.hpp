#pragma once

// Physical layer: Friis and two-ray ground-reflection path loss, Gray-coded
// QPSK, AWGN / Rician / Rayleigh channels and bit-error-rate estimation.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <optional>
#include <thread>
#include <vector>

#include "swarmlink/error.hpp"
#include "swarmlink/rng.hpp"

namespace swarmlink::channel {

using IqSymbol = std::complex<double>;

inline double to_db(double linear) { return 10.0 * std::log10(linear); }
inline double from_db(double db) { return std::pow(10.0, db / 10.0); }
inline double watts_to_dbm(double w) { return to_db(w) + 30.0; }
inline double dbm_to_watts(double dbm) { return from_db(dbm - 30.0); }

struct LinkParams {
  double tx_power = 1.0;     ///< W
  double tx_gain = 1.0;      ///< linear
  double rx_gain = 1.0;      ///< linear
  double wavelength = 0.125; ///< m
  double distance = 1.0;     ///< m, horizontal separation
  double tx_height = 100.0;  ///< m
  double rx_height = 100.0;  ///< m
  double ground_reflection = -1.0;
  /// Gain product on the direct and reflected path; both default to tx*rx.
  std::optional<double> los_gain;
  std::optional<double> reflected_gain;

  double los_path_gain() const { return los_gain.value_or(tx_gain * rx_gain); }
  double reflected_path_gain() const {
    return reflected_gain.value_or(tx_gain * rx_gain);
  }

  void validate() const {
    detail::require(tx_power > 0 && tx_gain > 0 && rx_gain > 0,
                    "LinkParams: power and gains must be > 0");
    detail::require(wavelength > 0, "LinkParams: wavelength must be > 0");
    detail::require(std::abs(ground_reflection) <= 1.0,
                    "LinkParams: |ground_reflection| must be <= 1");
  }
};

/// Pr = Pt Gt Gr lambda^2 / (4 pi d)^2, in watts.
inline double friis_received_power(const LinkParams& link) {
  detail::require(link.distance > 0, "friis_received_power: distance must be > 0");
  const double f = link.wavelength / (4.0 * std::numbers::pi * link.distance);
  return link.tx_power * link.tx_gain * link.rx_gain * f * f;
}

struct TwoRayGeometry {
  double los_distance;
  double reflected_distance;
  double path_difference;  ///< d_ref - d_los, computed without cancellation
  double phase;            ///< 2 pi (d_ref - d_los) / lambda
};

inline TwoRayGeometry two_ray_geometry(const LinkParams& link) {
  const double d = link.distance;
  const double dh = link.tx_height - link.rx_height;
  const double sh = link.tx_height + link.rx_height;
  TwoRayGeometry g{};
  g.los_distance = std::sqrt(d * d + dh * dh);
  g.reflected_distance = std::sqrt(d * d + sh * sh);
  // d_ref^2 - d_los^2 = 4 ht hr
  g.path_difference = 4.0 * link.tx_height * link.rx_height /
                      (g.reflected_distance + g.los_distance);
  g.phase = 2.0 * std::numbers::pi * g.path_difference / link.wavelength;
  return g;
}

/// Coherent sum of the direct ray and the ground-reflected ray:
///   Pr = Pt (lambda / 4 pi)^2 | sqrt(G_los)/d_los + R e^{-j phi} sqrt(G_ref)/d_ref |^2
inline double two_ray_received_power(const LinkParams& link) {
  detail::require(link.distance > 0, "two_ray_received_power: distance must be > 0");
  detail::require(link.tx_height > 0 && link.rx_height > 0,
                  "two_ray_received_power: heights must be > 0");
  const TwoRayGeometry g = two_ray_geometry(link);
  const std::complex<double> direct = std::sqrt(link.los_path_gain()) / g.los_distance;
  const std::complex<double> reflected =
      link.ground_reflection * std::polar(1.0, -g.phase) *
      (std::sqrt(link.reflected_path_gain()) / g.reflected_distance);
  const double k = link.wavelength / (4.0 * std::numbers::pi);
  return link.tx_power * k * k * std::norm(direct + reflected);
}

/// Distance beyond which the two-ray model falls off as 1/d^4.
inline double crossover_distance(const LinkParams& link) {
  return 4.0 * std::numbers::pi * link.tx_height * link.rx_height / link.wavelength;
}

// ---------------------------------------------------------------------------
// QPSK

/// Gray map, first bit on I, second on Q, bit 0 -> +1/sqrt2, bit 1 -> -1/sqrt2:
///   00 -> (+,+)   01 -> (+,-)   11 -> (-,-)   10 -> (-,+)
inline std::vector<IqSymbol> qpsk_modulate(const std::vector<std::uint8_t>& bits) {
  detail::require(bits.size() % 2 == 0, "qpsk_modulate: bit count must be even");
  constexpr double a = std::numbers::sqrt2 / 2.0;
  std::vector<IqSymbol> out;
  out.reserve(bits.size() / 2);
  for (std::size_t i = 0; i < bits.size(); i += 2)
    out.emplace_back(bits[i] ? -a : a, bits[i + 1] ? -a : a);
  return out;
}

/// Sign decisions; equivalent to nearest-constellation-point decoding.
inline std::vector<std::uint8_t> qpsk_demodulate(const std::vector<IqSymbol>& symbols) {
  std::vector<std::uint8_t> bits;
  bits.reserve(symbols.size() * 2);
  for (const auto& s : symbols) {
    bits.push_back(s.real() < 0.0 ? 1 : 0);
    bits.push_back(s.imag() < 0.0 ? 1 : 0);
  }
  return bits;
}

// ---------------------------------------------------------------------------
// Channels

enum class FadingKind { Awgn, Rician, Rayleigh };

struct FadingParams {
  FadingKind kind = FadingKind::Awgn;
  double rician_k = 10.0;  ///< linear LOS/scatter power ratio; 10 dB default
  std::uint64_t seed = 1;

  void validate() const {
    detail::require(rician_k >= 0, "FadingParams: rician_k must be >= 0");
  }
};

enum class Receiver {
  Coherent,  ///< divide by the known channel gain (perfect CSI)
  Raw,       ///< h s + n as seen at the antenna
};

/// Unit-energy QPSK symbols carry Eb = 1/2; each noise dimension gets
/// variance N0/2 with N0 = Eb / (Eb/N0). Fading gains are flat per symbol:
///   h = sqrt(K/(K+1)) + sqrt(1/(K+1)) CN(0,1),  K = 0 for Rayleigh.
/// Draw order per symbol: (fading re, fading im) if faded, then (noise re, noise im).
inline std::vector<IqSymbol> apply_channel(const std::vector<IqSymbol>& symbols,
                                           const FadingParams& fading, double ebn0_db,
                                           Receiver receiver = Receiver::Coherent) {
  fading.validate();
  Rng rng(fading.seed);
  const double ebn0 = from_db(ebn0_db);
  const double noise_sd = std::isinf(ebn0) ? 0.0 : std::sqrt(0.5 / ebn0 / 2.0);

  double los = 1.0, scatter = 0.0;
  if (fading.kind == FadingKind::Rician && std::isfinite(fading.rician_k)) {
    los = std::sqrt(fading.rician_k / (fading.rician_k + 1.0));
    scatter = std::sqrt(1.0 / (fading.rician_k + 1.0));
  } else if (fading.kind == FadingKind::Rayleigh) {
    los = 0.0;
    scatter = 1.0;
  }
  const bool faded = fading.kind != FadingKind::Awgn;
  const double scatter_sd = scatter * std::numbers::sqrt2 / 2.0;

  std::vector<IqSymbol> out;
  out.reserve(symbols.size());
  for (const auto& s : symbols) {
    IqSymbol h = 1.0;
    if (faded) {
      const double hr = rng.normal();
      const double hi = rng.normal();
      h = IqSymbol(los + scatter_sd * hr, scatter_sd * hi);
    }
    const double nr = rng.normal();
    const double ni = rng.normal();
    IqSymbol y = h * s + IqSymbol(noise_sd * nr, noise_sd * ni);
    if (receiver == Receiver::Coherent && faded) y /= h;
    out.push_back(y);
  }
  return out;
}

/// 1/2 erfc(sqrt(Eb/N0)); std::erfc is accurate to a few ulp.
inline double ber_qpsk_awgn_theoretical(double ebn0_db) {
  return 0.5 * std::erfc(std::sqrt(from_db(ebn0_db)));
}

/// Closed-form average BER of coherent Gray QPSK over flat Rayleigh fading.
inline double ber_qpsk_rayleigh_theoretical(double ebn0_db) {
  const double g = from_db(ebn0_db);
  return 0.5 * (1.0 - std::sqrt(g / (1.0 + g)));
}

struct BerResult {
  double ber = 0.0;
  std::uint64_t n_errors = 0;
  std::uint64_t n_bits = 0;
};

struct MonteCarloOptions {
  std::uint64_t shard_bits = 1u << 16;  ///< even
  unsigned workers = 1;
};

/// Random bits -> QPSK -> channel -> decisions, in independent shards.
/// Shard s draws bits from derive_seed(seed, "bits", s) and channel noise from
/// derive_seed(seed, "channel", s), so the result depends on
/// (seed, n_bits, shard_bits) only, never on the worker count.
inline BerResult ber_monte_carlo(const FadingParams& fading, double ebn0_db,
                                 std::uint64_t n_bits, std::uint64_t seed,
                                 MonteCarloOptions options = {}) {
  detail::require(n_bits % 2 == 0 && n_bits >= 10000,
                  "ber_monte_carlo: n_bits must be even and >= 10^4");
  detail::require(options.shard_bits >= 2 && options.shard_bits % 2 == 0,
                  "ber_monte_carlo: shard_bits must be even");
  const std::uint64_t n_shards = (n_bits + options.shard_bits - 1) / options.shard_bits;
  std::vector<std::uint64_t> errors(n_shards, 0);

  auto run_shard = [&](std::uint64_t s) {
    const std::uint64_t begin = s * options.shard_bits;
    const std::uint64_t len = std::min(options.shard_bits, n_bits - begin);
    Rng bit_rng(derive_seed(seed, "bits", s));
    std::vector<std::uint8_t> bits(len);
    for (auto& b : bits) b = static_cast<std::uint8_t>(bit_rng.next_u64() >> 63);
    FadingParams f = fading;
    f.seed = derive_seed(seed, "channel", s);
    const auto decided = qpsk_demodulate(apply_channel(qpsk_modulate(bits), f, ebn0_db));
    std::uint64_t e = 0;
    for (std::size_t i = 0; i < len; ++i) e += decided[i] != bits[i];
    errors[s] = e;
  };

  const unsigned workers = std::max(1u, options.workers);
  if (workers == 1) {
    for (std::uint64_t s = 0; s < n_shards; ++s) run_shard(s);
  } else {
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < workers; ++w)
      pool.emplace_back([&, w] {
        for (std::uint64_t s = w; s < n_shards; s += workers) run_shard(s);
      });
  }

  BerResult r;
  r.n_bits = n_bits;
  for (auto e : errors) r.n_errors += e;
  r.ber = n_bits ? static_cast<double>(r.n_errors) / static_cast<double>(n_bits) : 0.0;
  return r;
}

}  // namespace swarmlink::channel
