#pragma once

// Link-budget calculator for a ground-to-UAV S-band link.
//
// Two modes. PaperLiteral takes printed totals from the configuration and
// reproduces the worked example downstream of them. CorrectedSum recomputes
// every total from its line items and uses 10 log10 for the noise figure.
// Both modes attach the same discrepancy list comparing printed and computed
// values.
//
// Units: line items are relative dB applied to a transmit power in the
// same dB reference as the "Tx Power" item (10 log10 of watts in the default
// data, labelled dB), so EIRP, RSL and threshold share one reference.

#include <algorithm>
#include <cctype>
#include <cmath>
#include <numbers>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "swarmlink/channel.hpp"
#include "swarmlink/error.hpp"

namespace swarmlink::budget {

inline constexpr double kSpeedOfLight = 3.0e8;       ///< m/s, rounded
inline constexpr double kThermalNoiseDbmHz = -174.0;  ///< kT at ~290 K

enum class BudgetMode { PaperLiteral, CorrectedSum };

struct BudgetLineItem {
  std::string label;
  double value_db = 0.0;
};

struct AntennaSpec {
  double freq_low = 2.2e9;            ///< Hz
  double freq_high = 2.4e9;           ///< Hz; carrier used for path loss
  double gain_dbi = 3.0;
  double vswr = 1.5;
  double input_power = 50.0;          ///< W delivered to the antenna
  double input_impedance = 50.0;      ///< ohm
  double rx_threshold_dbm = -85.0;    ///< datasheet figure
  double link_length = 2000.0;        ///< m
  double operational_temp = 358.0;    ///< K, T_e
  double standard_temp = 298.0;       ///< K, T_o

  void validate() const {
    detail::require(vswr >= 1.0, "AntennaSpec: vswr >= 1");
    detail::require(freq_low > 0 && freq_low < freq_high,
                    "AntennaSpec: 0 < freq_low < freq_high");
    detail::require(input_impedance > 0, "AntennaSpec: input_impedance > 0");
    detail::require(input_power > 0, "AntennaSpec: input_power > 0");
    detail::require(link_length > 0, "AntennaSpec: link_length > 0");
    detail::require(operational_temp >= 0 && standard_temp > 0,
                    "AntennaSpec: operational_temp >= 0 and standard_temp > 0");
  }
};

/// Totals as printed in a source document; used as overrides in
/// PaperLiteral mode and as comparison points in the discrepancy report.
struct PrintedTotals {
  std::optional<double> eirp_db;
  std::optional<double> total_path_loss_db;
  std::optional<double> total_rx_gain_db;
  std::optional<double> noise_figure_db;
  std::optional<double> total_noise_power_dbm;
  std::vector<double> rsl_db;  ///< may appear more than once
};

struct BudgetItems {
  std::vector<BudgetLineItem> tx;
  std::vector<BudgetLineItem> losses;
  std::vector<BudgetLineItem> rx;
  std::optional<double> rx_threshold_db;
  double interference_margin_db = 0.0;
  std::optional<double> noise_bandwidth_hz;
  PrintedTotals printed;
};

struct Discrepancy {
  std::string quantity;
  double printed = 0.0;
  double computed = 0.0;
  std::string note;

  double delta() const { return printed - computed; }
};

struct DerivedQuantities {
  double wavelength_low = 0.0;   ///< m, at freq_low
  double wavelength_high = 0.0;  ///< m, at freq_high
  double path_loss_db = 0.0;     ///< free-space, carrier at freq_high, link_length
  double reflection_coefficient = 0.0;
  double incident_power_w = 0.0;
  double output_impedance_ohm = 0.0;
  double noise_figure_linear = 0.0;
  double noise_figure_db_20log = 0.0;      ///< 20 log10 F
  double noise_figure_db_corrected = 0.0;  ///< 10 log10 F
  double tx_power_db = 0.0;                ///< 10 log10 of input power in W
};

struct LinkBudget {
  BudgetMode mode = BudgetMode::CorrectedSum;
  std::vector<BudgetLineItem> tx_items, loss_items, rx_items;
  double eirp_db = 0.0;
  double total_path_loss_db = 0.0;
  double total_rx_gain_db = 0.0;
  double rsl_db = 0.0;
  double interference_margin_db = 0.0;
  double noise_figure_db = 0.0;
  double noise_bandwidth_hz = 0.0;
  double noise_power_dbm = 0.0;
  double rx_threshold_db = 0.0;
  double link_margin_db = 0.0;
  double snr_db = 0.0;  ///< RSL minus total noise power
  DerivedQuantities derived;
  std::vector<Discrepancy> discrepancies;
};

// ---------------------------------------------------------------------------
// RF relations

/// 20 log10(lambda / (4 pi d)); negative for any realistic link.
inline double path_loss_db(double wavelength, double distance) {
  detail::require(wavelength > 0 && distance > 0,
                  "path_loss_db: wavelength and distance must be > 0");
  return 20.0 * std::log10(wavelength / (4.0 * std::numbers::pi * distance));
}

inline double wavelength(double freq) {
  detail::require(freq > 0, "wavelength: frequency must be > 0");
  return kSpeedOfLight / freq;
}

struct NoiseFigure {
  double linear;
  double db;
};

/// F = 1 + Te/To. PaperLiteral expresses it as 20 log10 F, CorrectedSum as
/// 10 log10 F (F is a power ratio).
inline NoiseFigure noise_figure(double te, double to, BudgetMode mode) {
  detail::require(te >= 0 && to > 0, "noise_figure: requires te >= 0, to > 0");
  const double f = 1.0 + te / to;
  const double scale = mode == BudgetMode::PaperLiteral ? 20.0 : 10.0;
  return {f, scale * std::log10(f)};
}

inline double noise_power_dbm(double bandwidth, double noise_figure_db) {
  detail::require(bandwidth > 0, "noise_power_dbm: bandwidth must be > 0");
  return kThermalNoiseDbmHz + 10.0 * std::log10(bandwidth) + noise_figure_db;
}

/// |rho| = (VSWR - 1) / (VSWR + 1).
inline double vswr_to_reflection(double vswr) {
  detail::require(vswr >= 1.0, "vswr_to_reflection: vswr must be >= 1");
  return (vswr - 1.0) / (vswr + 1.0);
}

inline double reflection_to_vswr(double rho) {
  detail::require(std::abs(rho) < 1.0, "reflection_to_vswr: |rho| must be < 1");
  return (1.0 + std::abs(rho)) / (1.0 - std::abs(rho));
}

/// Pi from Pt = (1 - rho^2) Pi.
inline double incident_power(double delivered, double rho) {
  detail::require(std::abs(rho) < 1.0, "incident_power: |rho| must be < 1");
  return delivered / (1.0 - rho * rho);
}

/// Zo from rho = (Zi - Zo) / (Zi + Zo).
inline double output_impedance(double rho, double zi) {
  detail::require(std::abs(rho) < 1.0, "output_impedance: |rho| must be < 1");
  return zi * (1.0 - rho) / (1.0 + rho);
}

inline DerivedQuantities derive(const AntennaSpec& a) {
  DerivedQuantities d;
  d.wavelength_low = wavelength(a.freq_low);
  d.wavelength_high = wavelength(a.freq_high);
  d.path_loss_db = path_loss_db(d.wavelength_high, a.link_length);
  d.reflection_coefficient = vswr_to_reflection(a.vswr);
  d.incident_power_w = incident_power(a.input_power, d.reflection_coefficient);
  d.output_impedance_ohm = output_impedance(d.reflection_coefficient, a.input_impedance);
  const auto amplitude = noise_figure(a.operational_temp, a.standard_temp, BudgetMode::PaperLiteral);
  const auto corrected =
      noise_figure(a.operational_temp, a.standard_temp, BudgetMode::CorrectedSum);
  d.noise_figure_linear = amplitude.linear;
  d.noise_figure_db_20log = amplitude.db;
  d.noise_figure_db_corrected = corrected.db;
  d.tx_power_db = 10.0 * std::log10(a.input_power);
  return d;
}

// ---------------------------------------------------------------------------
// Budget assembly

namespace internal {

inline std::string normalize_label(std::string_view s) {
  std::string out;
  for (char c : s)
    if (std::isalnum(static_cast<unsigned char>(c)))
      out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  return out;
}

inline const BudgetLineItem* find_item(const std::vector<BudgetLineItem>& items,
                                       std::string_view label) {
  const auto key = normalize_label(label);
  for (const auto& it : items)
    if (normalize_label(it.label) == key) return &it;
  return nullptr;
}

inline double sum(const std::vector<BudgetLineItem>& items) {
  double s = 0.0;
  for (const auto& it : items) s += it.value_db;
  return s;
}

}  // namespace internal

/// Differences below this are treated as rounding in printed figures.
inline constexpr double kDiscrepancyTolerance = 0.005;

inline LinkBudget compute_budget(const AntennaSpec& antenna, const BudgetItems& items,
                                 BudgetMode mode) {
  antenna.validate();
  std::vector<std::string> missing;
  if (!internal::find_item(items.tx, "Tx Power")) missing.push_back("tx: Tx Power");
  if (!internal::find_item(items.tx, "Tx Gain")) missing.push_back("tx: Tx Gain");
  if (!internal::find_item(items.losses, "Path Loss")) missing.push_back("losses: Path Loss");
  if (!internal::find_item(items.rx, "Rx Gain")) missing.push_back("rx: Rx Gain");
  if (!items.rx_threshold_db) missing.push_back("rx_threshold_db");
  if (!items.noise_bandwidth_hz) missing.push_back("noise_bandwidth_hz");
  if (!missing.empty()) {
    std::string msg = "compute_budget: missing required item(s):";
    for (const auto& m : missing) msg += " " + m + ";";
    throw ConfigError(msg);
  }
  detail::require(*items.noise_bandwidth_hz > 0, "compute_budget: noise bandwidth must be > 0");

  const bool literal = mode == BudgetMode::PaperLiteral;
  const PrintedTotals& printed = items.printed;

  LinkBudget b;
  b.mode = mode;
  b.tx_items = items.tx;
  b.loss_items = items.losses;
  b.rx_items = items.rx;
  b.derived = derive(antenna);

  const double eirp_sum = internal::sum(items.tx);
  const double loss_sum = internal::sum(items.losses);
  const double rx_sum = internal::sum(items.rx);

  b.eirp_db = literal && printed.eirp_db ? *printed.eirp_db : eirp_sum;
  b.total_path_loss_db =
      literal && printed.total_path_loss_db ? *printed.total_path_loss_db : loss_sum;
  b.total_rx_gain_db =
      literal && printed.total_rx_gain_db ? *printed.total_rx_gain_db : rx_sum;
  b.rsl_db = b.eirp_db + b.total_rx_gain_db + b.total_path_loss_db;
  b.rx_threshold_db = *items.rx_threshold_db;
  b.link_margin_db = b.eirp_db + b.total_path_loss_db + b.total_rx_gain_db - b.rx_threshold_db;

  b.interference_margin_db = items.interference_margin_db;
  b.noise_bandwidth_hz = *items.noise_bandwidth_hz;
  b.noise_figure_db = literal ? printed.noise_figure_db.value_or(b.derived.noise_figure_db_20log)
                              : b.derived.noise_figure_db_corrected;
  b.noise_power_dbm = noise_power_dbm(b.noise_bandwidth_hz, b.noise_figure_db);
  b.snr_db = b.rsl_db - b.noise_power_dbm;

  // Discrepancies: printed figures against the honest computation.
  auto flag = [&](std::string quantity, double shown, double computed, std::string note) {
    if (std::abs(shown - computed) > kDiscrepancyTolerance)
      b.discrepancies.push_back({std::move(quantity), shown, computed, std::move(note)});
  };
  if (printed.eirp_db)
    flag("EIRP", *printed.eirp_db, eirp_sum, "printed EIRP vs sum of Tx items");
  if (printed.total_path_loss_db)
    flag("Total Path Loss", *printed.total_path_loss_db, loss_sum,
         "printed total vs sum of loss items");
  if (printed.total_rx_gain_db)
    flag("Total Rx Gain", *printed.total_rx_gain_db, rx_sum,
         "printed total vs sum of Rx items");
  if (const auto* pl = internal::find_item(items.losses, "Path Loss"))
    flag("Path Loss", pl->value_db, b.derived.path_loss_db,
         "path-loss item vs free-space loss at the carrier and link length");
  if (const auto* g = internal::find_item(items.tx, "Tx Gain"))
    flag("Tx Gain", g->value_db, antenna.gain_dbi,
         "Tx gain item vs antenna gain in dBi (the item is the linear ratio)");
  if (const auto* g = internal::find_item(items.rx, "Rx Gain"))
    flag("Rx Gain", g->value_db, antenna.gain_dbi,
         "Rx gain item vs antenna gain in dBi (the item is the linear ratio)");
  const double printed_chain = printed.eirp_db.value_or(eirp_sum) +
                               printed.total_rx_gain_db.value_or(rx_sum) +
                               printed.total_path_loss_db.value_or(loss_sum);
  for (double rsl : printed.rsl_db)
    flag("RSL", rsl, printed_chain, "printed RSL vs EIRP + Rx gain + path loss as printed");
  flag("Rx Threshold", antenna.rx_threshold_dbm, *items.rx_threshold_db,
       "antenna datasheet threshold vs budget threshold");
  if (printed.noise_figure_db)
    flag("Noise Figure", *printed.noise_figure_db, b.derived.noise_figure_db_20log,
         "printed noise figure vs 20 log10(1 + Te/To)");
  if (printed.total_noise_power_dbm)
    flag("Total Noise Power", *printed.total_noise_power_dbm,
         noise_power_dbm(b.noise_bandwidth_hz,
                         printed.noise_figure_db.value_or(b.derived.noise_figure_db_20log)),
         "printed noise power vs -174 + 10 log10(B) + NF");
  return b;
}

/// The worked S-band example: 50 W into a 3 dBi antenna over a ~2 km link.
inline AntennaSpec reference_antenna() { return AntennaSpec{}; }

inline BudgetItems reference_items() {
  BudgetItems it;
  it.tx = {{"Tx Gain", 2.0}, {"Tx Loss", -0.1}, {"Tx Power", 16.989}, {"Radome Loss", -0.1}};
  it.losses = {{"Path Loss", -101.06},
               {"Tx Pointing Error", -0.5},
               {"Rain Loss", -1.0},
               {"Multipath", -1.0},
               {"Atmospheric Loss", -0.1}};
  it.rx = {{"Rx Gain", 2.0},
           {"Polarisation Loss", -0.1},
           {"Rx Loss", -0.1},
           {"Rx Pointing Loss", -0.5}};
  it.rx_threshold_db = -88.0;
  it.interference_margin_db = -1.0;
  it.noise_bandwidth_hz = 25e6;
  it.printed.eirp_db = 18.789;
  it.printed.total_path_loss_db = -101.66;
  it.printed.total_rx_gain_db = 1.1;
  it.printed.noise_figure_db = 6.84;
  it.printed.total_noise_power_dbm = -93.18;
  it.printed.rsl_db = {-81.171, -81.771};
  return it;
}

// ---------------------------------------------------------------------------
// BER against distance

enum class BerFormula {
  Standard,      ///< 1/2 erfc(sqrt(Eb/N0))
  PaperLiteral,  ///< 1/2 sqrt(erfc(Eb/N0))
};

struct BerDistancePoint {
  double distance_m;
  double pr_dbm;
  double ebn0_db;
  double ber;
};

/// For each distance: Friis received power, Eb = Pr / Rb, N0 = Pn / B, BER.
/// `noise_bandwidth` defaults to the data rate, in which case Eb/N0 equals
/// the received SNR.
inline std::vector<BerDistancePoint> ber_vs_distance(
    const channel::LinkParams& link, double data_rate, double noise_power_dbm,
    const std::vector<double>& distances, BerFormula formula = BerFormula::Standard,
    std::optional<double> noise_bandwidth = std::nullopt) {
  detail::require(data_rate > 0, "ber_vs_distance: data_rate must be > 0");
  const double bw = noise_bandwidth.value_or(data_rate);
  detail::require(bw > 0, "ber_vs_distance: noise bandwidth must be > 0");
  std::vector<BerDistancePoint> out;
  out.reserve(distances.size());
  for (double d : distances) {
    detail::require(d > 0, "ber_vs_distance: distances must be > 0");
    channel::LinkParams l = link;
    l.distance = d;
    const double pr_w = channel::friis_received_power(l);
    const double pr_dbm = channel::watts_to_dbm(pr_w);
    const double ebn0_db = pr_dbm - noise_power_dbm + 10.0 * std::log10(bw / data_rate);
    const double ebn0 = channel::from_db(ebn0_db);
    const double ber = formula == BerFormula::Standard
                           ? 0.5 * std::erfc(std::sqrt(ebn0))
                           : 0.5 * std::sqrt(std::erfc(ebn0));
    out.push_back({d, pr_dbm, ebn0_db, ber});
  }
  return out;
}

/// n log-spaced points from lo to hi inclusive.
inline std::vector<double> log_space(double lo, double hi, std::size_t n) {
  detail::require(lo > 0 && hi > lo && n >= 2, "log_space: need 0 < lo < hi, n >= 2");
  std::vector<double> v(n);
  const double a = std::log10(lo), b = std::log10(hi);
  for (std::size_t i = 0; i < n; ++i)
    v[i] = std::pow(10.0, a + (b - a) * static_cast<double>(i) / static_cast<double>(n - 1));
  return v;
}

/// Default BER-vs-distance scenario: the reference 50 W S-band link with
/// 3 dBi antennas at both ends, -90 dBm noise, swept over 10 km .. 1000 km.
struct BerDistanceScenario {
  channel::LinkParams link = [] {
    channel::LinkParams l;
    l.tx_power = 50.0;
    l.tx_gain = 2.0;
    l.rx_gain = 2.0;
    l.wavelength = 0.125;
    return l;
  }();
  double data_rate = 1e6;
  double noise_power_dbm = -90.0;
  double min_distance = 1e4;
  double max_distance = 1e6;
  std::size_t points = 201;
};

}  // namespace swarmlink::budget
