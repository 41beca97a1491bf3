#include <algorithm>
#include <cmath>

#include <gtest/gtest.h>

#include "swarmlink/linkbudget.hpp"

using namespace swarmlink;
using namespace swarmlink::budget;

namespace {

bool flagged(const LinkBudget& b, const std::string& q) {
  return std::any_of(b.discrepancies.begin(), b.discrepancies.end(),
                     [&](const Discrepancy& d) { return d.quantity == q; });
}

const Discrepancy& get(const LinkBudget& b, const std::string& q) {
  return *std::find_if(b.discrepancies.begin(), b.discrepancies.end(),
                       [&](const Discrepancy& d) { return d.quantity == q; });
}

}  // namespace

TEST(Rf, ReflectionAndImpedance) {
  EXPECT_DOUBLE_EQ(vswr_to_reflection(1.5), 0.2);
  EXPECT_DOUBLE_EQ(vswr_to_reflection(1.0), 0.0);
  EXPECT_NEAR(reflection_to_vswr(vswr_to_reflection(3.7)), 3.7, 1e-12);
  EXPECT_NEAR(incident_power(50.0, 0.2), 50.0 / 0.96, 1e-12);
  EXPECT_NEAR(output_impedance(0.2, 50.0), 100.0 / 3.0, 1e-12);
  EXPECT_THROW(vswr_to_reflection(0.5), DomainError);
}

TEST(Rf, NoiseFigureConventions) {
  const auto lit = noise_figure(358, 298, BudgetMode::PaperLiteral);
  const auto cor = noise_figure(358, 298, BudgetMode::CorrectedSum);
  EXPECT_NEAR(lit.linear, 1 + 358.0 / 298.0, 1e-15);
  EXPECT_NEAR(lit.db, 20 * std::log10(lit.linear), 1e-12);
  EXPECT_NEAR(cor.db, 10 * std::log10(cor.linear), 1e-12);
}

TEST(Rf, NoisePowerFormula) {
  EXPECT_NEAR(noise_power_dbm(25e6, 6.84), -174 + 10 * std::log10(25e6) + 6.84, 1e-12);
}

TEST(Rf, PathLossAndWavelength) {
  EXPECT_DOUBLE_EQ(wavelength(2.4e9), 0.125);
  EXPECT_NEAR(path_loss_db(0.125, 2000.0), -20 * std::log10(4 * std::numbers::pi * 2000 / 0.125),
              1e-12);
}

TEST(Budget, PaperLiteralReproducesPrintedTotals) {
  const auto b = compute_budget(reference_antenna(), reference_items(), BudgetMode::PaperLiteral);
  EXPECT_NEAR(b.eirp_db, 18.789, 1e-9);
  EXPECT_NEAR(b.rsl_db, -81.771, 1e-9);
  EXPECT_NEAR(b.link_margin_db, 6.229, 1e-9);
  EXPECT_NEAR(b.noise_power_dbm, -93.18, 0.01);
  EXPECT_EQ(b.noise_figure_db, 6.84);
}

TEST(Budget, CorrectedSumUsesItemsOnly) {
  const auto b = compute_budget(reference_antenna(), reference_items(), BudgetMode::CorrectedSum);
  EXPECT_NEAR(b.total_path_loss_db, -103.66, 1e-9);
  EXPECT_NEAR(b.total_rx_gain_db, 1.3, 1e-9);
  EXPECT_NEAR(b.eirp_db, 18.789, 1e-9);
  EXPECT_NEAR(b.link_margin_db, 18.789 - 103.66 + 1.3 + 88.0, 1e-9);
  EXPECT_NEAR(b.noise_figure_db, 10 * std::log10(1 + 358.0 / 298.0), 1e-12);
}

TEST(Budget, DiscrepancyReportNamesEveryConflict) {
  for (auto mode : {BudgetMode::PaperLiteral, BudgetMode::CorrectedSum}) {
    const auto b = compute_budget(reference_antenna(), reference_items(), mode);
    EXPECT_TRUE(flagged(b, "Total Path Loss"));
    EXPECT_NEAR(get(b, "Total Path Loss").printed, -101.66, 1e-12);
    EXPECT_NEAR(get(b, "Total Path Loss").computed, -103.66, 1e-9);
    EXPECT_NEAR(get(b, "Path Loss").computed, -106.067, 1e-3);
    EXPECT_EQ(get(b, "Rx Threshold").printed, -85.0);
    EXPECT_EQ(get(b, "Rx Threshold").computed, -88.0);
    EXPECT_TRUE(flagged(b, "Total Rx Gain"));
    EXPECT_TRUE(flagged(b, "RSL"));
    EXPECT_FALSE(flagged(b, "EIRP"));
    EXPECT_FALSE(flagged(b, "Total Noise Power"));
  }
}

TEST(Budget, MissingItemsListedTogether) {
  BudgetItems it = reference_items();
  it.tx.erase(it.tx.begin());  // Tx Gain
  it.noise_bandwidth_hz.reset();
  try {
    compute_budget(reference_antenna(), it, BudgetMode::CorrectedSum);
    FAIL();
  } catch (const ConfigError& e) {
    const std::string w = e.what();
    EXPECT_NE(w.find("Tx Gain"), std::string::npos);
    EXPECT_NE(w.find("noise_bandwidth_hz"), std::string::npos);
  }
}

TEST(Budget, LabelMatchingIgnoresCaseAndPunctuation) {
  BudgetItems it = reference_items();
  it.tx[2].label = "tx-power";
  EXPECT_NO_THROW(compute_budget(reference_antenna(), it, BudgetMode::CorrectedSum));
}

TEST(Budget, MarginIsRslMinusThreshold) {
  BudgetItems it = reference_items();
  it.printed = {};
  for (double thr : {-95.0, -88.0, -70.0}) {
    it.rx_threshold_db = thr;
    const auto b = compute_budget(reference_antenna(), it, BudgetMode::CorrectedSum);
    EXPECT_NEAR(b.link_margin_db, b.rsl_db - thr, 1e-12);
  }
}

TEST(BerDistance, MonotoneAndConsistent) {
  BerDistanceScenario sc;
  const auto d = log_space(sc.min_distance, sc.max_distance, sc.points);
  EXPECT_DOUBLE_EQ(d.front(), sc.min_distance);
  EXPECT_NEAR(d.back(), sc.max_distance, 1e-6);
  const auto pts = ber_vs_distance(sc.link, sc.data_rate, sc.noise_power_dbm, d);
  for (std::size_t i = 1; i < pts.size(); ++i) {
    EXPECT_GE(pts[i].ber, pts[i - 1].ber);
    EXPECT_NEAR(pts[i - 1].pr_dbm - pts[i].pr_dbm,
                20 * std::log10(pts[i].distance_m / pts[i - 1].distance_m), 1e-9);
  }
  EXPECT_NEAR(pts[0].ebn0_db, pts[0].pr_dbm - sc.noise_power_dbm, 1e-12);
}

TEST(BerDistance, BandwidthShiftsEbN0) {
  channel::LinkParams l;
  const auto a = ber_vs_distance(l, 1e6, -90, {100.0});
  const auto b = ber_vs_distance(l, 1e6, -90, {100.0}, BerFormula::Standard, 1e7);
  EXPECT_NEAR(b[0].ebn0_db - a[0].ebn0_db, 10.0, 1e-12);
}

TEST(BerDistance, LiteralFormula) {
  channel::LinkParams l;
  const auto p = ber_vs_distance(l, 1e6, -90, {1000.0}, BerFormula::PaperLiteral);
  EXPECT_NEAR(p[0].ber, 0.5 * std::sqrt(std::erfc(channel::from_db(p[0].ebn0_db))), 1e-15);
}
