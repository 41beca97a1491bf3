#include <cmath>
#include <numbers>

#include <Eigen/Geometry>
#include <gtest/gtest.h>

#include "swarmlink/formation.hpp"
#include "swarmlink/rng.hpp"

using namespace swarmlink;
using namespace swarmlink::formation;

namespace {

Pose random_pose(Rng& rng) {
  return {Vec3(rng.uniform(-100, 100), rng.uniform(-100, 100), rng.uniform(0, 50)),
          rng.uniform(-std::numbers::pi, std::numbers::pi)};
}

FormationSpec fgd(Vec3 off) { return {FormationMode::FixedGlobalDifference, off, 0.0}; }
FormationSpec df(Vec3 off, double rel = 0.0) { return {FormationMode::DoubleFixation, off, rel}; }

double angle_gap(double a, double b) { return std::abs(normalize_angle(a - b)); }

}  // namespace

TEST(Targets, FgdIsTranslationEquivariantAndIgnoresHeading) {
  Rng rng(21);
  for (int i = 0; i < 1000; ++i) {
    const Pose L = random_pose(rng);
    const Vec3 off(rng.uniform(-10, 10), rng.uniform(-10, 10), rng.uniform(-2, 2));
    const Vec3 shift(rng.uniform(-50, 50), rng.uniform(-50, 50), rng.uniform(-5, 5));
    const Pose t1 = fgd_target(L, fgd(off));
    const Pose t2 = fgd_target({L.position + shift, L.heading}, fgd(off));
    const Pose t3 = fgd_target({L.position, L.heading + 1.0}, fgd(off));
    EXPECT_LT((t2.position - (t1.position + shift)).norm(), 1e-9);
    EXPECT_LT((t3.position - t1.position).norm(), 1e-12);
    EXPECT_LT((t1.position - L.position - off).norm(), 1e-9);
  }
}

TEST(Targets, DfIsRotationEquivariant) {
  Rng rng(22);
  for (int i = 0; i < 1000; ++i) {
    const Pose L = random_pose(rng);
    const auto spec = df(Vec3(rng.uniform(-10, 10), rng.uniform(-10, 10), rng.uniform(-2, 2)),
                         rng.uniform(-1, 1));
    const double alpha = rng.uniform(-std::numbers::pi, std::numbers::pi);
    const Eigen::Matrix3d R = Eigen::AngleAxisd(alpha, Vec3::UnitZ()).toRotationMatrix();
    const Pose t1 = df_target(L, spec);
    const Pose t2 = df_target({R * L.position, L.heading + alpha}, spec);
    EXPECT_LT((t2.position - R * t1.position).norm(), 1e-9);
    EXPECT_LT(angle_gap(t2.heading, t1.heading + alpha), 1e-9);
    // The offset keeps its length and its bearing relative to the leader.
    EXPECT_NEAR((t1.position - L.position).norm(), spec.offset.norm(), 1e-9);
  }
}

TEST(Targets, DfWithZeroHeadingEqualsFgd) {
  const Pose L{Vec3(1, 2, 3), 0.0};
  EXPECT_LT((df_target(L, df(Vec3(-4, 1, 0))).position - fgd_target(L, fgd(Vec3(-4, 1, 0))).position).norm(),
            1e-15);
}

TEST(Targets, DfQuarterTurn) {
  const Pose t = df_target({Vec3::Zero(), std::numbers::pi / 2}, df(Vec3(-5, 0, 0), 0.25));
  EXPECT_LT((t.position - Vec3(0, -5, 0)).norm(), 1e-12);
  EXPECT_NEAR(t.heading, std::numbers::pi / 2 + 0.25, 1e-12);
}

TEST(Targets, ModeMismatchRejected) {
  EXPECT_THROW(fgd_target(Pose{}, df(Vec3::Zero())), DomainError);
  EXPECT_THROW(df_target(Pose{}, fgd(Vec3::Zero())), DomainError);
}

TEST(Roles, StructuralErrorsNameTheNodes) {
  RoleGraph cyc{0, {{0, 1, fgd(Vec3::Zero())}, {2, 3, fgd(Vec3::Zero())}, {3, 2, fgd(Vec3::Zero())}}};
  EXPECT_THROW(cyc.validate(), StructuralError);
  RoleGraph two{0, {{0, 1, fgd(Vec3::Zero())}, {0, 2, fgd(Vec3::Zero())}, {2, 1, fgd(Vec3::Zero())}}};
  try {
    two.validate();
    FAIL();
  } catch (const StructuralError& e) {
    EXPECT_EQ(e.nodes(), std::vector<int>{1});
  }
  RoleGraph root_follows{0, {{1, 0, fgd(Vec3::Zero())}}};
  EXPECT_THROW(root_follows.validate(), StructuralError);
  RoleGraph dangling{0, {{5, 6, fgd(Vec3::Zero())}}};
  EXPECT_THROW(dangling.validate(), StructuralError);
}

TEST(Roles, ChainedTargetsPlannedVsObserved) {
  RoleGraph g{0, {{0, 1, fgd(Vec3(-5, 0, 0))}, {1, 2, df(Vec3(-5, 0, 0))}}};
  std::map<int, Pose> poses{{0, {Vec3::Zero(), std::numbers::pi / 2}},
                            {1, {Vec3(-3, 0, 0), 0.0}}};
  const auto planned = formation_targets(poses, g);
  // 1 copies the leader heading (pi/2), so 2 sits 5 m behind along -y.
  EXPECT_LT((planned.at(1).position - Vec3(-5, 0, 0)).norm(), 1e-12);
  EXPECT_LT((planned.at(2).position - Vec3(-5, -5, 0)).norm(), 1e-12);
  const auto observed = formation_targets(poses, g, Reference::Observed);
  EXPECT_LT((observed.at(2).position - Vec3(-8, 0, 0)).norm(), 1e-12);
  EXPECT_FALSE(planned.contains(0));
  EXPECT_THROW(formation_targets({{1, Pose{}}}, g), StructuralError);
}

TEST(Movement, HoverAtTargetNeedsOnlyWeight) {
  UavParams p;
  UavState s;
  s.position = Vec3(1, 2, 3);
  const auto u = movement_step(s, {s.position, 0.0}, MovementGains{}, p, 0.01);
  EXPECT_DOUBLE_EQ(u.total_thrust, p.mass * p.gravity);
  EXPECT_EQ(u.moments, Vec3::Zero());
}

TEST(Movement, ReachesTargetOneMetreAhead) {
  UavParams p;
  UavState s;
  const Pose target{Vec3(1, 0, 0), 0.0};
  for (int k = 0; k < 3000; ++k)
    s = dynamics::step_state(s, movement_step(s, target, MovementGains{}, p, 0.01), p, 0.01);
  EXPECT_LT((s.position - target.position).norm(), 0.01);
}

TEST(Closed, ThreeFollowersHoldFgdFormation) {
  FormationScenario sc;
  sc.roles = {0, {{0, 1, fgd(Vec3(-5, 5, 0))}, {0, 2, fgd(Vec3(-5, -5, 0))},
                  {0, 3, fgd(Vec3(-10, 0, 0))}}};
  sc.leader_start = {Vec3(0, 0, 10), 0.0};
  sc.leader_velocity = Vec3(1, 0.5, 0);
  for (int id = 1; id <= 3; ++id) {
    UavState s;
    s.position = Vec3(-3.0 * id, 2.0 - id, 9.0 + 0.5 * id);
    sc.followers[id] = s;
  }
  sc.duration = 40.0;
  const auto r = simulate_formation(sc);
  for (const auto& e : sc.roles.edges)
    EXPECT_LT(r.final_error.at(e.follower), 0.02 * e.spec.offset.norm()) << e.follower;
  EXPECT_LT((r.final_leader.position - Vec3(40, 20, 10)).norm(), 1e-9);
}
