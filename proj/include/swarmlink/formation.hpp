#pragma once

// Leader-follower formation keeping.
//
// The formation layer maps a RoleGraph (who follows whom, and how) to target
// poses; the movement layer turns a target pose into a ControlInput for the
// quadrotor model. Only horizontal formation geometry is prescribed; altitude
// is held by a plain thrust PD loop.

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <queue>
#include <set>
#include <vector>

#include "swarmlink/dynamics.hpp"
#include "swarmlink/error.hpp"

namespace swarmlink::formation {

using dynamics::ControlInput;
using dynamics::PidGains;
using dynamics::UavParams;
using dynamics::UavState;

struct Pose {
  Vec3 position = Vec3::Zero();
  double heading = 0.0;  ///< rad, (-pi, pi]
};

enum class FormationMode { FixedGlobalDifference, DoubleFixation };

struct FormationSpec {
  FormationMode mode = FormationMode::FixedGlobalDifference;
  Vec3 offset = Vec3::Zero();     ///< world frame (FGD) or leader frame (DF)
  double relative_heading = 0.0;  ///< DF only

  void validate() const {
    detail::require(offset.allFinite(), "FormationSpec: offset must be finite");
    detail::require(std::isfinite(relative_heading),
                    "FormationSpec: relative_heading must be finite");
  }
};

struct RoleEdge {
  int leader = 0;
  int follower = 0;
  FormationSpec spec;
};

struct RoleGraph {
  int root = 0;
  std::vector<RoleEdge> edges;

  /// Throws StructuralError unless the edges form a tree rooted at `root`.
  void validate() const {
    std::map<int, int> parent;
    for (const auto& e : edges) {
      e.spec.validate();
      if (e.follower == root)
        throw StructuralError("RoleGraph: root cannot follow another UAV",
                              {e.follower});
      if (!parent.emplace(e.follower, e.leader).second)
        throw StructuralError("RoleGraph: follower has more than one leader",
                              {e.follower});
    }
    for (const auto& [node, _] : parent) {
      std::set<int> seen{node};
      int cur = node;
      while (cur != root) {
        auto it = parent.find(cur);
        if (it == parent.end())
          throw StructuralError("RoleGraph: chain does not reach the root",
                                {node, cur});
        cur = it->second;
        if (!seen.insert(cur).second)
          throw StructuralError("RoleGraph: cycle detected", {node, cur});
      }
    }
  }
};

/// Target = leader position + fixed world-frame offset; heading copied.
inline Pose fgd_target(const Pose& leader, const FormationSpec& spec) {
  detail::require(spec.mode == FormationMode::FixedGlobalDifference,
                  "fgd_target: spec is not FixedGlobalDifference");
  return {leader.position + spec.offset, normalize_angle(leader.heading)};
}

/// Target = leader position + Rz(leader heading) * offset; the follower holds
/// heading leader + relative_heading so the relative bearing is fixed in the
/// leader's frame.
inline Pose df_target(const Pose& leader, const FormationSpec& spec) {
  detail::require(spec.mode == FormationMode::DoubleFixation,
                  "df_target: spec is not DoubleFixation");
  const double c = std::cos(leader.heading);
  const double s = std::sin(leader.heading);
  const Vec3 rotated(c * spec.offset.x() - s * spec.offset.y(),
                     s * spec.offset.x() + c * spec.offset.y(), spec.offset.z());
  return {leader.position + rotated,
          normalize_angle(leader.heading + spec.relative_heading)};
}

inline Pose target_for(const Pose& leader, const FormationSpec& spec) {
  return spec.mode == FormationMode::FixedGlobalDifference ? fgd_target(leader, spec)
                                                           : df_target(leader, spec);
}

/// Which pose a non-root leader contributes to its followers' targets.
enum class Reference {
  Planned,   ///< the leader's own target (ideal formation geometry)
  Observed,  ///< the leader's pose as given in the input map
};

/// Target pose for every follower, computed breadth-first from the root.
/// The result does not contain the root.
inline std::map<int, Pose> formation_targets(const std::map<int, Pose>& poses,
                                             const RoleGraph& roles,
                                             Reference reference = Reference::Planned) {
  roles.validate();
  auto root_it = poses.find(roles.root);
  if (root_it == poses.end())
    throw StructuralError("formation_targets: root pose missing", {roles.root});

  std::map<int, std::vector<const RoleEdge*>> children;
  for (const auto& e : roles.edges) children[e.leader].push_back(&e);
  for (auto& [_, list] : children)
    std::sort(list.begin(), list.end(),
              [](const RoleEdge* a, const RoleEdge* b) { return a->follower < b->follower; });

  std::map<int, Pose> targets;
  std::queue<std::pair<int, Pose>> frontier;
  frontier.emplace(roles.root, root_it->second);
  while (!frontier.empty()) {
    auto [id, pose] = frontier.front();
    frontier.pop();
    for (const RoleEdge* e : children[id]) {
      const Pose t = target_for(pose, e->spec);
      targets[e->follower] = t;
      if (reference == Reference::Planned) {
        frontier.emplace(e->follower, t);
      } else {
        auto it = poses.find(e->follower);
        if (it == poses.end() && !children[e->follower].empty())
          throw StructuralError("formation_targets: leader pose missing",
                                {e->follower});
        frontier.emplace(e->follower, it != poses.end() ? it->second : t);
      }
    }
  }
  return targets;
}

// ---------------------------------------------------------------------------
// Movement layer

struct MovementGains {
  PidGains position{1.0, 1.8, 0.0};  ///< outer loop, horizontal and vertical
  PidGains attitude{36.0, 12.0, 0.0};  ///< inner loop on pitch, roll and yaw
};

/// Commanded world-frame acceleration from PD on position error, with an
/// optional feed-forward of the target's velocity in the derivative term.
inline Vec3 position_command(const UavState& current, const Pose& target,
                             const PidGains& gains,
                             const Vec3& target_velocity = Vec3::Zero()) {
  const Vec3 error = target.position - current.position;
  const Vec3 error_rate = target_velocity - current.velocity;
  Vec3 cmd;
  for (int i = 0; i < 3; ++i)
    cmd[i] = dynamics::pid_control(error[i], error_rate[i], 0.0, gains);
  return cmd;
}

/// Cascaded PD: position error -> desired horizontal acceleration -> desired
/// pitch/roll (small-angle inversion of the translational equations at the
/// current yaw) -> moments. Yaw tracks the target heading. The integral gains
/// are not used; this controller is stateless.
inline ControlInput movement_step(const UavState& current, const Pose& target,
                                  const MovementGains& gains,
                                  const UavParams& params, double dt,
                                  const Vec3& target_velocity = Vec3::Zero()) {
  detail::require(dt > 0.0, "movement_step: dt must be > 0");
  using dynamics::kPitch;
  using dynamics::kRoll;
  using dynamics::kYaw;

  const Vec3 acc = position_command(current, target, gains.position, target_velocity);
  const double g = params.gravity;
  const double psi = current.euler[kYaw];
  constexpr double kMaxTilt = 0.5;
  const double pitch_des =
      std::clamp((acc.x() * std::cos(psi) + acc.y() * std::sin(psi)) / g, -kMaxTilt, kMaxTilt);
  const double roll_des =
      std::clamp((acc.x() * std::sin(psi) - acc.y() * std::cos(psi)) / g, -kMaxTilt, kMaxTilt);

  const PidGains& att = gains.attitude;
  ControlInput input;
  input.total_thrust = dynamics::altitude_thrust(current, params, acc.z());
  input.moments[kYaw] = dynamics::pid_control(
      normalize_angle(target.heading - psi), -current.euler_rates[kYaw], 0.0, att);
  input.moments[kPitch] = dynamics::pid_control(
      pitch_des - current.euler[kPitch], -current.euler_rates[kPitch], 0.0, att);
  input.moments[kRoll] = dynamics::pid_control(
      roll_des - current.euler[kRoll], -current.euler_rates[kRoll], 0.0, att);
  return input;
}

// ---------------------------------------------------------------------------
// Closed-loop scenario

/// Straight constant-velocity leader with followers flying the full model.
struct FormationScenario {
  RoleGraph roles;
  Pose leader_start;
  Vec3 leader_velocity = Vec3::Zero();
  std::map<int, UavState> followers;  ///< initial states
  UavParams params;
  MovementGains gains;
  double dt = 0.01;
  double duration = 30.0;
};

struct FormationTick {
  double time;
  std::map<int, Pose> poses;  ///< includes the root
};

struct FormationResult {
  std::vector<FormationTick> ticks;
  std::map<int, UavState> final_states;
  Pose final_leader;
  std::map<int, Pose> final_targets;
  /// Per follower: |actual - target| at the end of the run.
  std::map<int, double> final_error;
};

/// Advances leader and followers in lockstep. `record_every` controls how
/// often a tick is stored (1 = every step).
inline FormationResult simulate_formation(const FormationScenario& sc,
                                          int record_every = 10) {
  sc.roles.validate();
  sc.params.validate();
  detail::require(sc.dt > 0 && sc.duration > 0, "simulate_formation: dt and duration must be > 0");
  for (const auto& e : sc.roles.edges)
    if (!sc.followers.contains(e.follower))
      throw StructuralError("simulate_formation: follower without initial state",
                            {e.follower});

  const Vec3 leader_vel = sc.leader_velocity;
  std::map<int, Vec3> target_vel;
  for (const auto& e : sc.roles.edges) target_vel[e.follower] = leader_vel;

  FormationResult out;
  std::map<int, UavState> states = sc.followers;
  Pose leader = sc.leader_start;
  const auto steps = static_cast<long>(std::llround(sc.duration / sc.dt));
  std::map<int, Pose> targets;

  auto pose_of = [](const UavState& s) {
    return Pose{s.position, s.euler[dynamics::kYaw]};
  };
  auto record = [&](double t) {
    FormationTick tick{t, {}};
    tick.poses[sc.roles.root] = leader;
    for (const auto& [id, s] : states) tick.poses[id] = pose_of(s);
    out.ticks.push_back(std::move(tick));
  };

  record(0.0);
  for (long k = 1; k <= steps; ++k) {
    targets = formation_targets({{sc.roles.root, leader}}, sc.roles);
    for (auto& [id, s] : states) {
      auto it = targets.find(id);
      if (it == targets.end()) continue;
      const ControlInput u =
          movement_step(s, it->second, sc.gains, sc.params, sc.dt, target_vel[id]);
      s = dynamics::step_state(s, u, sc.params, sc.dt);
    }
    leader.position += leader_vel * sc.dt;
    if (k % record_every == 0 || k == steps) record(static_cast<double>(k) * sc.dt);
  }
  targets = formation_targets({{sc.roles.root, leader}}, sc.roles);
  out.final_states = states;
  out.final_leader = leader;
  out.final_targets = targets;
  for (const auto& [id, t] : targets)
    out.final_error[id] = (states.at(id).position - t.position).norm();
  return out;
}

}  // namespace swarmlink::formation
