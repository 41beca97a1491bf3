#pragma once

// Quadrotor rigid-body model (X-flyer) with rotor thrust, rotor spin-up and
// PD/PID control.
//
// Frame and angle conventions: position is expressed in a fixed inertial
// frame anchored at the ground station, z up. Euler angles are stored as
// (yaw psi, pitch theta, roll phi), the same order as the generalized
// coordinate q = (x, y, z, psi, theta, phi).

#include <array>
#include <cmath>
#include <numbers>

#include <Eigen/Core>

#include "swarmlink/error.hpp"

namespace swarmlink {

using Vec3 = Eigen::Vector3d;
using Vec4 = Eigen::Vector4d;

/// Wraps an angle into (-pi, pi].
inline double normalize_angle(double angle) {
  constexpr double two_pi = 2.0 * std::numbers::pi;
  double a = std::fmod(angle, two_pi);
  if (a <= -std::numbers::pi) a += two_pi;
  if (a > std::numbers::pi) a -= two_pi;
  return a;
}

namespace dynamics {

enum Axis : int { kYaw = 0, kPitch = 1, kRoll = 2 };

struct UavState {
  Vec3 position = Vec3::Zero();
  Vec3 velocity = Vec3::Zero();
  Vec3 euler = Vec3::Zero();        ///< (yaw, pitch, roll), rad
  Vec3 euler_rates = Vec3::Zero();  ///< rad/s
  Vec4 rotor_speeds = Vec4::Zero(); ///< rad/s, non-negative

  bool operator==(const UavState&) const = default;
};

/// Physical constants of one airframe.
///
/// `air_density` enters rotor_spin_dynamics through the literal drag torque
/// 0.5 * rho * v^2, which carries neither the disc area nor a drag coefficient
/// and is therefore not dimensionally a torque. `rotor_disc_area` is stored
/// for completeness but that expression does not use it.
struct UavParams {
  double mass = 1.0;             ///< kg
  double gravity = 9.81;         ///< m/s^2
  double thrust_coeff = 1e-5;    ///< N s^2 / rad^2
  double rotor_inertia = 6e-5;   ///< kg m^2
  double air_density = 1.225;    ///< kg/m^3
  double rotor_disc_area = 0.02; ///< m^2

  void validate() const {
    detail::require(mass > 0 && gravity > 0 && thrust_coeff > 0 &&
                        rotor_inertia > 0 && air_density > 0 &&
                        rotor_disc_area > 0,
                    "UavParams: all fields must be strictly positive");
  }
};

/// Gains with conventional roles: kp multiplies the error, kd its rate.
///
/// The error equation e'' + a*e' + b*e = 0 is sometimes written with the
/// names swapped (the rate coefficient called kp). With this struct
/// that equation corresponds to kd = a, kp = b.
struct PidGains {
  double kp = 1.0;
  double kd = 1.0;
  double ki = 0.0;

  void validate() const {
    detail::require(kp > 0 && kd > 0 && ki >= 0,
                    "PidGains: requires kp > 0, kd > 0, ki >= 0");
  }
};

struct ControlInput {
  double total_thrust = 0.0;     ///< u, N
  Vec3 moments = Vec3::Zero();   ///< normalized (yaw, pitch, roll) moments
};

struct Acceleration {
  Vec3 linear = Vec3::Zero();
  Vec3 angular = Vec3::Zero();
};

/// F = k * omega^2.
inline double rotor_thrust(const UavParams& params, double omega) {
  detail::require(omega >= 0.0, "rotor_thrust: omega must be >= 0");
  return params.thrust_coeff * omega * omega;
}

/// u = sum of the four rotor thrusts.
inline double total_thrust(const UavParams& params, const Vec4& rotor_speeds) {
  double u = 0.0;
  for (int i = 0; i < 4; ++i) u += rotor_thrust(params, rotor_speeds[i]);
  return u;
}

/// Per-rotor speed that makes 4 k omega^2 = m g.
inline double hover_rotor_speed(const UavParams& params) {
  return std::sqrt(params.mass * params.gravity / (4.0 * params.thrust_coeff));
}

/// Rotor angular acceleration from I_rot * omega_dot = tau - 0.5 rho v^2.
inline double rotor_spin_dynamics(const UavParams& params, double omega,
                                  double motor_torque, double airflow_speed) {
  detail::require(omega >= 0.0, "rotor_spin_dynamics: omega must be >= 0");
  const double drag =
      0.5 * params.air_density * airflow_speed * airflow_speed;
  return (motor_torque - drag) / params.rotor_inertia;
}

inline Acceleration rigid_body_accel(const UavState& state,
                                     const ControlInput& input,
                                     const UavParams& params) {
  detail::require(input.total_thrust >= 0.0,
                  "rigid_body_accel: total thrust must be >= 0");
  const double psi = state.euler[kYaw];
  const double theta = state.euler[kPitch];
  const double phi = state.euler[kRoll];
  const double u_over_m = input.total_thrust / params.mass;

  Acceleration acc;
  acc.linear.x() = u_over_m * (std::sin(phi) * std::sin(psi) +
                               std::cos(phi) * std::cos(psi) * std::sin(theta));
  acc.linear.y() = u_over_m * (std::cos(phi) * std::sin(theta) * std::sin(psi) -
                               std::cos(psi) * std::sin(phi));
  acc.linear.z() =
      u_over_m * std::cos(theta) * std::cos(phi) - params.gravity;
  acc.angular = input.moments;
  return acc;
}

/// One semi-implicit Euler step: velocities first, then positions and
/// angles from the updated velocities. Angles are re-wrapped after the step.
/// Rotor speeds are carried through unchanged.
inline UavState step_state(const UavState& state, const ControlInput& input,
                           const UavParams& params, double dt) {
  detail::require(dt > 0.0, "step_state: dt must be > 0");
  const Acceleration acc = rigid_body_accel(state, input, params);
  UavState next = state;
  next.velocity += acc.linear * dt;
  next.euler_rates += acc.angular * dt;
  next.position += next.velocity * dt;
  next.euler += next.euler_rates * dt;
  for (int i = 0; i < 3; ++i) next.euler[i] = normalize_angle(next.euler[i]);
  return next;
}

inline double pid_control(double error, double error_rate,
                          double error_integral, const PidGains& gains) {
  return gains.kp * error + gains.kd * error_rate + gains.ki * error_integral;
}

/// Stateful wrapper that accumulates the error integral between calls.
class PidController {
 public:
  explicit PidController(PidGains gains) : gains_(gains) {}

  double update(double error, double error_rate, double dt) {
    integral_ += error * dt;
    return pid_control(error, error_rate, integral_, gains_);
  }

  void reset() { integral_ = 0.0; }
  double integral() const { return integral_; }
  const PidGains& gains() const { return gains_; }

 private:
  PidGains gains_;
  double integral_ = 0.0;
};

/// Thrust that holds altitude against gravity plus a commanded vertical
/// acceleration at the current tilt. Clamped at zero.
inline double altitude_thrust(const UavState& state, const UavParams& params,
                              double vertical_accel_cmd) {
  const double tilt =
      std::cos(state.euler[kPitch]) * std::cos(state.euler[kRoll]);
  if (tilt <= 1e-6) return 0.0;
  const double u =
      params.mass * (params.gravity + vertical_accel_cmd) / tilt;
  return u > 0.0 ? u : 0.0;
}

}  // namespace dynamics
}  // namespace swarmlink
