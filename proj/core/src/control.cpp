#include "ovac/control.hpp"

#include <cmath>

namespace ovac {

void TrackingGains::validate() const {
  if ((kp_pos.array() <= 0).any() || (kd_pos.array() <= 0).any() ||
      (kp_att.array() <= 0).any() || (kd_att.array() <= 0).any())
    throw ConfigError("tracking PD gains must be > 0");
  if ((ki_pos.array() < 0).any())
    throw ConfigError("integral gains must be >= 0");
}

Wrench high_level(const RefSample& ref, const PlatformState& state,
                  const TrackingGains& gains, const DynamicsParams& params,
                  double dt, Vec3* pos_integral) {
  const Mat3 r = rotation_body_to_world(state.attitude);
  // Fails before anything else if we are inside the singular band.
  const Mat3 rate_to_euler = euler_rate_matrix(state.attitude, params.max_pitch);
  (void)rate_to_euler;

  const Vec3 pos_err = ref.position - state.position;
  Vec3 u_xi = ref.acceleration + gains.kp_pos.cwiseProduct(pos_err) +
              gains.kd_pos.cwiseProduct(ref.velocity - state.velocity);
  if (pos_integral && (gains.ki_pos.array() > 0).any()) {
    *pos_integral += pos_err * dt;
    // Anti-windup clamp; keeps the integral contribution bounded when the
    // platform is pinned far from the reference.
    *pos_integral = pos_integral->cwiseMax(-1.0).cwiseMin(1.0);
    u_xi += gains.ki_pos.cwiseProduct(*pos_integral);
  }

  // Attitude error mapped to the body frame; reference body rate from the
  // reference Euler rate.
  const Mat3 to_body = euler_rate_matrix_inverse(state.attitude);
  const Vec3 att_err_body = to_body * (ref.attitude - state.attitude);
  const Vec3 nu_ref =
      euler_rate_matrix_inverse(ref.attitude) * ref.attitude_rate;
  const Vec3 u_nu = gains.kp_att.cwiseProduct(att_err_body) +
                    gains.kd_att.cwiseProduct(nu_ref - state.body_rates);

  Wrench u;
  u.force = params.mass * r.transpose() * (u_xi - Vec3(0, 0, -kGravity));
  u.torque = params.inertia * u_nu - params.gravity_torque(r);
  return u;
}

void GimbalPidGains::validate() const {
  if (kp_alpha < 0 || ki_alpha < 0 || kd_alpha < 0 || kp_beta < 0 ||
      ki_beta < 0 || kd_beta < 0)
    throw ConfigError("gimbal PID gains must be >= 0");
}

double GimbalPid::update(double error, double dt, double kp, double ki,
                         double kd, double integral_limit) {
  integral_ = std::clamp(integral_ + error * dt, -integral_limit,
                         integral_limit);
  const double derivative = primed_ ? (error - prev_error_) / dt : 0.0;
  prev_error_ = error;
  primed_ = true;
  return kp * error + ki * integral_ + kd * derivative;
}

void GimbalPid::reset() {
  integral_ = 0.0;
  prev_error_ = 0.0;
  primed_ = false;
}

Vec3 joint_torques(double alpha_acc, double beta_acc, double beta, double jx,
                   double jy) {
  return {jx * alpha_acc * std::cos(beta), jy * beta_acc,
          jx * alpha_acc * std::sin(beta)};
}

QuadMixer QuadMixer::from_config(const PlatformConfig& config) {
  const double b = config.prop_offset / std::sqrt(2.0);
  const double c_tau = config.prop_drag_const / config.prop_thrust_const;
  QuadMixer m;
  m.forward << 1, 1, 1, 1,
               b, -b, -b, b,
               -b, -b, b, b,
               -c_tau, c_tau, -c_tau, c_tau;
  m.inverse = m.forward.inverse();
  m.k_thrust = config.prop_thrust_const;
  m.t_max = config.max_prop_thrust;
  return m;
}

QuadMixer::MixResult QuadMixer::mix(double total_thrust,
                                    const Vec3& torque) const {
  Eigen::Vector4d cmd;
  cmd << total_thrust, torque;
  MixResult res;
  res.thrusts = inverse * cmd;
  // Torque-priority desaturation: a uniform shift across the four rotors
  // changes only the collective (the torque rows of the mixer sum to
  // zero), so shifting into range sacrifices thrust before control
  // authority over the gimbal joints.
  const double hi = res.thrusts.maxCoeff();
  const double lo = res.thrusts.minCoeff();
  if (hi > t_max && lo > hi - t_max) {
    res.thrusts.array() -= hi - t_max;
    res.saturated = true;
  } else if (lo < 0.0 && hi < lo + t_max) {
    res.thrusts.array() -= lo;
    res.saturated = true;
  }
  for (int j = 0; j < 4; ++j) {
    const double clamped = std::clamp(res.thrusts(j), 0.0, t_max);
    if (clamped != res.thrusts(j)) res.saturated = true;
    res.thrusts(j) = clamped;
    res.omegas(j) = std::sqrt(res.thrusts(j) / k_thrust);
  }
  return res;
}

}  // namespace ovac
