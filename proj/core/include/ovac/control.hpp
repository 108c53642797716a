#pragma once

#include "ovac/dynamics.hpp"
#include "ovac/types.hpp"

namespace ovac {

/// One sample of the reference trajectory.
struct RefSample {
  Vec3 position = Vec3::Zero();
  Vec3 velocity = Vec3::Zero();
  Vec3 acceleration = Vec3::Zero();
  Vec3 attitude = Vec3::Zero();
  Vec3 attitude_rate = Vec3::Zero();
};

/// PD (optionally PI-D) gains for the feedback-linearized double
/// integrators in position and body rates.
struct TrackingGains {
  Vec3 kp_pos{4.0, 4.0, 4.0};
  Vec3 kd_pos{3.0, 3.0, 3.0};
  Vec3 ki_pos{0.0, 0.0, 0.0};
  Vec3 kp_att{36.0, 36.0, 36.0};
  Vec3 kd_att{12.0, 12.0, 12.0};

  void validate() const;
};

/// Feedback-linearization wrench command (Eq. of motion inverted about the
/// current attitude): translational loop in F_W, rotational loop in F_B.
/// `pos_integral` accumulates only when ki_pos is nonzero; pass nullptr to
/// run pure PD. Throws AttitudeSingular near the Euler singularity.
Wrench high_level(const RefSample& ref, const PlatformState& state,
                  const TrackingGains& gains, const DynamicsParams& params,
                  double dt, Vec3* pos_integral = nullptr);

struct GimbalPidGains {
  double kp_alpha = 900.0;
  double ki_alpha = 0.0;
  double kd_alpha = 60.0;
  double kp_beta = 900.0;
  double ki_beta = 0.0;
  double kd_beta = 60.0;
  double integral_limit = 1.0;

  void validate() const;
};

/// Incremental PID on one gimbal joint; backward-difference derivative,
/// clamped integrator. Produces a desired joint angular acceleration.
class GimbalPid {
 public:
  double update(double error, double dt, double kp, double ki, double kd,
                double integral_limit);
  void reset();

 private:
  double integral_ = 0.0;
  double prev_error_ = 0.0;
  bool primed_ = false;
};

/// Gimbal torque command from desired joint accelerations; jx, jy are the
/// module inertias about its x/y axes in SI [kg*m^2].
Vec3 joint_torques(double alpha_acc, double beta_acc, double beta, double jx,
                   double jy);

/// 4x4 thrust/torque mixer of one quad module and its inverse.
struct QuadMixer {
  Eigen::Matrix4d forward;
  Eigen::Matrix4d inverse;
  double k_thrust = 0.0;  ///< K_T for omega conversion
  double t_max = 0.0;     ///< per-propeller clamp [N]

  static QuadMixer from_config(const PlatformConfig& config);

  struct MixResult {
    Eigen::Vector4d thrusts;
    Eigen::Vector4d omegas;
    bool saturated = false;
  };
  /// Splits a total-thrust + torque command into per-propeller thrusts,
  /// clamped to [0, t_max], and the corresponding rotor speeds.
  MixResult mix(double total_thrust, const Vec3& torque) const;
};

}  // namespace ovac
