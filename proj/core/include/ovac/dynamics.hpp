#pragma once

#include "ovac/types.hpp"

namespace ovac {

constexpr double kGravity = 9.81;

/// Composite rigid-body parameters derived from a PlatformConfig.
/// The inertia is frozen at the nominal (untilted) configuration and
/// composited by the parallel-axis theorem; config inertias in kg*cm^2 are
/// converted to SI here.
struct DynamicsParams {
  double mass = 0.0;           ///< total mass [kg]
  Mat3 inertia = Mat3::Zero(); ///< composite J in F_B [kg*m^2]
  Mat3 inertia_inv = Mat3::Zero();
  Vec3 com_offset = Vec3::Zero();
  double max_pitch = 85.0 * M_PI / 180.0;

  static DynamicsParams from_config(const PlatformConfig& config);

  /// Attitude-dependent gravity torque in F_B:
  /// tau_g = com_offset x (R^T * [0, 0, -m g]).
  Vec3 gravity_torque(const Mat3& body_to_world) const;
};

/// Net actuation wrench in F_B generated by actuator state X:
/// force  = sum_i R_i T_i z_hat, torque = sum_i d_i x (R_i T_i z_hat).
Wrench actuation_wrench(const PlatformConfig& config,
                        const AllocationVector& x);

/// One RK4 step of the rigid-body dynamics. `u` is the actuation wrench
/// (both rows F_B); `ext` is the external disturbance wrench with its force
/// row in F_W and torque row in F_B. Actuator state is carried through
/// unchanged. Throws IntegrationDiverged when any state component exceeds
/// 1e6 and AttitudeSingular near the Euler-rate singularity.
PlatformState step(const DynamicsParams& params, const PlatformState& state,
                   const Wrench& u, const Wrench& ext, double dt);

}  // namespace ovac
