#pragma once

#include <utility>
#include <vector>

#include "ovac/types.hpp"

namespace ovac {

/// Axial jet velocity at distance z below the efflux plane and radial
/// offset r from the flow axis. Gaussian radial profile centered at rm0,
/// peak decaying linearly with z (clamped at zero). Returns 0 beyond the
/// configured validity extent. Throws InvalidGeometry for z <= z0.
/// Uses model.v0 as the efflux velocity.
double axial_velocity(const DownwashModel& model, double z, double r);

/// Peak (r = rm0) axial velocity at distance z.
double axial_peak_velocity(const DownwashModel& model, double z);

/// Efflux velocity for a source quad producing total thrust `thrust`:
/// model.v0 when positive, otherwise momentum theory over the four
/// propeller disks.
double efflux_velocity(const DownwashModel& model, double thrust);

/// Per-propeller thrust decrements (N x 4, all entries <= 0).
/// prop_thrusts(i, j) is the thrust of quad i's propeller j; the flow of
/// quad k is a jet from its center along -(R_k z_hat); a propeller is
/// affected only when it lies on the positive flow side within the ZFE
/// validity region. Decrements are clamped so a propeller never loses more
/// than its own thrust.
MatX thrust_decrements(const PlatformConfig& config, const DownwashModel& model,
                       const AllocationVector& x, const MatX& prop_thrusts);

/// Per-quad disturbances assembled from the decrements: ext wrench (force
/// row rotated to F_W, torque row in F_B) and per-quad attitude torque
/// disturbances Delta M_i in F_i.
std::pair<Wrench, std::vector<Vec3>> disturbance_wrench(
    const PlatformConfig& config, const MatX& delta_t, const Vec3& eta,
    const AllocationVector& x);

/// Squared radial clearances O_ij^2 between quad i's flow axis and quad j's
/// center, stacked over ordered pairs (i outer, j inner, j != i);
/// length N(N-1).
VecX constraint_vector(const PlatformConfig& config, const AllocationVector& x);

/// Constraint lower bounds: o_min^2 for pairs whose flow projection is
/// positive, 0 otherwise.
VecX constraint_bound(const PlatformConfig& config, const AllocationVector& x,
                      double o_min);

/// Analytic Jacobian dO/dX (N(N-1) x 3N). Thrust columns are zero.
MatX constraint_jacobian(const PlatformConfig& config,
                         const AllocationVector& x);

}  // namespace ovac
