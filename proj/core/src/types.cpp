#include "ovac/types.hpp"

#include <cmath>

namespace ovac {

Mat3 rotation_body_to_world(const Vec3& eta) {
  const double cr = std::cos(eta.x()), sr = std::sin(eta.x());
  const double cp = std::cos(eta.y()), sp = std::sin(eta.y());
  const double cy = std::cos(eta.z()), sy = std::sin(eta.z());
  Mat3 r;
  r << cy * cp, cy * sp * sr - sy * cr, cy * sp * cr + sy * sr,
       sy * cp, sy * sp * sr + cy * cr, sy * sp * cr - cy * sr,
       -sp, cp * sr, cp * cr;
  return r;
}

Mat3 actuator_rotation(double alpha, double beta) {
  const double ca = std::cos(alpha), sa = std::sin(alpha);
  const double cb = std::cos(beta), sb = std::sin(beta);
  // Rx(alpha) * Ry(beta)
  Mat3 r;
  r << cb, 0, sb,
       sa * sb, ca, -sa * cb,
       -ca * sb, sa, ca * cb;
  return r;
}

Vec3 thrust_direction(double alpha, double beta) {
  const double cb = std::cos(beta);
  return {std::sin(beta), -std::sin(alpha) * cb, std::cos(alpha) * cb};
}

Mat3 euler_rate_matrix(const Vec3& eta, double max_pitch) {
  if (std::abs(eta.y()) >= max_pitch)
    throw AttitudeSingular("pitch " + std::to_string(eta.y()) +
                           " rad too close to Euler singularity");
  const double cr = std::cos(eta.x()), sr = std::sin(eta.x());
  const double cp = std::cos(eta.y()), tp = std::tan(eta.y());
  Mat3 e;
  e << 1, sr * tp, cr * tp,
       0, cr, -sr,
       0, sr / cp, cr / cp;
  return e;
}

Mat3 euler_rate_matrix_inverse(const Vec3& eta) {
  const double cr = std::cos(eta.x()), sr = std::sin(eta.x());
  const double cp = std::cos(eta.y()), sp = std::sin(eta.y());
  Mat3 e;
  e << 1, 0, -sp,
       0, cr, sr * cp,
       0, -sr, cr * cp;
  return e;
}

void DownwashModel::validate() const {
  if (r0 <= 0) throw ConfigError("downwash r0 must be > 0");
  if (bv < 0) throw ConfigError("downwash bv must be >= 0");
  if (c1 <= 0) throw ConfigError("downwash c1 must be > 0");
  if (rm0 <= 0) throw ConfigError("downwash rm0 must be > 0");
  if (k_visc <= 0) throw ConfigError("downwash k_visc must be > 0");
  if (rho <= 0) throw ConfigError("downwash rho must be > 0");
}

Vec3 PlatformConfig::mount(int i) const {
  if (!mount_positions.empty()) return mount_positions.at(i);
  const double ang = 2.0 * M_PI * i / n_generators;
  return {arm_length * std::cos(ang), arm_length * std::sin(ang), 0.0};
}

std::array<Vec3, 4> PlatformConfig::prop_offsets() const {
  const double b = prop_offset / std::sqrt(2.0);
  return {Vec3{b, b, 0}, Vec3{b, -b, 0}, Vec3{-b, -b, 0}, Vec3{-b, b, 0}};
}

void PlatformConfig::validate() const {
  if (n_generators < 3)
    throw ConfigError("n_generators must be >= 3 (got " +
                      std::to_string(n_generators) + ")");
  if (frame_mass <= 0 || module_mass <= 0)
    throw ConfigError("masses must be > 0");
  if ((frame_inertia_diag.array() <= 0).any() ||
      (module_inertia_diag.array() <= 0).any())
    throw ConfigError("inertia diagonals must be > 0");
  if (arm_length <= 0 || prop_offset <= 0 || max_prop_thrust <= 0)
    throw ConfigError("arm_length, prop_offset, max_prop_thrust must be > 0");
  if (prop_thrust_const <= 0 || prop_drag_const <= 0)
    throw ConfigError("propeller constants must be > 0");
  if (!mount_positions.empty() &&
      static_cast<int>(mount_positions.size()) != n_generators)
    throw ConfigError("mount_positions count does not match n_generators");
  for (int i = 0; i < n_generators; ++i)
    for (int j = i + 1; j < n_generators; ++j)
      if ((mount(i) - mount(j)).norm() < 1e-9)
        throw ConfigError("mount positions " + std::to_string(i) + " and " +
                          std::to_string(j) + " coincide");
  if (tilt_limits(0) >= tilt_limits(1) || twist_limits(0) >= twist_limits(1) ||
      thrust_limits(0) >= thrust_limits(1))
    throw ConfigError("limit pairs must be (lo, hi) with lo < hi");
  if (thrust_limits(0) < 0) throw ConfigError("thrust lower limit must be >= 0");
  if (rate_limit_lo.size() != rate_limit_hi.size() ||
      (rate_limit_lo.size() != 0 && rate_limit_lo.size() != 3 * n_generators))
    throw ConfigError("rate limit vectors must be empty or length 3N");
  downwash.validate();
}

PlatformConfig PlatformConfig::four_platform() {
  PlatformConfig c;
  c.n_generators = 4;
  c.frame_mass = 0.020;
  c.module_mass = 0.050;
  c.frame_inertia_diag = {3.20, 3.20, 4.70};
  c.module_inertia_diag = {0.35, 0.35, 0.55};
  c.arm_length = 0.21;
  c.prop_offset = 0.068;
  c.max_prop_thrust = 0.30;
  // Keep every generator inside an authority band: a module at zero (or
  // full) collective has no differential thrust left for gimbal torque.
  c.thrust_limits = {0.15 * 4 * 0.30, 0.95 * 4 * 0.30};
  // The merged jet of a quad peaks on a ring at the propeller hub radius.
  c.downwash.rm0 = c.prop_offset / std::sqrt(2.0);
  return c;
}

PlatformConfig PlatformConfig::six_platform() {
  PlatformConfig c;
  c.n_generators = 6;
  c.frame_mass = 0.030;
  c.module_mass = 0.036;
  c.frame_inertia_diag = {4.50, 4.50, 6.20};
  c.module_inertia_diag = {0.16, 0.16, 0.29};
  c.arm_length = 0.18;
  c.prop_offset = 0.032;
  c.max_prop_thrust = 0.15;
  c.thrust_limits = {0.15 * 4 * 0.15, 0.95 * 4 * 0.15};
  c.downwash.rm0 = c.prop_offset / std::sqrt(2.0);
  return c;
}

}  // namespace ovac
