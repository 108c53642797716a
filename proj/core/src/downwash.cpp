#include "ovac/downwash.hpp"

#include <cmath>

namespace ovac {

double axial_peak_velocity(const DownwashModel& model, double z) {
  const double decay =
      model.c1 - model.c2 * model.k_visc * (z - model.z0) / model.r0;
  return model.v0 * std::max(decay, 0.0);
}

double axial_velocity(const DownwashModel& model, double z, double r) {
  if (z <= model.z0)
    throw InvalidGeometry("axial_velocity requires z > z0");
  if (z - model.z0 > model.zfe_extent * model.r0) return 0.0;
  // Ring thickness scales with the contracted propeller radius; the ring
  // location rm0 itself is a platform property.
  const double sigma = 0.5 * model.r0 +
                       0.075 * (z - model.z0 - model.r0) / model.k_visc;
  const double arg = (r - model.rm0) / sigma;
  return axial_peak_velocity(model, z) * std::exp(-0.5 * arg * arg);
}

double efflux_velocity(const DownwashModel& model, double thrust) {
  if (model.v0 > 0.0) return model.v0;
  // Momentum theory over the four propeller disks; the contracted radius
  // is the disk radius over sqrt(2).
  const double disk_area = 4.0 * M_PI * 2.0 * model.r0 * model.r0;
  return std::sqrt(std::max(thrust, 0.0) / (2.0 * model.rho * disk_area));
}

MatX thrust_decrements(const PlatformConfig& config, const DownwashModel& model,
                       const AllocationVector& x, const MatX& prop_thrusts) {
  const int n = config.n_generators;
  if (prop_thrusts.rows() != n || prop_thrusts.cols() != 4)
    throw ConfigError("prop_thrusts must be N x 4");

  std::vector<Mat3> rot(n);
  std::vector<Vec3> flow_axis(n);
  std::vector<double> v0(n);
  for (int k = 0; k < n; ++k) {
    rot[k] = actuator_rotation(x.alpha(k), x.beta(k));
    flow_axis[k] = -(rot[k] * Vec3::UnitZ());
    v0[k] = efflux_velocity(model, prop_thrusts.row(k).sum());
  }
  const auto offsets = config.prop_offsets();

  MatX delta = MatX::Zero(n, 4);
  if (model.bv == 0.0) return delta;
  DownwashModel local = model;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < 4; ++j) {
      const Vec3 hub = config.mount(i) + rot[i] * offsets[j];
      double v_sum = 0.0;
      for (int k = 0; k < n; ++k) {
        if (k == i) continue;  // a rotor's own wake is part of K_T
        const Vec3 rel = hub - config.mount(k);
        const double z = rel.dot(flow_axis[k]);
        if (z <= local.z0) continue;
        const double r = (rel - z * flow_axis[k]).norm();
        local.v0 = v0[k];
        v_sum += axial_velocity(local, z, r);
      }
      const double d = -model.bv * v_sum * prop_thrusts(i, j);
      delta(i, j) = std::max(d, -prop_thrusts(i, j));
    }
  }
  return delta;
}

std::pair<Wrench, std::vector<Vec3>> disturbance_wrench(
    const PlatformConfig& config, const MatX& delta_t, const Vec3& eta,
    const AllocationVector& x) {
  const int n = config.n_generators;
  const double b = config.prop_offset / std::sqrt(2.0);
  const double c_tau = config.prop_drag_const / config.prop_thrust_const;

  Wrench ext;
  std::vector<Vec3> delta_m(n);
  Vec3 force_body = Vec3::Zero();
  for (int i = 0; i < n; ++i) {
    const Eigen::Vector4d dt = delta_t.row(i);
    const double d_thrust = dt.sum();
    delta_m[i] = {b * (dt(0) - dt(1) - dt(2) + dt(3)),
                  b * (-dt(0) - dt(1) + dt(2) + dt(3)),
                  c_tau * (-dt(0) + dt(1) - dt(2) + dt(3))};
    const Vec3 f =
        d_thrust * thrust_direction(x.alpha(i), x.beta(i));
    force_body += f;
    ext.torque += config.mount(i).cross(f);
  }
  ext.force = rotation_body_to_world(eta) * force_body;
  return {ext, std::move(delta_m)};
}

VecX constraint_vector(const PlatformConfig& config,
                       const AllocationVector& x) {
  const int n = config.n_generators;
  VecX o(n * (n - 1));
  int k = 0;
  for (int i = 0; i < n; ++i) {
    const Vec3 axis = thrust_direction(x.alpha(i), x.beta(i));
    for (int j = 0; j < n; ++j) {
      if (j == i) continue;
      const Vec3 d = config.mount(j) - config.mount(i);
      const double proj = d.dot(axis);
      o(k++) = std::max(d.squaredNorm() - proj * proj, 0.0);
    }
  }
  return o;
}

VecX constraint_bound(const PlatformConfig& config, const AllocationVector& x,
                      double o_min) {
  if (o_min < 0) throw ConfigError("o_min must be >= 0");
  const int n = config.n_generators;
  VecX bound = VecX::Zero(n * (n - 1));
  int k = 0;
  for (int i = 0; i < n; ++i) {
    // The wake travels along the negative thrust axis; a pair is gated only
    // when generator i's flow goes toward generator j.
    const Vec3 flow = -thrust_direction(x.alpha(i), x.beta(i));
    for (int j = 0; j < n; ++j) {
      if (j == i) continue;
      const double proj = (config.mount(j) - config.mount(i)).dot(flow);
      bound(k++) = proj <= 0.0 ? 0.0 : o_min * o_min;
    }
  }
  return bound;
}

MatX constraint_jacobian(const PlatformConfig& config,
                         const AllocationVector& x) {
  const int n = config.n_generators;
  MatX jac = MatX::Zero(n * (n - 1), 3 * n);
  int k = 0;
  for (int i = 0; i < n; ++i) {
    const double ca = std::cos(x.alpha(i)), sa = std::sin(x.alpha(i));
    const double cb = std::cos(x.beta(i)), sb = std::sin(x.beta(i));
    const Vec3 axis{sb, -sa * cb, ca * cb};
    const Vec3 d_axis_alpha{0.0, -ca * cb, -sa * cb};
    const Vec3 d_axis_beta{cb, sa * sb, -ca * sb};
    for (int j = 0; j < n; ++j) {
      if (j == i) continue;
      const Vec3 d = config.mount(j) - config.mount(i);
      const double proj = d.dot(axis);
      jac(k, i) = -2.0 * proj * d.dot(d_axis_alpha);
      jac(k, n + i) = -2.0 * proj * d.dot(d_axis_beta);
      ++k;
    }
  }
  return jac;
}

}  // namespace ovac
