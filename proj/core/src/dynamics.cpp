#include "ovac/dynamics.hpp"

#include <cmath>

namespace ovac {

namespace {
constexpr double kKgCm2ToSi = 1e-4;
}

DynamicsParams DynamicsParams::from_config(const PlatformConfig& config) {
  config.validate();
  DynamicsParams p;
  p.mass = config.total_mass();
  Mat3 j = (config.frame_inertia_diag * kKgCm2ToSi).asDiagonal();
  const Mat3 ji = (config.module_inertia_diag * kKgCm2ToSi).asDiagonal();
  for (int i = 0; i < config.n_generators; ++i) {
    const Vec3 d = config.mount(i);
    j += ji + config.module_mass *
                  (d.squaredNorm() * Mat3::Identity() - d * d.transpose());
  }
  p.inertia = 0.5 * (j + j.transpose());
  if (p.inertia.llt().info() != Eigen::Success)
    throw ConfigError("composite inertia is not positive definite");
  p.inertia_inv = p.inertia.inverse();
  p.com_offset = config.com_offset;
  return p;
}

Vec3 DynamicsParams::gravity_torque(const Mat3& body_to_world) const {
  const Vec3 gravity_body =
      body_to_world.transpose() * Vec3(0, 0, -mass * kGravity);
  return com_offset.cross(gravity_body);
}

Wrench actuation_wrench(const PlatformConfig& config,
                        const AllocationVector& x) {
  Wrench u;
  for (int i = 0; i < config.n_generators; ++i) {
    const Vec3 f =
        x.thrust(i) * thrust_direction(x.alpha(i), x.beta(i));
    u.force += f;
    u.torque += config.mount(i).cross(f);
  }
  return u;
}

namespace {

// 12-state derivative: [xi, eta, xi_dot, nu].
using State12 = Eigen::Matrix<double, 12, 1>;

State12 pack(const PlatformState& s) {
  State12 y;
  y << s.position, s.attitude, s.velocity, s.body_rates;
  return y;
}

State12 deriv(const DynamicsParams& p, const State12& y, const Wrench& u,
              const Wrench& ext) {
  const Vec3 eta = y.segment<3>(3);
  const Vec3 vel = y.segment<3>(6);
  const Vec3 nu = y.segment<3>(9);
  const Mat3 r = rotation_body_to_world(eta);

  State12 dy;
  dy.segment<3>(0) = vel;
  dy.segment<3>(3) = euler_rate_matrix(eta, p.max_pitch) * nu;
  dy.segment<3>(6) =
      (r * u.force + ext.force) / p.mass + Vec3(0, 0, -kGravity);
  dy.segment<3>(9) =
      p.inertia_inv * (u.torque + p.gravity_torque(r) + ext.torque);
  return dy;
}

}  // namespace

PlatformState step(const DynamicsParams& params, const PlatformState& state,
                   const Wrench& u, const Wrench& ext, double dt) {
  if (!(dt > 0.0 && dt <= 0.02))
    throw ConfigError("dynamics step dt must be in (0, 0.02]");

  const State12 y0 = pack(state);
  const State12 k1 = deriv(params, y0, u, ext);
  const State12 k2 = deriv(params, y0 + 0.5 * dt * k1, u, ext);
  const State12 k3 = deriv(params, y0 + 0.5 * dt * k2, u, ext);
  const State12 k4 = deriv(params, y0 + dt * k3, u, ext);
  const State12 y = y0 + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);

  if (!y.allFinite() || y.cwiseAbs().maxCoeff() > 1e6)
    throw IntegrationDiverged("state exceeded divergence guard");

  PlatformState out = state;
  out.position = y.segment<3>(0);
  out.attitude = y.segment<3>(3);
  out.velocity = y.segment<3>(6);
  out.body_rates = y.segment<3>(9);
  return out;
}

}  // namespace ovac
