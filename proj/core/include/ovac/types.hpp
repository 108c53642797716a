#pragma once

#include <array>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

// Frame conventions used throughout:
//   F_W  world frame, z up, gravity along -z.
//   F_B  body frame attached to the platform's geometric center.
//   F_i  actuator frame of the i-th thrust generator, origin at its mount
//        point d_i (expressed in F_B).
// Attitude eta = [roll, pitch, yaw], composed extrinsically as
// R = Rz(yaw) * Ry(pitch) * Rx(roll).

namespace ovac {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using VecX = Eigen::VectorXd;
using MatX = Eigen::MatrixXd;

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct InvalidGeometry : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct DegenerateGeometry : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct IntegrationDiverged : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct AttitudeSingular : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct ZeroThrust : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct QpInfeasible : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct EmptyLog : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// 6-DoF force/torque pair. For the actuation wrench u both rows are in
/// F_B (the force row is rotated by the body-to-world rotation inside the
/// dynamics). For the external downwash wrench the force row is already
/// in F_W and the torque row in F_B.
struct Wrench {
  Vec3 force = Vec3::Zero();
  Vec3 torque = Vec3::Zero();

  Eigen::Matrix<double, 6, 1> stacked() const {
    Eigen::Matrix<double, 6, 1> v;
    v << force, torque;
    return v;
  }
  static Wrench from_stacked(const Eigen::Matrix<double, 6, 1>& v) {
    return Wrench{v.head<3>(), v.tail<3>()};
  }
};

/// Body-to-world rotation from roll-pitch-yaw angles,
/// R = Rz(yaw) * Ry(pitch) * Rx(roll).
Mat3 rotation_body_to_world(const Vec3& eta);

/// Rotation of actuator frame F_i relative to F_B for tilt angle alpha
/// (about the actuator x-axis) and twist angle beta (about the resulting
/// y-axis): R = Rx(alpha) * Ry(beta). Its z-column, the thrust direction,
/// is [sin(beta), -sin(alpha)cos(beta), cos(alpha)cos(beta)].
Mat3 actuator_rotation(double alpha, double beta);

/// Thrust direction of actuator_rotation without forming the full matrix.
Vec3 thrust_direction(double alpha, double beta);

/// Maps body angular velocity to Euler angle rates for the roll-pitch-yaw
/// convention: eta_dot = E(eta) * nu. Throws AttitudeSingular when |pitch|
/// exceeds max_pitch (rad).
Mat3 euler_rate_matrix(const Vec3& eta, double max_pitch);

/// Inverse map: nu = E(eta)^-1 * eta_dot.
Mat3 euler_rate_matrix_inverse(const Vec3& eta);

/// Stacked actuator state X = [alpha; beta; T], length 3N.
class AllocationVector {
 public:
  AllocationVector() = default;
  explicit AllocationVector(int n_generators)
      : v_(VecX::Zero(3 * n_generators)) {}
  explicit AllocationVector(VecX raw) : v_(std::move(raw)) {
    if (v_.size() % 3 != 0) throw ConfigError("AllocationVector size not 3N");
  }

  int count() const { return static_cast<int>(v_.size()) / 3; }
  double alpha(int i) const { return v_(i); }
  double beta(int i) const { return v_(count() + i); }
  double thrust(int i) const { return v_(2 * count() + i); }
  double& alpha(int i) { return v_(i); }
  double& beta(int i) { return v_(count() + i); }
  double& thrust(int i) { return v_(2 * count() + i); }

  const VecX& raw() const { return v_; }
  VecX& raw() { return v_; }
  double total_thrust() const { return v_.tail(count()).sum(); }

 private:
  VecX v_;
};

/// Downwash aerodynamic constants (Gaussian near-field jet plus linear
/// axial decay). The numeric defaults target a Crazyflie-class 46 mm
/// propeller and were calibrated in closed-loop simulation; all are
/// overridable from the platform config.
struct DownwashModel {
  double k_visc = 4.5;       ///< jet viscosity constant
  double z0 = 0.0;           ///< efflux plane position [m]
  double r0 = 0.023;         ///< contracted jet radius [m]
  double v0 = 0.0;           ///< induced efflux velocity [m/s]; <= 0 means
                             ///< derive from source thrust by momentum theory
  double rm0 = 0.7 * 0.023;  ///< radial location of peak velocity [m]
  double c1 = 1.0;           ///< axial decay offset
  double c2 = 0.004;         ///< axial decay slope
  double bv = 0.15;          ///< thrust decay coefficient [s/m]
  double rho = 1.225;        ///< air density [kg/m^3], for momentum theory
  double zfe_extent = 20.0;  ///< validity bound as multiple of r0

  void validate() const;
};

/// Platform geometry, masses, and actuator limits. Inertias are stored in
/// kg*cm^2 as configured; conversion to SI happens where they are consumed.
struct PlatformConfig {
  int n_generators = 4;
  double frame_mass = 0.020;                    ///< m_0 [kg]
  double module_mass = 0.050;                   ///< m_i [kg]
  Vec3 frame_inertia_diag{3.20, 3.20, 4.70};    ///< I_0 diag [kg*cm^2]
  Vec3 module_inertia_diag{0.35, 0.35, 0.55};   ///< I_i diag [kg*cm^2]
  double arm_length = 0.21;                     ///< l [m]
  std::vector<Vec3> mount_positions;            ///< d_i in F_B [m]; empty
                                                ///< means regular N-gon
  double prop_offset = 0.068;                   ///< a [m]
  double max_prop_thrust = 0.30;                ///< t_max [N]
  double prop_thrust_const = 2.2e-8;            ///< K_T [N s^2]
  double prop_drag_const = 1.8e-10;             ///< K_tau [N m s^2]
  Vec3 com_offset = Vec3::Zero();               ///< [m], source of tau_g
  Eigen::Vector2d tilt_limits{-2.5, 2.5};       ///< [rad]
  Eigen::Vector2d twist_limits{-1.4, 1.4};      ///< [rad]
  Eigen::Vector2d thrust_limits{0.0, 1.2};      ///< [N] per generator
  VecX rate_limit_lo;                           ///< dX lower bound per tick
  VecX rate_limit_hi;                           ///< dX upper bound per tick
  DownwashModel downwash;

  /// Mount position of generator i, applying the regular N-gon default.
  Vec3 mount(int i) const;
  /// Per-quad propeller hub offsets in F_i (X layout consistent with the
  /// mixer rows [b,-b,-b,b] and [-b,-b,b,b], b = a/sqrt(2)).
  std::array<Vec3, 4> prop_offsets() const;

  double total_mass() const { return frame_mass + n_generators * module_mass; }

  void validate() const;

  /// Table-driven presets for the simulated four- and six-generator
  /// platforms.
  static PlatformConfig four_platform();
  static PlatformConfig six_platform();
};

struct PlatformState {
  Vec3 position = Vec3::Zero();   ///< xi in F_W [m]
  Vec3 attitude = Vec3::Zero();   ///< eta = [roll, pitch, yaw] [rad]
  Vec3 velocity = Vec3::Zero();   ///< xi_dot in F_W [m/s]
  Vec3 body_rates = Vec3::Zero(); ///< nu = [p, q, r] in F_B [rad/s]
  AllocationVector actuators;
};

inline Mat3 skew(const Vec3& v) {
  Mat3 m;
  m << 0, -v.z(), v.y(), v.z(), 0, -v.x(), -v.y(), v.x(), 0;
  return m;
}

}  // namespace ovac
