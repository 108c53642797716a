#pragma once

#include "ovac/downwash.hpp"
#include "ovac/qp.hpp"
#include "ovac/types.hpp"

namespace ovac {

/// QP weighting for the per-tick allocation: Q1 penalizes actuator motion
/// dX, Q2 the linearization slack (dominant), Q3 the nullspace magnitude;
/// gamma scales the total-thrust term and o_min sets the wake clearance.
struct AllocatorWeights {
  MatX q1;
  MatX q2;
  MatX q3;
  double gamma = 0.1;
  double o_min = 0.0;

  static AllocatorWeights defaults(int n_generators);
  void validate(int n_generators) const;
};

/// Constant allocation matrix W (6 x 3N), its pseudoinverse, and an
/// orthonormal basis of its nullspace.
struct AllocationMatrixSet {
  MatX w;
  MatX w_pinv;
  MatX nullspace;       ///< 3N x (3N-6), orthonormal columns
  MatX nullspace_pinv;  ///< equals nullspace^T
};

/// Builds W so that W * F = [sum F_i; sum d_i x F_i]. Throws
/// DegenerateGeometry when the mount layout leaves W rank deficient.
AllocationMatrixSet build_w(const PlatformConfig& config);

/// Stacked intermediate forces F_i = T_i * thrust_direction(alpha_i, beta_i).
VecX forces_from_x(const AllocationVector& x);

/// Analytic Jacobian dF/dX (3N x 3N), decoupled per generator.
MatX jacobian_f(const AllocationVector& x);

/// Thrust efficiency: achieved net force magnitude over total thrust spent.
/// Throws ZeroThrust when the thrust sum is not positive.
double thrust_efficiency(const AllocationVector& x);

/// Recovers (alpha, beta, T) from stacked forces. Generators with
/// ||F_i|| < t_floor keep the angles from `fallback` and get T = t_floor;
/// `fallback_used` (optional) reports whether that happened.
AllocationVector inverse_kinematics(const VecX& forces, double t_floor,
                                    const AllocationVector& fallback,
                                    bool* fallback_used = nullptr);

struct AllocationResult {
  AllocationVector x_new;    ///< commanded (alpha^d, beta^d, T^d)
  VecX f_exact;              ///< F*, exact nullspace-projected forces
  VecX z_star;               ///< nullspace coordinates of F*
  VecX slack;                ///< QP slack s
  double efficiency = 0.0;   ///< eta_f of x_new
  QpStatus qp_status = QpStatus::Optimal;
  int qp_iterations = 0;
  VecX constraint_values;    ///< O(x_new)
  bool downwash_rows_dropped = false;
  bool wrench_scaled = false;
  bool ik_fallback = false;
};

enum class AllocatorMode { Conventional, DownwashAware };

AllocatorMode allocator_mode_from_string(const std::string& s);
const char* to_string(AllocatorMode mode);

/// Per-tick nullspace allocator. Holds the precomputed matrix set; calls
/// are independent given separate X_prev chains.
class Allocator {
 public:
  Allocator(PlatformConfig config, AllocatorWeights weights,
            AllocatorMode mode = AllocatorMode::DownwashAware);

  /// One allocation tick: linearize about x_prev, solve the QP, integrate
  /// dX, project back onto the exact solution manifold, and recover
  /// commands by inverse kinematics. Throws QpInfeasible only when every
  /// relaxation fallback fails.
  AllocationResult allocate(const Wrench& u_d,
                            const AllocationVector& x_prev) const;

  const AllocationMatrixSet& matrices() const { return matrices_; }
  const PlatformConfig& config() const { return config_; }
  const AllocatorWeights& weights() const { return weights_; }
  AllocatorMode mode() const { return mode_; }

  static constexpr double kThrustFloor = 1e-3;      ///< [N]
  static constexpr double kClearanceMargin = 2.5e-2;  ///< [m], added to o_min
  static constexpr double kGateAnticipation = 8e-2;   ///< [m], along flow axis

 private:
  QpProblem assemble(const Wrench& u_d, const AllocationVector& x_prev,
                     bool with_downwash_rows) const;

  PlatformConfig config_;
  AllocatorWeights weights_;
  AllocatorMode mode_;
  AllocationMatrixSet matrices_;
  VecX x_lo_, x_hi_;     // box limits on X
  VecX rate_lo_, rate_hi_;
};

}  // namespace ovac
