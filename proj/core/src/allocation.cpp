#include "ovac/allocation.hpp"

#include <cmath>
#include <limits>

namespace ovac {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

AllocatorWeights AllocatorWeights::defaults(int n) {
  AllocatorWeights w;
  w.q1 = MatX::Identity(3 * n, 3 * n);
  w.q2 = 1e4 * MatX::Identity(3 * n, 3 * n);
  w.q3 = 1e-2 * MatX::Identity(3 * n - 6, 3 * n - 6);
  w.gamma = 0.1;
  w.o_min = 0.0;
  return w;
}

void AllocatorWeights::validate(int n) const {
  if (q1.rows() != 3 * n || q1.cols() != 3 * n ||
      q2.rows() != 3 * n || q2.cols() != 3 * n ||
      q3.rows() != 3 * n - 6 || q3.cols() != 3 * n - 6)
    throw ConfigError("allocator weight dimensions inconsistent with N");
  if (gamma < 0) throw ConfigError("gamma must be >= 0");
  if (o_min < 0) throw ConfigError("o_min must be >= 0");
}

AllocationMatrixSet build_w(const PlatformConfig& config) {
  const int n = config.n_generators;
  AllocationMatrixSet m;
  m.w = MatX::Zero(6, 3 * n);
  for (int i = 0; i < n; ++i) {
    m.w.block<3, 3>(0, 3 * i) = Mat3::Identity();
    m.w.block<3, 3>(3, 3 * i) = skew(config.mount(i));
  }
  Eigen::JacobiSVD<MatX> svd(m.w, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const VecX& sv = svd.singularValues();
  if (sv(5) <= 1e-10 * sv(0))
    throw DegenerateGeometry("allocation matrix W is rank deficient");
  m.w_pinv = svd.matrixV().leftCols(6) *
             sv.head(6).cwiseInverse().asDiagonal() *
             svd.matrixU().transpose();
  m.nullspace = svd.matrixV().rightCols(3 * n - 6);
  m.nullspace_pinv = m.nullspace.transpose();
  return m;
}

VecX forces_from_x(const AllocationVector& x) {
  const int n = x.count();
  VecX f(3 * n);
  for (int i = 0; i < n; ++i)
    f.segment<3>(3 * i) = x.thrust(i) * thrust_direction(x.alpha(i), x.beta(i));
  return f;
}

MatX jacobian_f(const AllocationVector& x) {
  const int n = x.count();
  MatX j = MatX::Zero(3 * n, 3 * n);
  for (int i = 0; i < n; ++i) {
    const double ca = std::cos(x.alpha(i)), sa = std::sin(x.alpha(i));
    const double cb = std::cos(x.beta(i)), sb = std::sin(x.beta(i));
    const double t = x.thrust(i);
    j.block<3, 1>(3 * i, i) = t * Vec3(0.0, -ca * cb, -sa * cb);
    j.block<3, 1>(3 * i, n + i) = t * Vec3(cb, sa * sb, -ca * sb);
    j.block<3, 1>(3 * i, 2 * n + i) = Vec3(sb, -sa * cb, ca * cb);
  }
  return j;
}

double thrust_efficiency(const AllocationVector& x) {
  const double total = x.total_thrust();
  if (total <= 0.0) throw ZeroThrust("total thrust must be positive");
  Vec3 net = Vec3::Zero();
  for (int i = 0; i < x.count(); ++i)
    net += x.thrust(i) * thrust_direction(x.alpha(i), x.beta(i));
  return net.norm() / total;
}

AllocationVector inverse_kinematics(const VecX& forces, double t_floor,
                                    const AllocationVector& fallback,
                                    bool* fallback_used) {
  const int n = static_cast<int>(forces.size()) / 3;
  AllocationVector x(n);
  bool used = false;
  for (int i = 0; i < n; ++i) {
    const Vec3 f = forces.segment<3>(3 * i);
    const double t = f.norm();
    if (t < t_floor) {
      x.alpha(i) = fallback.alpha(i);
      x.beta(i) = fallback.beta(i);
      x.thrust(i) = t_floor;
      used = true;
      continue;
    }
    x.thrust(i) = t;
    x.alpha(i) = std::atan2(-f.y(), f.z());
    x.beta(i) = std::asin(std::clamp(f.x() / t, -1.0, 1.0));
  }
  if (fallback_used) *fallback_used = used;
  return x;
}

AllocatorMode allocator_mode_from_string(const std::string& s) {
  if (s == "conventional") return AllocatorMode::Conventional;
  if (s == "downwash-aware") return AllocatorMode::DownwashAware;
  throw ConfigError("unknown allocator mode '" + s +
                    "' (expected 'conventional' or 'downwash-aware')");
}

const char* to_string(AllocatorMode mode) {
  return mode == AllocatorMode::Conventional ? "conventional"
                                             : "downwash-aware";
}

Allocator::Allocator(PlatformConfig config, AllocatorWeights weights,
                     AllocatorMode mode)
    : config_(std::move(config)),
      weights_(std::move(weights)),
      mode_(mode) {
  config_.validate();
  weights_.validate(config_.n_generators);
  matrices_ = build_w(config_);

  const int n = config_.n_generators;
  x_lo_.resize(3 * n);
  x_hi_.resize(3 * n);
  x_lo_ << VecX::Constant(n, config_.tilt_limits(0)),
      VecX::Constant(n, config_.twist_limits(0)),
      VecX::Constant(n, config_.thrust_limits(0));
  x_hi_ << VecX::Constant(n, config_.tilt_limits(1)),
      VecX::Constant(n, config_.twist_limits(1)),
      VecX::Constant(n, config_.thrust_limits(1));

  if (config_.rate_limit_lo.size()) {
    rate_lo_ = config_.rate_limit_lo;
    rate_hi_ = config_.rate_limit_hi;
  } else {
    rate_lo_.resize(3 * n);
    rate_hi_.resize(3 * n);
    rate_lo_ << VecX::Constant(2 * n, -0.06), VecX::Constant(n, -0.2);
    rate_hi_ << VecX::Constant(2 * n, 0.06), VecX::Constant(n, 0.2);
  }
}

QpProblem Allocator::assemble(const Wrench& u_d,
                              const AllocationVector& x_prev,
                              bool with_downwash_rows) const {
  const int nx = 3 * config_.n_generators;
  const int nz = nx - 6;
  const int n = 2 * nx + nz;  // [dX; s; Z]

  QpProblem qp;
  qp.h = MatX::Zero(n, n);
  qp.h.topLeftCorner(nx, nx) = 2.0 * weights_.q1;
  qp.h.block(nx, nx, nx, nx) = 2.0 * weights_.q2;
  qp.h.bottomRightCorner(nz, nz) = 2.0 * weights_.q3;

  qp.f = VecX::Zero(n);
  qp.f.segment(2 * config_.n_generators, config_.n_generators)
      .setConstant(weights_.gamma);

  // Linearized force-consistency equality: J_F dX + s - N_W Z = W+ u - F(X0).
  qp.a_eq = MatX::Zero(nx, n);
  qp.a_eq.leftCols(nx) = jacobian_f(x_prev);
  qp.a_eq.block(0, nx, nx, nx) = MatX::Identity(nx, nx);
  qp.a_eq.rightCols(nz) = -matrices_.nullspace;
  qp.b_eq = matrices_.w_pinv * u_d.stacked() - forces_from_x(x_prev);

  if (with_downwash_rows) {
    // Command a slightly larger clearance than required so the deviation
    // between the linear prediction and the projected/IK-recovered command
    // cannot pull the achieved clearance below o_min.
    const double o_cmd =
        weights_.o_min > 0.0 ? weights_.o_min + kClearanceMargin : 0.0;
    // Engage each avoidance row slightly before the overlap projection
    // turns positive: when an attitude slew sweeps a wake axis across a
    // neighbor, the hard gate alone flips on with no warning and the rate
    // limits cannot open the clearance within the flipping tick.
    const int ng = config_.n_generators;
    VecX bound = VecX::Zero(ng * (ng - 1));
    {
      int k = 0;
      for (int i = 0; i < ng; ++i) {
        const Vec3 flow = -thrust_direction(x_prev.alpha(i), x_prev.beta(i));
        for (int j = 0; j < ng; ++j) {
          if (j == i) continue;
          const double proj = (config_.mount(j) - config_.mount(i)).dot(flow);
          bound(k++) = proj <= -kGateAnticipation ? 0.0 : o_cmd * o_cmd;
        }
      }
    }
    const VecX o0 = constraint_vector(config_, x_prev);
    const MatX jac = constraint_jacobian(config_, x_prev);
    int rows = 0;
    for (int k = 0; k < bound.size(); ++k)
      if (bound(k) > 0.0) ++rows;
    if (rows > 0) {
      qp.a_in = MatX::Zero(rows, n);
      qp.b_in = VecX::Zero(rows);
      int r = 0;
      for (int k = 0; k < bound.size(); ++k) {
        if (bound(k) <= 0.0) continue;
        qp.a_in.block(r, 0, 1, nx) = jac.row(k);
        // A clearance deficit larger than one tick's worth of actuator
        // motion cannot be closed immediately; capping the required
        // per-tick progress keeps the QP feasible and converges over a
        // few ticks instead of forcing the row to be dropped outright.
        double reach = 0.0;
        for (int i = 0; i < nx; ++i)
          reach += std::abs(jac(k, i)) *
                   std::max(rate_hi_(i), -rate_lo_(i));
        qp.b_in(r) = std::min(bound(k) - o0(k), 0.5 * reach);
        ++r;
      }
    }
  }

  // Box and rate limits on dX; s and Z free.
  qp.lb = VecX::Constant(n, -kInf);
  qp.ub = VecX::Constant(n, kInf);
  for (int i = 0; i < nx; ++i) {
    double lo = std::max(x_lo_(i) - x_prev.raw()(i), rate_lo_(i));
    double hi = std::min(x_hi_(i) - x_prev.raw()(i), rate_hi_(i));
    if (lo > hi) lo = hi = 0.5 * (lo + hi);  // x_prev outside box
    qp.lb(i) = lo;
    qp.ub(i) = hi;
  }
  return qp;
}

AllocationResult Allocator::allocate(const Wrench& u_d,
                                     const AllocationVector& x_prev) const {
  const int nx = 3 * config_.n_generators;
  const bool aware = mode_ == AllocatorMode::DownwashAware;

  AllocationResult res;
  Wrench u = u_d;
  QpSolution sol = solve(assemble(u, x_prev, aware));

  if (sol.status == QpStatus::Infeasible && aware) {
    // Downwash rows are soft safety; tracking has priority.
    res.downwash_rows_dropped = true;
    sol = solve(assemble(u, x_prev, false));
  }
  for (double scale = 0.5; sol.status == QpStatus::Infeasible && scale > 0.05;
       scale *= 0.5) {
    res.wrench_scaled = true;
    u.force = scale * u_d.force;
    u.torque = scale * u_d.torque;
    sol = solve(assemble(u, x_prev, false));
  }
  if (sol.status == QpStatus::Infeasible)
    throw QpInfeasible("allocation QP infeasible after all fallbacks");

  res.qp_status = sol.status;
  res.qp_iterations = sol.iterations;
  res.slack = sol.x.segment(nx, nx);

  const AllocationVector x_lin(VecX(x_prev.raw() + sol.x.head(nx)));
  const VecX w_pinv_u = matrices_.w_pinv * u.stacked();
  res.z_star = matrices_.nullspace_pinv * (forces_from_x(x_lin) - w_pinv_u);
  res.f_exact = w_pinv_u + matrices_.nullspace * res.z_star;

  res.x_new =
      inverse_kinematics(res.f_exact, kThrustFloor, x_prev, &res.ik_fallback);
  // Near force-direction degeneracies the recovered angles can jump far
  // from the linearized step; confine the command to the same per-tick
  // rate box the QP solved under, and to the actuator box.
  res.x_new.raw() = res.x_new.raw()
                        .cwiseMax(x_prev.raw() + rate_lo_)
                        .cwiseMin(x_prev.raw() + rate_hi_)
                        .cwiseMax(x_lo_)
                        .cwiseMin(x_hi_);

  res.efficiency = thrust_efficiency(res.x_new);
  res.constraint_values = constraint_vector(config_, res.x_new);
  return res;
}

}  // namespace ovac
