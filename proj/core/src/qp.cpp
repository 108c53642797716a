#include "ovac/qp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

namespace ovac {

void QpProblem::validate() const {
  const int n = size();
  if (n == 0) throw ConfigError("QpProblem has no variables");
  if (h.rows() != n || h.cols() != n) throw ConfigError("H must be n x n");
  if (a_eq.rows() != b_eq.size() || (a_eq.size() && a_eq.cols() != n))
    throw ConfigError("equality block dimensions inconsistent");
  if (a_in.rows() != b_in.size() || (a_in.size() && a_in.cols() != n))
    throw ConfigError("inequality block dimensions inconsistent");
  if ((lb.size() && lb.size() != n) || (ub.size() && ub.size() != n))
    throw ConfigError("bound vectors must be empty or length n");
}

const char* to_string(QpStatus status) {
  switch (status) {
    case QpStatus::Optimal: return "optimal";
    case QpStatus::Infeasible: return "infeasible";
    case QpStatus::MaxIter: return "max_iter";
  }
  return "unknown";
}

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Goldfarb-Idnani dual active-set machinery. J holds the inverse Cholesky
// image of the constraint normals, R the triangular factor of the active
// set. Based on the classic QuadProg++ formulation.

void compute_step_direction(const MatX& j_mat, const MatX& r_mat,
                            const VecX& np, int iq, VecX& d, VecX& z,
                            VecX& r) {
  const int n = static_cast<int>(np.size());
  d = j_mat.transpose() * np;
  z = j_mat.rightCols(n - iq) * d.tail(n - iq);
  if (iq > 0)
    r.head(iq) = r_mat.topLeftCorner(iq, iq)
                     .triangularView<Eigen::Upper>()
                     .solve(d.head(iq));
}

bool add_constraint(MatX& r_mat, MatX& j_mat, VecX& d, int& iq,
                    double& r_norm) {
  const int n = static_cast<int>(d.size());
  for (int j = n - 1; j >= iq + 1; --j) {
    double cc = d(j - 1);
    double ss = d(j);
    const double h = std::hypot(cc, ss);
    if (h == 0.0) continue;
    d(j) = 0.0;
    ss /= h;
    cc /= h;
    if (cc < 0.0) {
      cc = -cc;
      ss = -ss;
      d(j - 1) = -h;
    } else {
      d(j - 1) = h;
    }
    const double xny = ss / (1.0 + cc);
    for (int k = 0; k < n; ++k) {
      const double t1 = j_mat(k, j - 1);
      const double t2 = j_mat(k, j);
      j_mat(k, j - 1) = t1 * cc + t2 * ss;
      j_mat(k, j) = xny * (t1 + j_mat(k, j - 1)) - t2;
    }
  }
  ++iq;
  r_mat.col(iq - 1).head(iq) = d.head(iq);
  if (std::abs(d(iq - 1)) <=
      std::numeric_limits<double>::epsilon() * r_norm)
    return false;
  r_norm = std::max(r_norm, std::abs(d(iq - 1)));
  return true;
}

void delete_constraint(MatX& r_mat, MatX& j_mat, Eigen::VectorXi& active,
                       VecX& u, int n_eq, int& iq, int target) {
  const int n = static_cast<int>(j_mat.rows());
  int qq = -1;
  for (int i = n_eq; i < iq; ++i)
    if (active(i) == target) {
      qq = i;
      break;
    }
  if (qq < 0) return;  // not in the active set

  for (int i = qq; i < iq - 1; ++i) {
    active(i) = active(i + 1);
    u(i) = u(i + 1);
    r_mat.col(i) = r_mat.col(i + 1);
  }
  active(iq - 1) = active(iq);
  u(iq - 1) = u(iq);
  active(iq) = 0;
  u(iq) = 0.0;
  r_mat.col(iq - 1).setZero();
  --iq;
  if (iq == 0) return;

  for (int j = qq; j < iq; ++j) {
    double cc = r_mat(j, j);
    double ss = r_mat(j + 1, j);
    const double h = std::hypot(cc, ss);
    if (h == 0.0) continue;
    cc /= h;
    ss /= h;
    r_mat(j + 1, j) = 0.0;
    if (cc < 0.0) {
      r_mat(j, j) = -h;
      cc = -cc;
      ss = -ss;
    } else {
      r_mat(j, j) = h;
    }
    const double xny = ss / (1.0 + cc);
    for (int k = j + 1; k < iq; ++k) {
      const double t1 = r_mat(j, k);
      const double t2 = r_mat(j + 1, k);
      r_mat(j, k) = t1 * cc + t2 * ss;
      r_mat(j + 1, k) = xny * (t1 + r_mat(j, k)) - t2;
    }
    for (int k = 0; k < n; ++k) {
      const double t1 = j_mat(k, j);
      const double t2 = j_mat(k, j + 1);
      j_mat(k, j) = t1 * cc + t2 * ss;
      j_mat(k, j + 1) = xny * (j_mat(k, j) + t1) - t2;
    }
  }
}

}  // namespace

QpSolution solve(const QpProblem& problem, const QpOptions& options) {
  problem.validate();
  const int n = problem.size();
  const int n_eq = static_cast<int>(problem.b_eq.size());

  // Gather inequality normals as columns: general rows, then finite bounds.
  // Constraint k reads ci.col(k)^T x >= ci_rhs(k).
  std::vector<int> bound_var;
  std::vector<double> bound_sign;
  std::vector<double> bound_rhs;
  if (problem.lb.size())
    for (int i = 0; i < n; ++i)
      if (std::isfinite(problem.lb(i))) {
        bound_var.push_back(i);
        bound_sign.push_back(1.0);
        bound_rhs.push_back(problem.lb(i));
      }
  if (problem.ub.size())
    for (int i = 0; i < n; ++i)
      if (std::isfinite(problem.ub(i))) {
        bound_var.push_back(i);
        bound_sign.push_back(-1.0);
        bound_rhs.push_back(-problem.ub(i));
      }
  const int m_gen = static_cast<int>(problem.b_in.size());
  const int m_in = m_gen + static_cast<int>(bound_var.size());

  MatX ci(n, m_in);
  VecX ci_rhs(m_in);
  if (m_gen) {
    ci.leftCols(m_gen) = problem.a_in.transpose();
    ci_rhs.head(m_gen) = problem.b_in;
  }
  for (int k = 0; k < static_cast<int>(bound_var.size()); ++k) {
    ci.col(m_gen + k).setZero();
    ci.col(m_gen + k)(bound_var[k]) = bound_sign[k];
    ci_rhs(m_gen + k) = bound_rhs[k];
  }

  QpSolution sol;
  const auto finish = [&](QpStatus status, const VecX& x, int iterations,
                          const Eigen::VectorXi& active, const VecX& u,
                          int iq) {
    sol.status = status;
    sol.x = x;
    sol.iterations = iterations;
    sol.objective = 0.5 * x.dot(problem.h * x) + problem.f.dot(x);

    double primal = 0.0;
    if (n_eq) primal = (problem.a_eq * x - problem.b_eq).cwiseAbs().maxCoeff();
    for (int k = 0; k < m_in; ++k)
      primal = std::max(primal, ci_rhs(k) - ci.col(k).dot(x));
    sol.primal_residual = std::max(primal, 0.0);

    VecX grad = problem.h * x + problem.f;
    for (int i = 0; i < iq; ++i) {
      const int a = active(i);
      if (a < 0)
        grad -= u(i) * problem.a_eq.row(-a - 1).transpose();
      else
        grad -= u(i) * ci.col(a);
    }
    sol.dual_residual = grad.cwiseAbs().maxCoeff();
    return sol;
  };

  // Regularize a semidefinite H so the Cholesky factorization exists.
  MatX g = 0.5 * (problem.h + problem.h.transpose());
  {
    Eigen::SelfAdjointEigenSolver<MatX> es(g, Eigen::EigenvaluesOnly);
    const double min_eig = es.eigenvalues().minCoeff();
    if (min_eig < 1e-12) {
      g.diagonal().array() += 1e-10 + std::max(0.0, -min_eig);
      sol.regularized = true;
    }
  }
  Eigen::LLT<MatX> llt(g);
  if (llt.info() != Eigen::Success) {
    g.diagonal().array() += 1e-8;
    llt.compute(g);
    sol.regularized = true;
    if (llt.info() != Eigen::Success)
      throw ConfigError("QP Hessian is not positive semidefinite");
  }

  MatX j_mat =
      llt.matrixL().transpose().solve(MatX::Identity(n, n));
  VecX x = llt.solve(-problem.f);

  MatX r_mat = MatX::Zero(n, n);
  double r_norm = 1.0;
  int iq = 0;
  VecX u = VecX::Zero(n_eq + m_in + 1);
  Eigen::VectorXi active = Eigen::VectorXi::Zero(n_eq + m_in + 1);
  VecX d(n), z(n), r(n);

  const double scale =
      1.0 + std::max({x.cwiseAbs().maxCoeff(),
                      n_eq ? problem.b_eq.cwiseAbs().maxCoeff() : 0.0,
                      m_in ? ci_rhs.cwiseAbs().maxCoeff() : 0.0});
  const double tol = options.eps_abs + options.eps_rel * scale;
  const int max_iter =
      options.max_iter > 0 ? options.max_iter : 50 * (n + n_eq + m_in + 10);

  int iterations = 0;

  for (int i = 0; i < n_eq; ++i) {
    const VecX np = problem.a_eq.row(i).transpose();
    compute_step_direction(j_mat, r_mat, np, iq, d, z, r);
    double t2 = 0.0;
    const double zn = z.dot(np);
    if (std::abs(zn) > 1e-30) t2 = (problem.b_eq(i) - np.dot(x)) / zn;
    x += t2 * z;
    if (iq > 0) u.head(iq) -= t2 * r.head(iq);
    u(iq) = t2;
    active(iq) = -i - 1;
    if (!add_constraint(r_mat, j_mat, d, iq, r_norm))
      return finish(QpStatus::Infeasible, x, iterations, active, u, iq);
  }

  VecX s = VecX::Zero(m_in);
  std::vector<bool> is_active(m_in, false), excluded(m_in, false);
  VecX u_saved;
  Eigen::VectorXi active_saved;
  VecX x_saved;
  int iq_saved = 0;

  while (true) {
    if (++iterations > max_iter)
      return finish(QpStatus::MaxIter, x, iterations, active, u, iq);

    // Step 1: most violated inactive constraint (lowest index on ties).
    for (int k = 0; k < m_in; ++k) {
      excluded[k] = false;
      s(k) = ci.col(k).dot(x) - ci_rhs(k);
    }
    u_saved = u;
    active_saved = active;
    x_saved = x;
    iq_saved = iq;

    bool retry = true;
    while (retry) {
      retry = false;
      double ss = -tol;
      int ip = -1;
      for (int k = 0; k < m_in; ++k)
        if (!is_active[k] && !excluded[k] && s(k) < ss) {
          ss = s(k);
          ip = k;
        }
      if (ip < 0)
        return finish(QpStatus::Optimal, x, iterations, active, u, iq);

      const VecX np = ci.col(ip);
      u(iq) = 0.0;
      active(iq) = ip;

      while (true) {
        if (++iterations > max_iter)
          return finish(QpStatus::MaxIter, x, iterations, active, u, iq);
        compute_step_direction(j_mat, r_mat, np, iq, d, z, r);

        double t1 = kInf;
        int drop = -1;
        for (int k = n_eq; k < iq; ++k)
          if (r(k) > 0.0 && u(k) / r(k) < t1) {
            t1 = u(k) / r(k);
            drop = active(k);
          }
        const double zn = z.dot(np);
        const double t2 = std::abs(zn) > 1e-30 ? -s(ip) / zn : kInf;
        const double t = std::min(t1, t2);

        if (t >= kInf)
          return finish(QpStatus::Infeasible, x, iterations, active, u, iq);

        if (t2 >= kInf) {
          // Dual-only step: drop the blocking constraint and retry.
          if (iq > 0) u.head(iq) -= t * r.head(iq);
          u(iq) += t;
          is_active[drop] = false;
          delete_constraint(r_mat, j_mat, active, u, n_eq, iq, drop);
          continue;
        }

        x += t * z;
        if (iq > 0) u.head(iq) -= t * r.head(iq);
        u(iq) += t;

        if (t2 <= t1) {
          // Full step: constraint ip becomes active.
          if (!add_constraint(r_mat, j_mat, d, iq, r_norm)) {
            // Degenerate normal: exclude ip this pass and restore state.
            excluded[ip] = true;
            delete_constraint(r_mat, j_mat, active, u, n_eq, iq, ip);
            u = u_saved;
            active = active_saved;
            x = x_saved;
            iq = iq_saved;
            std::fill(is_active.begin(), is_active.end(), false);
            for (int i = n_eq; i < iq; ++i) is_active[active(i)] = true;
            retry = true;
            break;
          }
          is_active[ip] = true;
          break;
        }

        // Partial step: drop the blocking constraint and keep pursuing ip.
        is_active[drop] = false;
        delete_constraint(r_mat, j_mat, active, u, n_eq, iq, drop);
        s(ip) = np.dot(x) - ci_rhs(ip);
      }
    }
  }
}

}  // namespace ovac
