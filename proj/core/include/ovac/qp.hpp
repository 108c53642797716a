#pragma once

#include "ovac/types.hpp"

namespace ovac {

/// Dense convex QP in standard form:
///   minimize 1/2 x^T H x + f^T x
///   subject to a_eq x = b_eq, a_in x >= b_in, lb <= x <= ub.
/// Empty matrices/vectors mean the block is absent; +-inf bound entries are
/// treated as absent.
struct QpProblem {
  MatX h;
  VecX f;
  MatX a_eq;
  VecX b_eq;
  MatX a_in;
  VecX b_in;
  VecX lb;
  VecX ub;

  int size() const { return static_cast<int>(f.size()); }
  void validate() const;
};

enum class QpStatus { Optimal, Infeasible, MaxIter };

const char* to_string(QpStatus status);

struct QpSolution {
  VecX x;
  double objective = 0.0;
  QpStatus status = QpStatus::Infeasible;
  int iterations = 0;
  double primal_residual = 0.0;  ///< max constraint violation
  double dual_residual = 0.0;    ///< stationarity residual, inf norm
  bool regularized = false;      ///< H needed a diagonal bump
};

struct QpOptions {
  int max_iter = 0;  ///< 0 = automatic (scales with problem size)
  double eps_abs = 1e-8;
  double eps_rel = 1e-8;
};

/// Dual active-set solve (Goldfarb-Idnani). Constraints hold exactly at
/// termination; deterministic for identical inputs, ties broken by lowest
/// constraint index.
QpSolution solve(const QpProblem& problem, const QpOptions& options = {});

}  // namespace ovac
