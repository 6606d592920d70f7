#pragma once

#include <string>

#include <Eigen/Dense>
#include <Eigen/Sparse>

namespace gridgate {

/// Convex quadratic program  min 0.5 x'Px + q'x  s.t.  Ax <= b
/// with P symmetric positive semidefinite.
struct QpProblem {
  Eigen::SparseMatrix<double> p;  // n x n
  Eigen::VectorXd q;              // n
  Eigen::SparseMatrix<double> a;  // m x n
  Eigen::VectorXd b;              // m
};

struct QpOptions {
  int max_iterations = 200;
  double tolerance = 1e-9;  // scaled residual target
  bool equilibrate = true;
  /// Active-set refinement of the converged interior point (kept only when
  /// it certifies better).
  bool polish = true;
};

struct QpResult {
  Eigen::VectorXd x;
  Eigen::VectorXd z;  // dual multipliers of Ax <= b, z >= 0
  bool optimal = false;
  bool polished = false;
  int iterations = 0;
  double objective = 0.0;
  double primal_residual = 0.0;
  double dual_residual = 0.0;
  double comp_residual = 0.0;
  /// max of the scaled primal, dual and complementarity residuals, recomputed
  /// on the unscaled problem at the returned point.
  double kkt_residual = 0.0;
  std::string message;
};

/// Mehrotra predictor-corrector interior-point method with Ruiz
/// equilibration; normal-equation solves via sparse LDLT.
QpResult solve_qp(const QpProblem& prob, const QpOptions& opts = {});

}  // namespace gridgate
