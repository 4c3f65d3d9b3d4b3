#pragma once

#include <Eigen/Dense>

#include <string_view>

namespace pcpa {

/// min c^T x  s.t.  A x = b,  lower <= x <= upper.
///
/// Lower bounds must be finite; upper bounds may be +inf.
struct LinearProgram {
  Eigen::VectorXd cost;
  Eigen::MatrixXd eq_matrix;
  Eigen::VectorXd eq_rhs;
  Eigen::VectorXd lower;
  Eigen::VectorXd upper;

  Eigen::Index num_variables() const { return cost.size(); }
  Eigen::Index num_constraints() const { return eq_matrix.rows(); }
  /// Throws ValidationError on inconsistent dimensions or bounds.
  void validate() const;
};

enum class LpStatus { Optimal, Infeasible, Unbounded, IterationLimit };

std::string_view to_string(LpStatus status);

struct LpSolution {
  LpStatus status = LpStatus::Infeasible;
  Eigen::VectorXd x;
  double objective = 0.0;
  int iterations = 0;
  double primal_residual = 0.0;    // ||A x - b||_inf
  double bound_violation = 0.0;    // max distance outside [lower, upper]
  double dual_infeasibility = 0.0; // max reduced-cost sign violation, relative to max|c|
};

struct SimplexOptions {
  double feasibility_tol = 1e-9;
  double optimality_tol = 1e-10;
  double pivot_tol = 1e-10;
  double certify_tol = 1e-8;
  int max_iterations = 20000;
};

/// Bounded-variable primal simplex (two phases, Bland's rule).
///
/// The basis is refactored from scratch at every iteration, which is cheap at
/// the sizes this toolkit produces (tens of rows). Redundant equality rows are
/// dropped after phase 1. An optimal answer is certified against the original
/// data; a failed certificate raises SolverError.
LpSolution solve_lp(const LinearProgram& lp, const SimplexOptions& options = {});

}  // namespace pcpa
