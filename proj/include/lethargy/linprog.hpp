#pragma once

#include <Eigen/Dense>
#include <vector>

namespace lethargy {

/// minimize cost^T x  subject to  a_ub x <= b_ub,  a_eq x = b_eq,
/// x_j >= 0 unless free[j].
struct LinearProgram {
  Eigen::VectorXd cost;
  Eigen::MatrixXd a_ub;
  Eigen::VectorXd b_ub;
  Eigen::MatrixXd a_eq;
  Eigen::VectorXd b_eq;
  std::vector<bool> free;  // empty: every variable is nonnegative
};

enum class LpStatus { kOptimal, kInfeasible, kUnbounded, kIterationLimit };

struct LpSolution {
  LpStatus status = LpStatus::kIterationLimit;
  Eigen::VectorXd x;
  double objective = 0.0;
  int iterations = 0;
  /// max(primal infeasibility, dual infeasibility) at the returned basis.
  double residual = 0.0;
};

/// Dense two-phase tableau simplex. Dantzig pricing with a switch to Bland's
/// rule on degenerate stalls; the final basis is re-solved from the original
/// data so x and the objective do not carry tableau drift.
LpSolution solve_lp(const LinearProgram& lp, int max_iterations = 200000);

}  // namespace lethargy
