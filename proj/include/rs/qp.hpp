#pragma once

#include <Eigen/Dense>
#include <vector>

namespace rs {

// Dense strictly convex QP
//   min 1/2 x^T H x + g^T x   s.t.  lb <= A x <= ub  (row-wise)
struct QPProblem {
  Eigen::MatrixXd H;
  Eigen::VectorXd g;
  Eigen::MatrixXd A;  // one row per two-sided constraint; may be 0 x n
  Eigen::VectorXd lb, ub;
};

enum class QPStatus { Optimal, Infeasible, IterationCap };

// Active constraint: row index and bound side (+1 upper, -1 lower).
using ActiveSet = std::vector<std::pair<int, int>>;

struct QPSolution {
  Eigen::VectorXd x;
  QPStatus status = QPStatus::Optimal;
  double kkt_residual = 0.0;
  ActiveSet active_set;
};

class QPSolver {
 public:
  // Active-set iteration; enters the most violated constraint, ties broken
  // by lowest row index. Deterministic and warm-startable.
  QPSolution solve(const QPProblem& problem,
                   const ActiveSet* warm_start = nullptr) const;

  int iteration_cap = 200;
  double feasibility_tol = 1e-9;
};

// Stationarity + primal feasibility + complementarity residual (inf-norm).
double verify_kkt(const QPProblem& problem, const QPSolution& solution);

}  // namespace rs
