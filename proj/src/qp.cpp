#include "rs/qp.hpp"

#include <cmath>
#include <stdexcept>

namespace rs {

namespace {

Eigen::MatrixXd regularized(const Eigen::MatrixXd& H) {
  const int n = static_cast<int>(H.rows());
  Eigen::MatrixXd Hr = 0.5 * (H + H.transpose());
  Hr.diagonal().array() += 1e-8 * Hr.trace() / n;
  return Hr;
}

void check_dims(const QPProblem& p) {
  const auto n = p.H.rows();
  const auto m = p.A.rows();
  if (p.H.cols() != n || p.g.size() != n ||
      (m > 0 && p.A.cols() != n) || p.lb.size() != m || p.ub.size() != m)
    throw std::invalid_argument("QPProblem: dimension mismatch");
}

}  // namespace

QPSolution QPSolver::solve(const QPProblem& p, const ActiveSet* warm) const {
  check_dims(p);
  const int n = static_cast<int>(p.H.rows());
  const int m = static_cast<int>(p.A.rows());
  const Eigen::MatrixXd Hs = 0.5 * (p.H + p.H.transpose());
  // regularization is applied only when the plain KKT system is deficient
  const Eigen::MatrixXd Hr = regularized(p.H);

  ActiveSet W;
  if (warm) {
    for (const auto& [row, side] : *warm)
      if (row >= 0 && row < m && (side == 1 || side == -1)) {
        bool dup = false;
        for (const auto& e : W)
          if (e.first == row) dup = true;
        if (!dup) W.emplace_back(row, side);
      }
  }

  QPSolution sol;
  sol.x = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd mu;

  for (int it = 0; it < iteration_cap; ++it) {
    const int k = static_cast<int>(W.size());
    Eigen::MatrixXd kkt = Eigen::MatrixXd::Zero(n + k, n + k);
    kkt.topLeftCorner(n, n) = Hs;
    Eigen::VectorXd rhs(n + k);
    rhs.head(n) = -p.g;
    for (int j = 0; j < k; ++j) {
      kkt.block(n + j, 0, 1, n) = p.A.row(W[j].first);
      kkt.block(0, n + j, n, 1) = p.A.row(W[j].first).transpose();
      rhs[n + j] = W[j].second > 0 ? p.ub[W[j].first] : p.lb[W[j].first];
    }
    Eigen::FullPivLU<Eigen::MatrixXd> lu(kkt);
    lu.setThreshold(1e-12);
    if (lu.rank() < n + k) {
      kkt.topLeftCorner(n, n) = Hr;
      lu.compute(kkt);
      if (lu.rank() < n + k) {
        if (W.empty()) break;  // hopeless Hessian
        // linearly dependent active rows; drop the newest
        W.pop_back();
        continue;
      }
    }
    const Eigen::VectorXd z = lu.solve(rhs);
    sol.x = z.head(n);
    mu = z.tail(k);

    // most violated inactive constraint enters
    const Eigen::VectorXd Ax = m > 0 ? (p.A * sol.x).eval() : Eigen::VectorXd();
    double worst = feasibility_tol;
    int worst_row = -1, worst_side = 0;
    for (int r = 0; r < m; ++r) {
      bool active = false;
      for (const auto& e : W)
        if (e.first == r) active = true;
      if (active) continue;
      const double vu = Ax[r] - p.ub[r];
      const double vl = p.lb[r] - Ax[r];
      if (vu > worst) {
        worst = vu;
        worst_row = r;
        worst_side = 1;
      }
      if (vl > worst) {
        worst = vl;
        worst_row = r;
        worst_side = -1;
      }
    }

    if (worst_row >= 0) {
      if (k == n) {
        // full active set: free a wrong-sign multiplier first
        int drop = -1;
        double most = -1e-12;
        for (int j = 0; j < k; ++j) {
          const double s = W[j].second * mu[j];
          if (s < most) {
            most = s;
            drop = j;
          }
        }
        if (drop < 0) {
          sol.status = QPStatus::Infeasible;
          sol.active_set = W;
          sol.kkt_residual = verify_kkt(p, sol);
          return sol;
        }
        W.erase(W.begin() + drop);
      }
      W.emplace_back(worst_row, worst_side);
      continue;
    }

    // feasible: check multiplier signs (upper needs mu >= 0, lower <= 0)
    int drop = -1;
    double most = -1e-10;
    for (int j = 0; j < k; ++j) {
      const double s = W[j].second * mu[j];
      if (s < most) {
        most = s;
        drop = j;
      }
    }
    if (drop >= 0) {
      W.erase(W.begin() + drop);
      continue;
    }

    sol.status = QPStatus::Optimal;
    sol.active_set = W;
    sol.kkt_residual = verify_kkt(p, sol);
    return sol;
  }

  sol.status = QPStatus::IterationCap;
  sol.active_set = W;
  sol.kkt_residual = verify_kkt(p, sol);
  return sol;
}

double verify_kkt(const QPProblem& p, const QPSolution& sol) {
  check_dims(p);
  const int m = static_cast<int>(p.A.rows());
  const int k = static_cast<int>(sol.active_set.size());
  const Eigen::VectorXd grad = p.H * sol.x + p.g;

  Eigen::VectorXd mu = Eigen::VectorXd::Zero(k);
  Eigen::VectorXd stat = grad;
  if (k > 0) {
    Eigen::MatrixXd At(p.H.rows(), k);
    for (int j = 0; j < k; ++j)
      At.col(j) = p.A.row(sol.active_set[j].first).transpose();
    mu = At.colPivHouseholderQr().solve(-grad);
    stat = grad + At * mu;
  }
  double res = stat.lpNorm<Eigen::Infinity>();

  if (m > 0) {
    const Eigen::VectorXd Ax = p.A * sol.x;
    res = std::max(res, (Ax - p.ub).maxCoeff());
    res = std::max(res, (p.lb - Ax).maxCoeff());
    for (int j = 0; j < k; ++j) {
      const auto [row, side] = sol.active_set[j];
      const double b = side > 0 ? p.ub[row] : p.lb[row];
      res = std::max(res, std::abs(mu[j] * (Ax[row] - b)));
      res = std::max(res, -side * mu[j]);
    }
  }
  return std::max(res, 0.0);
}

}  // namespace rs
