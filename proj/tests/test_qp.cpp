#include <random>

#include "doctest.h"
#include "oracles.hpp"
#include "rs/qp.hpp"

using namespace rs;

namespace {

Eigen::MatrixXd random_spd(int n, std::mt19937& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  Eigen::MatrixXd a(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) a(i, j) = g(rng);
  return a.transpose() * a + 0.5 * Eigen::MatrixXd::Identity(n, n);
}

}  // namespace

TEST_CASE("unconstrained solve matches the normal-equations oracle") {
  std::mt19937 rng(2);
  QPSolver solver;
  for (int trial = 0; trial < 50; ++trial) {
    const int n = 2 + trial % 6;
    QPProblem p;
    p.H = random_spd(n, rng);
    p.g = Eigen::VectorXd::Random(n);
    p.A.resize(0, n);
    p.lb.resize(0);
    p.ub.resize(0);
    const QPSolution sol = solver.solve(p);
    REQUIRE(sol.status == QPStatus::Optimal);
    const Eigen::VectorXd ref = -p.H.ldlt().solve(p.g);
    CHECK((sol.x - ref).lpNorm<Eigen::Infinity>() < 1e-10);
    CHECK(verify_kkt(p, sol) < 1e-10);
  }
}

TEST_CASE("1-D clamping") {
  QPProblem p;
  p.H.resize(1, 1);
  p.H << 2.0;
  p.g.resize(1);
  p.g << -2.0;
  p.A.resize(1, 1);
  p.A << 1.0;
  p.lb.resize(1);
  p.lb << 0.0;
  p.ub.resize(1);
  p.ub << 0.3;
  QPSolver solver;
  const QPSolution sol = solver.solve(p);
  REQUIRE(sol.status == QPStatus::Optimal);
  CHECK(sol.x[0] == doctest::Approx(0.3).epsilon(1e-12));
  // the bound is active with complementarity satisfied
  CHECK(verify_kkt(p, sol) < 1e-10);
}

TEST_CASE("random box problems match the projected-gradient oracle") {
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  QPSolver solver;
  for (int trial = 0; trial < 100; ++trial) {
    const int n = 6;
    QPProblem p;
    p.H = random_spd(n, rng);
    p.g = Eigen::VectorXd::Random(n) * 2.0;
    p.A = Eigen::MatrixXd::Identity(n, n);
    p.lb.resize(n);
    p.ub.resize(n);
    for (int k = 0; k < n; ++k) {
      const double a = u(rng), b = u(rng);
      p.lb[k] = std::min(a, b);
      p.ub[k] = std::max(a, b);
    }
    const QPSolution sol = solver.solve(p);
    REQUIRE(sol.status == QPStatus::Optimal);
    const Eigen::VectorXd ref =
        oracle::projected_gradient_box(p.H, p.g, p.lb, p.ub);
    CHECK(oracle::qp_objective(p.H, p.g, sol.x) <=
          oracle::qp_objective(p.H, p.g, ref) + 1e-8);
    CHECK((p.A * sol.x - p.lb).minCoeff() > -1e-8);
    CHECK((p.ub - p.A * sol.x).minCoeff() > -1e-8);
  }
}

TEST_CASE("general constraint rows: KKT certified") {
  std::mt19937 rng(11);
  std::normal_distribution<double> g(0.0, 1.0);
  QPSolver solver;
  for (int trial = 0; trial < 100; ++trial) {
    const int n = 5, m = 8;
    QPProblem p;
    p.H = random_spd(n, rng);
    p.g = Eigen::VectorXd::Random(n);
    p.A.resize(m, n);
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < n; ++j) p.A(i, j) = g(rng);
    p.lb = Eigen::VectorXd::Constant(m, -1.0);
    p.ub = Eigen::VectorXd::Constant(m, 1.0);  // x = 0 always feasible
    const QPSolution sol = solver.solve(p);
    REQUIRE(sol.status == QPStatus::Optimal);
    CHECK(verify_kkt(p, sol) < 1e-6);
    CHECK((p.A * sol.x - p.lb).minCoeff() > -1e-8);
    CHECK((p.ub - p.A * sol.x).minCoeff() > -1e-8);
  }
}

TEST_CASE("warm start returns the cold-start solution") {
  std::mt19937 rng(13);
  QPSolver solver;
  for (int trial = 0; trial < 50; ++trial) {
    const int n = 6;
    QPProblem p;
    p.H = random_spd(n, rng);
    p.g = Eigen::VectorXd::Random(n) * 2.0;
    p.A = Eigen::MatrixXd::Identity(n, n);
    p.lb = Eigen::VectorXd::Constant(n, -0.4);
    p.ub = Eigen::VectorXd::Constant(n, 0.4);
    const QPSolution cold = solver.solve(p);
    REQUIRE(cold.status == QPStatus::Optimal);
    const QPSolution warm = solver.solve(p, &cold.active_set);
    REQUIRE(warm.status == QPStatus::Optimal);
    CHECK((warm.x - cold.x).lpNorm<Eigen::Infinity>() < 1e-10);
  }
}

TEST_CASE("infeasible rows are reported as non-optimal") {
  QPProblem p;
  p.H = Eigen::MatrixXd::Identity(1, 1);
  p.g = Eigen::VectorXd::Zero(1);
  p.A.resize(2, 1);
  p.A << 1.0, 1.0;
  p.lb.resize(2);
  p.ub.resize(2);
  p.lb << 1.0, -2.0;
  p.ub << 2.0, -1.0;  // x >= 1 and x <= -1 cannot both hold
  QPSolver solver;
  const QPSolution sol = solver.solve(p);
  CHECK(sol.status != QPStatus::Optimal);
}

TEST_CASE("verify_kkt flags perturbed solutions") {
  std::mt19937 rng(17);
  QPProblem p;
  p.H = random_spd(4, rng);
  p.g = Eigen::VectorXd::Random(4);
  p.A.resize(0, 4);
  p.lb.resize(0);
  p.ub.resize(0);
  QPSolver solver;
  QPSolution sol = solver.solve(p);
  REQUIRE(sol.status == QPStatus::Optimal);
  CHECK(verify_kkt(p, sol) < 1e-10);
  sol.x.array() += 0.01;
  CHECK(verify_kkt(p, sol) > 1e-3);
}
