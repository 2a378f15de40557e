#pragma once

// Independent reference implementations used to check the library. These are
// deliberately written from first principles (transform chains, finite
// differences, projected gradient) rather than reusing library code.

#include <Eigen/Dense>
#include <functional>
#include <random>
#include <vector>

#include "rs/model.hpp"
#include "rs/qp.hpp"

namespace oracle {

// Homogeneous-transform chain, nothing shared with the library FK.
inline Eigen::Matrix3d planar_transform(double x, double y, double th) {
  Eigen::Matrix3d t = Eigen::Matrix3d::Identity();
  t(0, 0) = std::cos(th);
  t(0, 1) = -std::sin(th);
  t(1, 0) = std::sin(th);
  t(1, 1) = std::cos(th);
  t(0, 2) = x;
  t(1, 2) = y;
  return t;
}

inline std::pair<Eigen::Vector2d, double> fk(const rs::RobotModel& m,
                                             const Eigen::VectorXd& q) {
  Eigen::Matrix3d t = planar_transform(m.base_pose.x(), m.base_pose.y(),
                                       m.base_pose.z());
  double th = m.base_pose.z();
  for (int k = 0; k < m.n_links; ++k) {
    t = t * planar_transform(0, 0, q[k]) *
        planar_transform(m.link_lengths[k], 0, 0);
    th += q[k];
  }
  return {t.block<2, 1>(0, 2), th};
}

// COM of link k for the FD kinetic/potential energy oracles.
inline Eigen::Vector2d com_position(const rs::RobotModel& m,
                                    const Eigen::VectorXd& q, int k) {
  Eigen::Matrix3d t = planar_transform(m.base_pose.x(), m.base_pose.y(),
                                       m.base_pose.z());
  for (int j = 0; j < k; ++j)
    t = t * planar_transform(0, 0, q[j]) *
        planar_transform(m.link_lengths[j], 0, 0);
  t = t * planar_transform(0, 0, q[k]) *
      planar_transform(m.com_offsets[k], 0, 0);
  return t.block<2, 1>(0, 2);
}

// Kinetic energy from finite-differenced COM positions (link side only).
inline double kinetic_energy_fd(const rs::RobotModel& m,
                                const Eigen::VectorXd& q,
                                const Eigen::VectorXd& dq) {
  const double h = 1e-6;
  double ke = 0.0;
  double w = 0.0;
  for (int k = 0; k < m.n_links; ++k) {
    const Eigen::Vector2d v =
        (com_position(m, q + h * dq, k) - com_position(m, q - h * dq, k)) /
        (2 * h);
    w += dq[k];
    ke += 0.5 * m.link_masses[k] * v.squaredNorm() +
          0.5 * m.link_inertias[k] * w * w;
  }
  return ke;
}

inline double potential(const rs::RobotModel& m, const Eigen::VectorXd& q,
                        const Eigen::Vector2d& gravity) {
  double u = 0.0;
  for (int k = 0; k < m.n_links; ++k)
    u -= m.link_masses[k] * gravity.dot(com_position(m, q, k));
  return u;
}

// Lagrangian torques by nested central differences (link side, no motor).
inline Eigen::VectorXd lagrangian_torques(const rs::RobotModel& m,
                                          const Eigen::VectorXd& q,
                                          const Eigen::VectorXd& dq,
                                          const Eigen::VectorXd& ddq,
                                          const Eigen::Vector2d& gravity) {
  const int n = m.n_links;
  // kinetic energy is exactly quadratic in dq, so the velocity central
  // difference is truncation-free even with a unit step; the large step
  // keeps round-off noise out of the outer time derivative
  const double h_v = 1.0;
  auto dL_ddq = [&](const Eigen::VectorXd& qq, const Eigen::VectorXd& dqq) {
    Eigen::VectorXd out(n);
    for (int k = 0; k < n; ++k) {
      Eigen::VectorXd dp = dqq, dm = dqq;
      dp[k] += h_v;
      dm[k] -= h_v;
      out[k] = (kinetic_energy_fd(m, qq, dp) - kinetic_energy_fd(m, qq, dm)) /
               (2 * h_v);
    }
    return out;
  };
  const double h_t = 3e-4;
  const Eigen::VectorXd d_dt = (dL_ddq(q + h_t * dq, dq + h_t * ddq) -
                                dL_ddq(q - h_t * dq, dq - h_t * ddq)) /
                               (2 * h_t);
  const double h_q = 1e-4;
  Eigen::VectorXd dL_dq(n);
  for (int k = 0; k < n; ++k) {
    Eigen::VectorXd qp = q, qm = q;
    qp[k] += h_q;
    qm[k] -= h_q;
    const double lp = kinetic_energy_fd(m, qp, dq) - potential(m, qp, gravity);
    const double lm = kinetic_energy_fd(m, qm, dq) - potential(m, qm, gravity);
    dL_dq[k] = (lp - lm) / (2 * h_q);
  }
  return d_dt - dL_dq;
}

// RK4 streamline step of an autonomous planar field.
inline Eigen::Vector2d rk4(const std::function<Eigen::Vector2d(
                               const Eigen::Vector2d&)>& f,
                           const Eigen::Vector2d& p, double h) {
  const Eigen::Vector2d k1 = f(p);
  const Eigen::Vector2d k2 = f(p + 0.5 * h * k1);
  const Eigen::Vector2d k3 = f(p + 0.5 * h * k2);
  const Eigen::Vector2d k4 = f(p + h * k3);
  return p + h / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4);
}

// Projected gradient for box-constrained strictly convex QPs:
//   min 1/2 x'Hx + g'x  s.t. lb <= x <= ub
inline Eigen::VectorXd projected_gradient_box(const Eigen::MatrixXd& H,
                                              const Eigen::VectorXd& g,
                                              const Eigen::VectorXd& lb,
                                              const Eigen::VectorXd& ub) {
  const double step =
      1.0 / Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(H)
                .eigenvalues()
                .maxCoeff();
  Eigen::VectorXd x = 0.5 * (lb + ub);
  for (int it = 0; it < 200000; ++it) {
    const Eigen::VectorXd x_new =
        (x - step * (H * x + g)).cwiseMax(lb).cwiseMin(ub);
    if ((x_new - x).lpNorm<Eigen::Infinity>() < 1e-13) return x_new;
    x = x_new;
  }
  return x;
}

inline double qp_objective(const Eigen::MatrixXd& H, const Eigen::VectorXd& g,
                           const Eigen::VectorXd& x) {
  return 0.5 * x.dot(H * x) + g.dot(x);
}

}  // namespace oracle
