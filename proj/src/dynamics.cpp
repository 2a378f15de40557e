#include "rs/dynamics.hpp"

#include <cmath>

namespace rs {

namespace {

inline Eigen::Vector2d dir(double th) { return {std::cos(th), std::sin(th)}; }
inline Eigen::Vector2d perp(const Eigen::Vector2d& v) { return {-v.y(), v.x()}; }
inline double cross2(const Eigen::Vector2d& a, const Eigen::Vector2d& b) {
  return a.x() * b.y() - a.y() * b.x();
}

struct ChainState {
  std::vector<double> th, w, aa;          // absolute angle, ang vel, ang acc
  std::vector<Eigen::Vector2d> jp, ja;    // joint positions and accelerations
};

ChainState propagate(const RobotModel& m, const Eigen::VectorXd& q,
                     const Eigen::VectorXd& dq, const Eigen::VectorXd& ddq) {
  const int n = m.n_links;
  ChainState s;
  s.th.resize(n);
  s.w.resize(n);
  s.aa.resize(n);
  s.jp.resize(n + 1);
  s.ja.resize(n + 1);
  double th = m.base_pose.z(), w = 0.0, aa = 0.0;
  s.jp[0] = m.base_pose.head<2>();
  s.ja[0] = Eigen::Vector2d::Zero();
  for (int k = 0; k < n; ++k) {
    th += q[k];
    w += dq[k];
    aa += ddq[k];
    s.th[k] = th;
    s.w[k] = w;
    s.aa[k] = aa;
    const Eigen::Vector2d u = dir(th);
    const Eigen::Vector2d up = perp(u);
    s.jp[k + 1] = s.jp[k] + m.link_lengths[k] * u;
    s.ja[k + 1] = s.ja[k] + m.link_lengths[k] * (aa * up - w * w * u);
  }
  return s;
}

}  // namespace

Eigen::VectorXd inverse_dynamics(const RobotModel& m, const Eigen::VectorXd& q,
                                 const Eigen::VectorXd& dq,
                                 const Eigen::VectorXd& ddq,
                                 const Eigen::Vector2d& gravity) {
  const int n = m.n_links;
  const ChainState s = propagate(m, q, dq, ddq);

  // Per-link COM force and moment, then a backward sweep over the chain.
  Eigen::VectorXd tau(n);
  Eigen::Vector2d f_child = Eigen::Vector2d::Zero();
  double n_child = 0.0;
  for (int k = n - 1; k >= 0; --k) {
    const Eigen::Vector2d u = dir(s.th[k]);
    const Eigen::Vector2d up = perp(u);
    const Eigen::Vector2d pc = s.jp[k] + m.com_offsets[k] * u;
    const Eigen::Vector2d ac =
        s.ja[k] + m.com_offsets[k] * (s.aa[k] * up - s.w[k] * s.w[k] * u);
    const Eigen::Vector2d F = m.link_masses[k] * (ac - gravity);
    const double N = m.link_inertias[k] * s.aa[k];
    const double moment = N + n_child + cross2(pc - s.jp[k], F) +
                          cross2(s.jp[k + 1] - s.jp[k], f_child);
    tau[k] = moment;
    f_child += F;
    n_child = moment;
  }
  return tau;
}

Eigen::MatrixXd mass_matrix(const RobotModel& m, const Eigen::VectorXd& q) {
  const int n = m.n_links;
  const Eigen::VectorXd zero = Eigen::VectorXd::Zero(n);
  Eigen::MatrixXd M(n, n);
  for (int j = 0; j < n; ++j) {
    Eigen::VectorXd ej = Eigen::VectorXd::Zero(n);
    ej[j] = 1.0;
    M.col(j) = inverse_dynamics(m, q, zero, ej, Eigen::Vector2d::Zero());
  }
  return 0.5 * (M + M.transpose());
}

Eigen::VectorXd bias_forces(const RobotModel& m, const Eigen::VectorXd& q,
                            const Eigen::VectorXd& dq,
                            const Eigen::Vector2d& gravity) {
  const Eigen::VectorXd zero = Eigen::VectorXd::Zero(m.n_links);
  return inverse_dynamics(m, q, dq, zero, gravity);
}

std::pair<Eigen::Vector2d, double> forward_kinematics(const RobotModel& m,
                                                      const Eigen::VectorXd& q) {
  const int n = m.n_links;
  double th = m.base_pose.z();
  Eigen::Vector2d p = m.base_pose.head<2>();
  for (int k = 0; k < n; ++k) {
    th += q[k];
    p += m.link_lengths[k] * dir(th);
  }
  return {p, wrap_angle(th)};
}

Eigen::MatrixXd geometric_jacobian(const RobotModel& m,
                                   const Eigen::VectorXd& q) {
  const int n = m.n_links;
  const Eigen::VectorXd zero = Eigen::VectorXd::Zero(n);
  const ChainState s = propagate(m, q, zero, zero);
  const Eigen::Vector2d p_ee = s.jp[n];
  Eigen::MatrixXd J(3, n);
  for (int i = 0; i < n; ++i) {
    J.block<2, 1>(0, i) = perp(p_ee - s.jp[i]);
    J(2, i) = 1.0;
  }
  return J;
}

Eigen::Vector3d jacobian_dot_qdot(const RobotModel& m, const Eigen::VectorXd& q,
                                  const Eigen::VectorXd& dq) {
  const Eigen::VectorXd zero = Eigen::VectorXd::Zero(m.n_links);
  const ChainState s = propagate(m, q, dq, zero);
  Eigen::Vector3d a;
  a.head<2>() = s.ja[m.n_links];
  a.z() = 0.0;
  return a;
}

Eigen::MatrixXd joint_space_inertia(const RobotModel& m,
                                    const Eigen::VectorXd& q) {
  Eigen::MatrixXd M = mass_matrix(m, q);
  M.diagonal() += m.motor_inertia;
  return M;
}

Eigen::Matrix3d task_space_inertia(const RobotModel& m,
                                   const Eigen::VectorXd& q) {
  const Eigen::MatrixXd J = geometric_jacobian(m, q);
  const Eigen::MatrixXd Mb = joint_space_inertia(m, q);
  Eigen::Matrix3d A = J * Mb.ldlt().solve(J.transpose());
  const double eps = 1e-8 * A.trace() / 3.0;
  A.diagonal().array() += eps;
  return A.inverse();
}

double kinetic_energy(const RobotModel& m, const Eigen::VectorXd& q,
                      const Eigen::VectorXd& dq) {
  return 0.5 * dq.dot(joint_space_inertia(m, q) * dq);
}

}  // namespace rs
