#include "rs/kinematics.hpp"

#include <cmath>

#include "rs/dynamics.hpp"

namespace rs {

namespace {

inline Eigen::Vector2d dir(double th) { return {std::cos(th), std::sin(th)}; }

// Two-revolute subproblem: joints at angles a1 (absolute) and a1 + q2
// reaching from `base` to `target` with lengths la, lb.
std::optional<std::pair<double, double>> two_r(const Eigen::Vector2d& base,
                                               const Eigen::Vector2d& target,
                                               double la, double lb,
                                               bool elbow_up) {
  const Eigen::Vector2d d = target - base;
  const double D2 = d.squaredNorm();
  const double c = (D2 - la * la - lb * lb) / (2.0 * la * lb);
  if (c < -1.0 - 1e-9 || c > 1.0 + 1e-9) return std::nullopt;
  const double cc = std::clamp(c, -1.0, 1.0);
  const double q2 = (elbow_up ? 1.0 : -1.0) * std::acos(cc);
  const double a1 = std::atan2(d.y(), d.x()) -
                    std::atan2(lb * std::sin(q2), la + lb * std::cos(q2));
  return std::make_pair(a1, q2);
}

bool within_limits(const RobotModel& m, const Eigen::VectorXd& q) {
  return (q.array() >= m.q_min.array()).all() &&
         (q.array() <= m.q_max.array()).all();
}

}  // namespace

std::optional<Eigen::VectorXd> inverse_kinematics(const RobotModel& m,
                                                  const Eigen::Vector2d& p,
                                                  double theta, double xi_first,
                                                  bool elbow_up) {
  const double base_th = m.base_pose.z();
  const Eigen::Vector2d base_p = m.base_pose.head<2>();
  Eigen::VectorXd q(m.n_links);

  if (m.n_links == 4) {
    const double th1 = base_th + xi_first;
    const Eigen::Vector2d j2 = base_p + m.link_lengths[0] * dir(th1);
    const Eigen::Vector2d wrist = p - m.link_lengths[3] * dir(theta);
    const auto sol =
        two_r(j2, wrist, m.link_lengths[1], m.link_lengths[2], elbow_up);
    if (!sol) return std::nullopt;
    const auto [th2, q3] = *sol;
    q[0] = xi_first;
    q[1] = wrap_angle(th2 - th1);
    q[2] = wrap_angle(q3);
    q[3] = wrap_angle(theta - (th2 + q3));
  } else if (m.n_links == 3) {
    const Eigen::Vector2d wrist = p - m.link_lengths[2] * dir(theta);
    const auto sol =
        two_r(base_p, wrist, m.link_lengths[0], m.link_lengths[1], elbow_up);
    if (!sol) return std::nullopt;
    const auto [th1, q2] = *sol;
    q[0] = wrap_angle(th1 - base_th);
    q[1] = wrap_angle(q2);
    q[2] = wrap_angle(theta - (th1 + q2));
  } else {
    return std::nullopt;
  }

  if (!within_limits(m, q)) return std::nullopt;
  const auto [p_chk, th_chk] = forward_kinematics(m, q);
  if ((p_chk - p).norm() > 1e-8 ||
      std::abs(wrap_angle(th_chk - theta)) > 1e-8)
    return std::nullopt;
  return q;
}

std::optional<Eigen::VectorXd> joint_velocities_for_twist(
    const RobotModel& m, const Eigen::VectorXd& q,
    const Eigen::Vector3d& twist) {
  const Eigen::MatrixXd J = geometric_jacobian(m, q);
  Eigen::VectorXd dq = Eigen::VectorXd::Zero(m.n_links);
  Eigen::Matrix3d Js;
  int offset;
  if (m.n_links == 4) {
    Js = J.rightCols(3);
    offset = 1;
  } else if (m.n_links == 3) {
    Js = J;
    offset = 0;
  } else {
    return std::nullopt;
  }
  Eigen::FullPivLU<Eigen::Matrix3d> lu(Js);
  lu.setThreshold(1e-8);
  if (lu.rank() < 3) return std::nullopt;
  dq.segment(offset, 3) = lu.solve(twist);
  return dq;
}

}  // namespace rs
