#pragma once

#include <optional>

#include "rs/model.hpp"

namespace rs {

// Closed-form inverse kinematics for the end-effector pose (p, theta).
// For a 4-link arm the first joint is held at xi_first and the remaining
// three joints are solved; for a 3-link arm all joints are solved and
// xi_first is ignored. Returns nullopt when the pose is unreachable or a
// joint limit is violated.
std::optional<Eigen::VectorXd> inverse_kinematics(const RobotModel& model,
                                                  const Eigen::Vector2d& p,
                                                  double theta, double xi_first,
                                                  bool elbow_up = true);

// Joint velocities realizing an end-effector twist with the first joint
// locked (4-link) or exactly (3-link).
std::optional<Eigen::VectorXd> joint_velocities_for_twist(
    const RobotModel& model, const Eigen::VectorXd& q,
    const Eigen::Vector3d& twist);

}  // namespace rs
