#pragma once

#include "rs/model.hpp"

namespace rs {

// Link-side mass matrix M(q), without motor inertia.
Eigen::MatrixXd mass_matrix(const RobotModel& model, const Eigen::VectorXd& q);

// Gravity + centrifugal + Coriolis torques h(q, dq). Gravity is an in-plane
// acceleration vector; for arms mounted in the horizontal plane it is zero.
Eigen::VectorXd bias_forces(const RobotModel& model, const Eigen::VectorXd& q,
                            const Eigen::VectorXd& dq,
                            const Eigen::Vector2d& gravity);

// Joint torques for a prescribed joint acceleration (link-side only,
// motor inertia excluded).
Eigen::VectorXd inverse_dynamics(const RobotModel& model,
                                 const Eigen::VectorXd& q,
                                 const Eigen::VectorXd& dq,
                                 const Eigen::VectorXd& ddq,
                                 const Eigen::Vector2d& gravity);

// End effector pose; theta wrapped to (-pi, pi].
std::pair<Eigen::Vector2d, double> forward_kinematics(const RobotModel& model,
                                                      const Eigen::VectorXd& q);

// 3 x n map from dq to end-effector (vx, vy, omega).
Eigen::MatrixXd geometric_jacobian(const RobotModel& model,
                                   const Eigen::VectorXd& q);

// Jdot * dq term of the end-effector acceleration.
Eigen::Vector3d jacobian_dot_qdot(const RobotModel& model,
                                  const Eigen::VectorXd& q,
                                  const Eigen::VectorXd& dq);

// M(q) + diag(B_theta), the inertia seen by commanded torques.
Eigen::MatrixXd joint_space_inertia(const RobotModel& model,
                                    const Eigen::VectorXd& q);

// Task-space inertia Lambda = (J (M + B)^-1 J^T)^-1, ridge-regularized.
Eigen::Matrix3d task_space_inertia(const RobotModel& model,
                                   const Eigen::VectorXd& q);

// Kinetic energy of the arm including motor inertia.
double kinetic_energy(const RobotModel& model, const Eigen::VectorXd& q,
                      const Eigen::VectorXd& dq);

}  // namespace rs
