#pragma once

#include <Eigen/Dense>
#include <stdexcept>
#include <vector>

namespace rs {

// Planar n-link revolute arm with a disc end effector at the tip of the
// last link. Joint-side dynamics use M(q) plus a diagonal apparent motor
// inertia, matching a torque-controlled arm with rigid transmission.
struct RobotModel {
  int n_links = 0;
  Eigen::VectorXd link_lengths;   // m
  Eigen::VectorXd link_masses;    // kg
  Eigen::VectorXd link_inertias;  // kg m^2, about link COM
  Eigen::VectorXd com_offsets;    // m along the link from its joint
  Eigen::VectorXd motor_inertia;  // kg m^2 per joint, diagonal B_theta
  Eigen::Vector3d base_pose = Eigen::Vector3d::Zero();  // x, y, theta
  Eigen::VectorXd q_min, q_max;      // rad
  Eigen::VectorXd dq_min, dq_max;    // rad/s
  Eigen::VectorXd tau_min, tau_max;  // N m
  double ee_radius = 0.02;           // m, contact disc

  void validate() const;
};

// Free rectangular body sliding on the ground plane. Restitution is fixed
// at 0: contacts are perfectly inelastic and sustained.
struct ObjectModel {
  double mass = 1.0;                 // kg
  double inertia = 0.01;             // kg m^2
  Eigen::Vector2d half_extents = {0.1, 0.1};  // m
  double surface_friction_mu = 0.3;  // object-ground
  double contact_friction_mu = 0.5;  // end-effector-object
  double restitution = 0.0;

  void validate() const;
};

struct ContactPoint {
  Eigen::Vector2d position;  // world
  Eigen::Vector2d normal;    // unit, from object into end effector
  double gap = 0.0;          // m, signed
  double normal_rel_velocity = 0.0;  // m/s, (v_ee - v_obj) . n
  int robot_index = 0;
};

struct WorldState {
  std::vector<Eigen::VectorXd> q;   // per robot
  std::vector<Eigen::VectorXd> dq;  // per robot
  Eigen::Vector3d object_pose = Eigen::Vector3d::Zero();   // x, y, theta
  Eigen::Vector3d object_twist = Eigen::Vector3d::Zero();  // vx, vy, omega
  double time = 0.0;
  std::vector<ContactPoint> active_contacts;
};

struct SolverFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Wrap to (-pi, pi].
double wrap_angle(double x);

}  // namespace rs
