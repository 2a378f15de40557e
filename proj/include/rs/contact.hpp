#pragma once

#include "rs/model.hpp"

namespace rs {

struct StepParams {
  double dt = 1e-3;                     // s, physics == control period
  double penetration_tolerance = 1e-4;  // m
  double activation_gap = 1e-3;         // m
  int pgs_iteration_cap = 2000;
  double pgs_tolerance = 1e-10;  // on impulse change
  double baumgarte = 0.2;        // positional correction factor
  double gravity_out_of_plane = 9.81;   // m/s^2, sets object weight
  Eigen::Vector2d arm_gravity = Eigen::Vector2d::Zero();  // in-plane
};

// End-effector disc vs object rectangle, plus gap/velocity bookkeeping.
std::vector<ContactPoint> detect_contacts(const WorldState& world,
                                          const std::vector<RobotModel>& models,
                                          const ObjectModel& object,
                                          const StepParams& params);

// Semi-implicit Euler advance with velocity-level contact resolution
// (restitution 0, Coulomb friction). Torques are saturated at model bounds.
WorldState step(const WorldState& world, const std::vector<RobotModel>& models,
                const ObjectModel& object,
                const std::vector<Eigen::VectorXd>& torques,
                const StepParams& params);

// Purely impulsive inelastic resolution of all closed contacts.
WorldState resolve_impact(const WorldState& world,
                          const std::vector<RobotModel>& models,
                          const ObjectModel& object, const StepParams& params);

// Sampling primitive for the impact map: impulsive resolution followed by a
// single 5 ms step under gravity compensation. Returns the object twist.
Eigen::Vector3d simulate_impact_event(const std::vector<RobotModel>& models,
                                      const ObjectModel& object,
                                      const std::vector<Eigen::VectorXd>& q,
                                      const std::vector<Eigen::VectorXd>& dq,
                                      const Eigen::Vector3d& object_pose,
                                      const StepParams& params);

}  // namespace rs
