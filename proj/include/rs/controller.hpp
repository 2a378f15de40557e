#pragma once

#include <deque>
#include <optional>

#include "rs/impact_map.hpp"
#include "rs/qp.hpp"
#include "rs/scenario.hpp"

namespace rs {

enum class Mode { Ante, Interim, Post };

const char* to_string(Mode m);

// Joint-velocity innovation detector: flags a robot when the one-step
// velocity jump exceeds the threshold while its end effector is close to
// the estimated object, with a configurable reporting latency. Flags latch.
class ImpactDetector {
 public:
  ImpactDetector(int n_robots, double threshold, int latency);
  // Returns the latched, latency-delayed flags after this step.
  const std::vector<bool>& update(const std::vector<Eigen::VectorXd>& dq,
                                  const std::vector<bool>& near_object);
  const std::vector<bool>& flags() const { return flags_; }
  // Step index at which the raw jump was observed, -1 if none.
  int raw_hit_step(int robot) const { return hit_step_[robot]; }

 private:
  double threshold_;
  int latency_;
  int step_ = 0;
  std::vector<Eigen::VectorXd> prev_dq_;
  std::vector<int> hit_step_;
  std::vector<bool> flags_;
};

struct ControlOutput {
  std::vector<Eigen::VectorXd> torques;
  Eigen::VectorXd target_accel;            // stacked per-robot (ax, ay, alpha)
  std::vector<Eigen::Vector3d> ref_twist;  // per robot, for logging
  Mode mode = Mode::Ante;
  QPStatus qp_status = QPStatus::Optimal;
};

// Three-mode time-invariant reference spreading controller plus the three
// ablation baselines, sharing one QP backend.
class Controller {
 public:
  Controller(const Scenario& scenario, const ImpactDataset* dataset);

  ControlOutput step(const WorldState& world);

  Mode mode() const { return mode_; }
  double t_imp() const { return t_imp_; }
  const std::vector<bool>& impact_flags() const { return detector_.flags(); }
  const Eigen::Vector2d& p_int_d(int robot) const { return p_int_d_[robot]; }
  Eigen::Vector2d cached_p_o_plus() const { return p_o_plus_; }
  Eigen::Vector3d cached_v_o_est() const { return v_o_est_; }
  // Post-impact reference twist for the current variant at an object
  // position; exposed for the acceptance checks.
  Eigen::Vector2d post_field_velocity(const Eigen::Vector2d& p_o) const;
  // Mirror of a point across the synchronization plane.
  Eigen::Vector2d mirror(const Eigen::Vector2d& p) const;
  Eigen::Matrix2d mirror_operator() const;
  // Object position inferred from end-effector poses and contact geometry.
  Eigen::Vector2d infer_object_position(const WorldState& world) const;
  // Task-space target for one robot in a given mode, using the controller's
  // current cached state. Exposed so tests can probe mode hand-off.
  Eigen::Vector3d mode_target(const WorldState& world, int robot, Mode mode,
                              double gamma) const;
  // QP for the controller's current mode at this state, without advancing
  // detection or mode logic.
  QPProblem build_qp(const WorldState& world) const;
  // Reference twist for one robot in the controller's current mode at this
  // state. Used to start rollouts on-reference.
  Eigen::Vector3d reference_twist(const WorldState& world, int robot) const;

 private:
  struct RobotView {
    Eigen::Vector2d p;
    double theta;
    Eigen::Vector3d twist;
    Eigen::MatrixXd jac;        // 3 x n
    Eigen::Vector3d jdot_qdot;
    Eigen::MatrixXd inertia;    // M + B_theta
    Eigen::VectorXd bias;
  };

  RobotView view(const WorldState& world, int i) const;
  void update_modes(const WorldState& world,
                    const std::vector<RobotView>& views);
  void capture_post_state(const WorldState& world,
                          const std::vector<RobotView>& views);
  QPProblem assemble(const WorldState& world,
                     const std::vector<RobotView>& views,
                     const std::vector<Eigen::Vector3d>& targets,
                     const std::vector<Eigen::VectorXd>& tau_ff) const;
  Eigen::VectorXd feedforward_torque(const RobotView& v, int i,
                                     const Eigen::Vector2d& p_o,
                                     double gamma) const;
  Eigen::Vector3d ante_target(const RobotView& v, int i, double scale,
                              const Eigen::Vector2d& corr) const;
  double sync_scale(const std::vector<RobotView>& views, int i) const;
  Eigen::Vector2d sync_correction(const std::vector<RobotView>& views,
                                  int i) const;
  Eigen::Vector3d ref_twist_for(const std::vector<RobotView>& views, int i,
                                const Eigen::Vector2d& p_o, double gamma) const;
  Eigen::Vector3d post_target(const RobotView& v, int i,
                              const Eigen::Vector2d& p_o) const;
  Eigen::Vector3d interim_target(const RobotView& v, int i,
                                 const Eigen::Vector2d& p_o, double gamma) const;
  Eigen::Vector2d post_field_acceleration(const Eigen::Vector2d& p_o) const;
  Eigen::Vector2d feedforward_force(const Eigen::Vector2d& v_ref, int i) const;
  bool uses_impact_map() const;
  bool uses_interim() const;

  Scenario scn_;
  const ImpactDataset* dataset_;
  QPSolver qp_;
  ImpactDetector detector_;
  Mode mode_ = Mode::Ante;
  double t_imp_ = 0.0;
  std::vector<Eigen::Vector2d> p_int_d_;
  std::vector<Eigen::Vector3d> prev_targets_;
  Eigen::Vector2d p_o_plus_ = Eigen::Vector2d::Zero();
  Eigen::Vector3d v_o_est_ = Eigen::Vector3d::Zero();
  PostFieldParams post_;  // filled on leaving ante mode
  bool post_ready_ = false;
  double clamp_force_ = 0.0;
  ActiveSet warm_;
};

}  // namespace rs
