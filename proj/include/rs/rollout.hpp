#pragma once

#include <iosfwd>

#include "rs/controller.hpp"

namespace rs {

struct StepRecord {
  double time = 0.0;
  Mode mode = Mode::Ante;
  std::vector<Eigen::VectorXd> q, dq, tau;
  std::vector<Eigen::Vector3d> ee_pose, ee_twist, ref_twist;
  Eigen::Vector3d object_pose = Eigen::Vector3d::Zero();
  Eigen::Vector3d object_twist = Eigen::Vector3d::Zero();
  Eigen::VectorXd target_accel;
  double target_accel_norm = 0.0;
  std::vector<uint8_t> impact_flags;
  QPStatus qp_status = QPStatus::Optimal;
};

struct RolloutLog {
  Scenario scenario;
  std::vector<StepRecord> steps;
  bool failed = false;
  int failure_step = -1;
  std::string failure_reason;
  std::vector<double> detect_times;  // per robot, -1 if never flagged
  double max_target_accel = 0.0;
};

// Deterministic given the scenario (the seed perturbs the initial joint
// angles by up to 0.01 rad and the detection latency by one step). If the
// variant needs an impact map and dataset is null, it is loaded from the
// scenario's dataset path.
RolloutLog run_rollout(const Scenario& scenario,
                       const ImpactDataset* dataset = nullptr);

// Per-step CSV; column schema documented in the README. Byte-stable.
void write_rollout_csv(const RolloutLog& log, std::ostream& out);
void write_rollout_csv(const RolloutLog& log, const std::string& path);

// Reads back the fields the plotters need (time, twists, references,
// flags, target accel norm). The scenario is a stub sized to the arm count.
RolloutLog read_rollout_csv(const std::string& path);

}  // namespace rs
