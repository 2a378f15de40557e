#pragma once

#include <string>
#include <vector>

#include "rs/contact.hpp"
#include "rs/fields.hpp"
#include "rs/model.hpp"

namespace rs {

enum class ScenarioKind { HitAndPush, DualArmGrab };
enum class Variant { Proposed, NoRS, NoInterim, NoImpactMap };

const char* to_string(ScenarioKind k);
const char* to_string(Variant v);
Variant variant_from_string(const std::string& s);

struct ControllerConfig {
  double dt = 1e-3;         // s, control period
  double d_track = 40.0;    // velocity feedback gain (diagonal)
  double k_track = 40.0;    // interim position feedback gain (diagonal)
  double k_q = 250.0;       // first-joint task stiffness
  double k_sync = 10.0;     // synchronization stiffness
  double w_track = 1.0, w_q = 1.0, w_sync = 1.0;
  double dt_int = 0.1;      // s, interim mode duration
  Variant variant = Variant::Proposed;
  double detect_threshold = 0.05;  // rad/s, one-step joint velocity jump
  // control steps between the raw velocity-jump hit and the mode switch;
  // long enough that the physical contact transient has settled before the
  // switch, so the reference update is the only discontinuity left
  int detect_latency = 15;
  double clamp_safety = 1.5;       // grab clamping force safety factor
};

// Everything needed to run one rollout. One scenario file fully determines
// the experiment, including the seed.
struct Scenario {
  ScenarioKind kind = ScenarioKind::HitAndPush;
  std::vector<RobotModel> robots;
  ObjectModel object;
  Eigen::Vector3d object_pose_nominal = Eigen::Vector3d::Zero();
  Eigen::Vector2d displacement_dir = {1.0, 0.0};
  double displacement = 0.0;  // m, actual offset from the nominal pose
  std::vector<AnteFieldParams> ante;  // per robot
  PostFieldParams post_base;  // v_o_est_plus / p_o_plus filled at runtime
  std::vector<Eigen::Vector2d> face_normal;  // outward, toward robot i
  std::vector<Eigen::VectorXd> q0;
  ControllerConfig ctrl;
  StepParams physics;
  unsigned seed = 0;
  double duration = 3.0;  // s
  std::string impact_dataset_path;
  std::string object_id = "parcel";
  std::string init_id = "A";
  double plant_mass_scale = 1.0;  // optional plant-model mismatch

  int arm_count() const { return static_cast<int>(robots.size()); }
  Eigen::Vector3d actual_object_pose() const;
  // Half extent of the object along face i's normal.
  double face_half_extent(int robot) const;
  Eigen::Vector2d face_tangent(int robot) const;
  // Scalar coordinate of a point along face i, relative to the nominal
  // object center.
  double projected_coordinate(int robot, const Eigen::Vector2d& p) const;
  std::string hash() const;
  void validate() const;
};

std::string scenario_to_json(const Scenario& s);
Scenario scenario_from_json(const std::string& text);
Scenario load_scenario(const std::string& path);
void save_scenario(const Scenario& s, const std::string& path);

// Catalogue builders for the two use cases. object_id is one of
// parcel|catfood|juice, init_id one of A|B|C.
Scenario make_push_scenario(const std::string& object_id,
                            const std::string& init_id, double displacement,
                            Variant variant, unsigned seed);
Scenario make_grab_scenario(const std::string& object_id,
                            const std::string& init_id, double displacement,
                            Variant variant, unsigned seed);

}  // namespace rs
