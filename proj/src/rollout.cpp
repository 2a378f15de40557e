#include "rs/rollout.hpp"

#include <cstdio>
#include <fstream>
#include <random>
#include <sstream>

#include "rs/dynamics.hpp"
#include "rs/kinematics.hpp"

namespace rs {

namespace {

void fmt(std::ostream& out, double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  out << buf;
}

}  // namespace

RolloutLog run_rollout(const Scenario& scenario, const ImpactDataset* dataset) {
  Scenario scn = scenario;
  scn.validate();

  std::mt19937 rng(scn.seed);
  std::uniform_real_distribution<double> jitter(-0.01, 0.01);
  for (auto& q : scn.q0)
    for (int k = 0; k < q.size(); ++k) q[k] += jitter(rng);
  std::uniform_int_distribution<int> lat(-1, 1);
  scn.ctrl.detect_latency = std::max(1, scn.ctrl.detect_latency + lat(rng));

  ImpactDataset local;
  const bool needs_map = scn.ctrl.variant == Variant::Proposed ||
                         scn.ctrl.variant == Variant::NoInterim;
  if (needs_map && !dataset) {
    if (scn.impact_dataset_path.empty())
      throw std::invalid_argument("variant needs an impact dataset path");
    local = load_dataset(scn.impact_dataset_path);
    dataset = &local;
  }

  RolloutLog log;
  log.scenario = scenario;
  log.detect_times.assign(scn.arm_count(), -1.0);

  Controller ctrl(scn, needs_map ? dataset : nullptr);

  // the plant may deviate from the controller's object model
  ObjectModel plant_object = scn.object;
  plant_object.mass *= scn.plant_mass_scale;
  plant_object.inertia *= scn.plant_mass_scale;

  WorldState world;
  world.q = scn.q0;
  world.dq.resize(scn.arm_count());
  for (int i = 0; i < scn.arm_count(); ++i)
    world.dq[i] = Eigen::VectorXd::Zero(scn.robots[i].n_links);
  world.object_pose = scn.actual_object_pose();
  // start on-reference: the trial begins with the arms already following the
  // approach field, as on a line where motion starts well before the object
  for (int i = 0; i < scn.arm_count(); ++i)
    if (auto dq0 = joint_velocities_for_twist(
            scn.robots[i], world.q[i], ctrl.reference_twist(world, i)))
      world.dq[i] = *dq0;

  const int n_steps =
      static_cast<int>(std::lround(scn.duration / scn.physics.dt));
  log.steps.reserve(n_steps);
  for (int k = 0; k < n_steps; ++k) {
    try {
      const ControlOutput out = ctrl.step(world);

      StepRecord rec;
      rec.time = world.time;
      rec.mode = out.mode;
      rec.q = world.q;
      rec.dq = world.dq;
      rec.tau = out.torques;
      rec.object_pose = world.object_pose;
      rec.object_twist = world.object_twist;
      rec.target_accel = out.target_accel;
      rec.target_accel_norm = out.target_accel.norm();
      rec.ref_twist = out.ref_twist;
      rec.qp_status = out.qp_status;
      rec.impact_flags.resize(scn.arm_count());
      rec.ee_pose.resize(scn.arm_count());
      rec.ee_twist.resize(scn.arm_count());
      for (int i = 0; i < scn.arm_count(); ++i) {
        const auto [p, th] = forward_kinematics(scn.robots[i], world.q[i]);
        rec.ee_pose[i] << p, th;
        rec.ee_twist[i] =
            geometric_jacobian(scn.robots[i], world.q[i]) * world.dq[i];
        rec.impact_flags[i] = ctrl.impact_flags()[i] ? 1 : 0;
        if (rec.impact_flags[i] && log.detect_times[i] < 0.0)
          log.detect_times[i] = world.time;
      }
      log.max_target_accel =
          std::max(log.max_target_accel, rec.target_accel_norm);
      log.steps.push_back(std::move(rec));

      world = step(world, scn.robots, plant_object, out.torques, scn.physics);
    } catch (const std::exception& e) {
      log.failed = true;
      log.failure_step = k;
      log.failure_reason = e.what();
      break;
    }
  }
  return log;
}

void write_rollout_csv(const RolloutLog& log, std::ostream& out) {
  const int arms = log.scenario.arm_count();
  out << "time_s,mode";
  for (int i = 0; i < arms; ++i) {
    const int n = log.scenario.robots[i].n_links;
    for (int k = 0; k < n; ++k) out << ",q" << i << "_" << k;
    for (int k = 0; k < n; ++k) out << ",dq" << i << "_" << k;
    for (int k = 0; k < n; ++k) out << ",tau" << i << "_" << k;
    out << ",ee" << i << "_x,ee" << i << "_y,ee" << i << "_th"
        << ",ee" << i << "_vx,ee" << i << "_vy,ee" << i << "_w"
        << ",ref" << i << "_vx,ref" << i << "_vy,ref" << i << "_w"
        << ",flag" << i;
  }
  out << ",obj_x,obj_y,obj_th,obj_vx,obj_vy,obj_w,target_accel_norm\n";
  for (const auto& r : log.steps) {
    fmt(out, r.time);
    out << ',' << to_string(r.mode);
    for (int i = 0; i < arms; ++i) {
      for (int k = 0; k < r.q[i].size(); ++k) { out << ','; fmt(out, r.q[i][k]); }
      for (int k = 0; k < r.dq[i].size(); ++k) { out << ','; fmt(out, r.dq[i][k]); }
      for (int k = 0; k < r.tau[i].size(); ++k) { out << ','; fmt(out, r.tau[i][k]); }
      for (int k = 0; k < 3; ++k) { out << ','; fmt(out, r.ee_pose[i][k]); }
      for (int k = 0; k < 3; ++k) { out << ','; fmt(out, r.ee_twist[i][k]); }
      for (int k = 0; k < 3; ++k) { out << ','; fmt(out, r.ref_twist[i][k]); }
      out << ',' << int(r.impact_flags[i]);
    }
    for (int k = 0; k < 3; ++k) { out << ','; fmt(out, r.object_pose[k]); }
    for (int k = 0; k < 3; ++k) { out << ','; fmt(out, r.object_twist[k]); }
    out << ',';
    fmt(out, r.target_accel_norm);
    out << '\n';
  }
}

void write_rollout_csv(const RolloutLog& log, const std::string& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write csv: " + path);
  write_rollout_csv(log, f);
}

RolloutLog read_rollout_csv(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot open csv: " + path);
  std::string header;
  if (!std::getline(f, header))
    throw std::runtime_error("empty csv: " + path);
  std::vector<std::string> cols;
  {
    std::istringstream hs(header);
    std::string c;
    while (std::getline(hs, c, ',')) cols.push_back(c);
  }
  if (cols.empty() || cols[0] != "time_s")
    throw std::runtime_error("not a rollout csv: " + path);
  int arms = 0;
  std::vector<int> n_links;
  for (const auto& c : cols)
    if (c.rfind("ee", 0) == 0 && c.size() > 3 && c.substr(3) == "_x") ++arms;
  if (arms < 1 || arms > 2)
    throw std::runtime_error("rollout csv arm count out of range");
  n_links.assign(arms, 0);
  for (const auto& c : cols)
    for (int i = 0; i < arms; ++i)
      if (c.rfind("q" + std::to_string(i) + "_", 0) == 0) ++n_links[i];

  RolloutLog log;
  log.scenario.robots.resize(arms);
  for (int i = 0; i < arms; ++i) log.scenario.robots[i].n_links = n_links[i];
  log.detect_times.assign(arms, -1.0);

  std::string line;
  while (std::getline(f, line)) {
    if (line.empty()) continue;
    std::vector<std::string> vals;
    std::istringstream ls(line);
    std::string v;
    while (std::getline(ls, v, ',')) vals.push_back(v);
    if (vals.size() != cols.size())
      throw std::runtime_error("malformed csv row: " + path);
    StepRecord rec;
    rec.q.resize(arms);
    rec.dq.resize(arms);
    rec.tau.resize(arms);
    rec.ee_pose.resize(arms);
    rec.ee_twist.resize(arms);
    rec.ref_twist.resize(arms);
    rec.impact_flags.resize(arms, 0);
    size_t c = 0;
    rec.time = std::stod(vals[c++]);
    const std::string mode = vals[c++];
    rec.mode = mode == "interim" ? Mode::Interim
               : mode == "post"  ? Mode::Post
                                 : Mode::Ante;
    for (int i = 0; i < arms; ++i) {
      rec.q[i].resize(n_links[i]);
      rec.dq[i].resize(n_links[i]);
      rec.tau[i].resize(n_links[i]);
      for (int k = 0; k < n_links[i]; ++k) rec.q[i][k] = std::stod(vals[c++]);
      for (int k = 0; k < n_links[i]; ++k) rec.dq[i][k] = std::stod(vals[c++]);
      for (int k = 0; k < n_links[i]; ++k) rec.tau[i][k] = std::stod(vals[c++]);
      for (int k = 0; k < 3; ++k) rec.ee_pose[i][k] = std::stod(vals[c++]);
      for (int k = 0; k < 3; ++k) rec.ee_twist[i][k] = std::stod(vals[c++]);
      for (int k = 0; k < 3; ++k) rec.ref_twist[i][k] = std::stod(vals[c++]);
      rec.impact_flags[i] = static_cast<uint8_t>(std::stoi(vals[c++]));
      if (rec.impact_flags[i] && log.detect_times[i] < 0.0)
        log.detect_times[i] = rec.time;
    }
    for (int k = 0; k < 3; ++k) rec.object_pose[k] = std::stod(vals[c++]);
    for (int k = 0; k < 3; ++k) rec.object_twist[k] = std::stod(vals[c++]);
    rec.target_accel_norm = std::stod(vals[c++]);
    log.max_target_accel =
        std::max(log.max_target_accel, rec.target_accel_norm);
    log.steps.push_back(std::move(rec));
  }
  return log;
}

}  // namespace rs
