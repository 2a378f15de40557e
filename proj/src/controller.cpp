#include "rs/controller.hpp"

#include <cmath>

#include "rs/dynamics.hpp"

namespace rs {

const char* to_string(Mode m) {
  switch (m) {
    case Mode::Ante: return "ante";
    case Mode::Interim: return "interim";
    case Mode::Post: return "post";
  }
  return "?";
}

ImpactDetector::ImpactDetector(int n_robots, double threshold, int latency)
    : threshold_(threshold),
      latency_(latency),
      prev_dq_(n_robots),
      hit_step_(n_robots, -1),
      flags_(n_robots, false) {}

const std::vector<bool>& ImpactDetector::update(
    const std::vector<Eigen::VectorXd>& dq,
    const std::vector<bool>& near_object) {
  for (size_t i = 0; i < dq.size(); ++i) {
    if (hit_step_[i] < 0 && prev_dq_[i].size() == dq[i].size() &&
        near_object[i] && (dq[i] - prev_dq_[i]).norm() > threshold_) {
      hit_step_[i] = step_;
    }
    if (hit_step_[i] >= 0 && step_ >= hit_step_[i] + latency_)
      flags_[i] = true;
    prev_dq_[i] = dq[i];
  }
  ++step_;
  return flags_;
}

Controller::Controller(const Scenario& scenario, const ImpactDataset* dataset)
    : scn_(scenario),
      dataset_(dataset),
      detector_(scenario.arm_count(), scenario.ctrl.detect_threshold,
                scenario.ctrl.detect_latency),
      p_int_d_(scenario.arm_count(), Eigen::Vector2d::Zero()),
      prev_targets_(scenario.arm_count(), Eigen::Vector3d::Zero()) {
  scn_.validate();
  if (uses_impact_map() && !dataset_)
    throw std::invalid_argument("controller variant needs an impact dataset");
  post_ = scn_.post_base;
}

bool Controller::uses_impact_map() const {
  return scn_.ctrl.variant == Variant::Proposed ||
         scn_.ctrl.variant == Variant::NoInterim;
}

bool Controller::uses_interim() const {
  return scn_.ctrl.variant == Variant::Proposed ||
         scn_.ctrl.variant == Variant::NoImpactMap;
}

Controller::RobotView Controller::view(const WorldState& world, int i) const {
  RobotView v;
  const auto& model = scn_.robots[i];
  auto [p, theta] = forward_kinematics(model, world.q[i]);
  v.p = p;
  v.theta = theta;
  v.jac = geometric_jacobian(model, world.q[i]);
  v.twist = v.jac * world.dq[i];
  v.jdot_qdot = jacobian_dot_qdot(model, world.q[i], world.dq[i]);
  v.inertia = joint_space_inertia(model, world.q[i]);
  v.bias = bias_forces(model, world.q[i], world.dq[i],
                       scn_.physics.arm_gravity);
  return v;
}

Eigen::Vector2d Controller::infer_object_position(
    const WorldState& world) const {
  Eigen::Vector2d acc = Eigen::Vector2d::Zero();
  for (int i = 0; i < scn_.arm_count(); ++i) {
    const auto [p, theta] = forward_kinematics(scn_.robots[i], world.q[i]);
    (void)theta;
    acc += p - scn_.face_normal[i] *
                   (scn_.face_half_extent(i) + scn_.robots[i].ee_radius);
  }
  return acc / scn_.arm_count();
}

Eigen::Matrix2d Controller::mirror_operator() const {
  if (scn_.arm_count() < 2) return Eigen::Matrix2d::Identity();
  const Eigen::Vector2d n = scn_.face_normal[1].normalized();
  return Eigen::Matrix2d::Identity() - 2.0 * n * n.transpose();
}

Eigen::Vector2d Controller::mirror(const Eigen::Vector2d& p) const {
  const Eigen::Vector2d c = scn_.ante[0].p_o_est;
  return mirror_operator() * (p - c) + c;
}

void Controller::capture_post_state(const WorldState& world,
                                    const std::vector<RobotView>& views) {
  p_o_plus_ = infer_object_position(world);
  post_ = scn_.post_base;
  post_.p_o_plus = p_o_plus_;
  if (uses_impact_map()) {
    Eigen::VectorXd query(scn_.arm_count());
    for (int i = 0; i < scn_.arm_count(); ++i)
      query[i] = scn_.projected_coordinate(i, views[i].p);
    v_o_est_ = interpolate(*dataset_, query);
    post_.v_o_est_plus = v_o_est_.head<2>();
  } else {
    v_o_est_.setZero();
    post_.v_o_est_plus.setZero();
  }
  // Grab clamping force: hold the object against the worst of the planned
  // acceleration and ground friction, with a safety margin.
  const double g = scn_.physics.gravity_out_of_plane;
  const double speed =
      std::max(post_.v_o_est_plus.norm(),
               post_.kappa_p * (post_.p_of - p_o_plus_).norm());
  const double a_max = post_.kappa_p * speed;
  const double need = std::max(scn_.object.mass * a_max,
                               scn_.object.surface_friction_mu *
                                   scn_.object.mass * g);
  clamp_force_ = scn_.ctrl.clamp_safety * need /
                 (2.0 * scn_.object.contact_friction_mu);
  post_ready_ = true;
}

void Controller::update_modes(const WorldState& world,
                              const std::vector<RobotView>& views) {
  std::vector<bool> near(scn_.arm_count());
  for (int i = 0; i < scn_.arm_count(); ++i)
    near[i] = (views[i].p - scn_.ante[i].p_o_est).norm() <=
              scn_.ante[i].r_min_a;
  const auto& flags = detector_.update(world.dq, near);

  if (mode_ == Mode::Ante) {
    bool trigger;
    if (uses_interim()) {
      trigger = false;
      for (bool f : flags) trigger = trigger || f;
    } else {
      // Baselines without an interim mode switch once every arm has hit.
      trigger = true;
      for (bool f : flags) trigger = trigger && f;
    }
    if (trigger) {
      capture_post_state(world, views);
      t_imp_ = world.time;
      if (uses_interim()) {
        mode_ = Mode::Interim;
        for (int i = 0; i < scn_.arm_count(); ++i) p_int_d_[i] = views[i].p;
      } else {
        mode_ = Mode::Post;
      }
    }
  } else if (mode_ == Mode::Interim) {
    if (world.time - t_imp_ >= scn_.ctrl.dt_int - 0.5 * scn_.ctrl.dt) {
      mode_ = Mode::Post;
    } else {
      for (int i = 0; i < scn_.arm_count(); ++i)
        p_int_d_[i] += scn_.ctrl.dt * ante_velocity(p_int_d_[i], scn_.ante[i]);
    }
  }
}

Eigen::Vector2d Controller::post_field_velocity(
    const Eigen::Vector2d& p_o) const {
  if (uses_impact_map()) return post_velocity(p_o, post_);
  return post_attractor(p_o, post_);
}

Eigen::Vector2d Controller::post_field_acceleration(
    const Eigen::Vector2d& p_o) const {
  if (uses_impact_map()) return post_acceleration(p_o, post_);
  // attractor pathwise: dv/dp = -kappa I, so a = -kappa^2 (p_of - p_o)
  return -post_.kappa_p * post_.kappa_p * (post_.p_of - p_o);
}

Eigen::Vector2d Controller::feedforward_force(const Eigen::Vector2d& v_ref,
                                              int i) const {
  const double g = scn_.physics.gravity_out_of_plane;
  const double friction =
      scn_.object.surface_friction_mu * scn_.object.mass * g;
  const double speed = v_ref.norm();
  const double scale = std::min(1.0, speed / 0.01);
  Eigen::Vector2d along = Eigen::Vector2d::Zero();
  if (speed > 1e-9) along = friction * scale * v_ref / speed;
  if (scn_.kind == ScenarioKind::HitAndPush) return along;
  // each arm presses inward and carries half of the sliding friction
  return clamp_force_ * (-scn_.face_normal[i]) + 0.5 * along;
}

// Fraction of the ante reference speed an arm should track: 1 for a single
// arm, reduced when this arm runs ahead of its mirrored partner so the
// laggard catches up and both arrive together. Time-invariant: the scale
// depends only on the two measured positions.
double Controller::sync_scale(const std::vector<RobotView>& views,
                              int i) const {
  if (scn_.arm_count() < 2 || mode_ != Mode::Ante) return 1.0;
  const auto& f = scn_.ante[i];
  const Eigen::Vector2d v = ante_velocity(views[i].p, f);
  const double speed = v.norm();
  if (speed < 1e-9) return 1.0;
  const Eigen::Vector2d pm = mirror(views[1 - i].p);
  const double lead = (views[i].p - pm).dot(v / speed);
  return std::clamp(1.0 - scn_.ctrl.k_sync * lead, 0.0, 1.0);
}

// Velocity-level pull toward the mirrored partner position. The speed scale
// above retimes each arm along its own streamline; this term removes the
// lateral gap between the two streamlines, which the field alone stops
// closing once inside r_min_a where it is constant.
Eigen::Vector2d Controller::sync_correction(
    const std::vector<RobotView>& views, int i) const {
  if (scn_.arm_count() < 2 || mode_ != Mode::Ante)
    return Eigen::Vector2d::Zero();
  const Eigen::Vector2d pm = mirror(views[1 - i].p);
  Eigen::Vector2d corr = std::sqrt(scn_.ctrl.k_sync) * (pm - views[i].p);
  const double cap = 0.5 * scn_.ante[i].v_imp.norm();
  if (corr.norm() > cap) corr *= cap / corr.norm();
  return corr;
}

Eigen::Vector3d Controller::ante_target(const RobotView& v, int i,
                                        double scale,
                                        const Eigen::Vector2d& corr) const {
  const auto& f = scn_.ante[i];
  const auto [omega_d, alpha_d] = angular_refs(v.theta, f.theta_d, f.kappa_r_a);
  Eigen::Vector3d ref;
  ref << scale * ante_velocity(v.p, f) + corr, omega_d;
  Eigen::Vector3d a;
  // pathwise: d(scale v)/dt along the scaled flow picks up scale^2 on the
  // field term; the slowly varying scale and the sync correction are left
  // to velocity feedback
  a << scale * scale * ante_acceleration(v.p, f), alpha_d;
  return a + scn_.ctrl.d_track * (ref - v.twist);
}

Eigen::Vector3d Controller::post_target(const RobotView& v, int i,
                                        const Eigen::Vector2d& p_o) const {
  const auto [omega_d, alpha_d] =
      angular_refs(v.theta, scn_.ante[i].theta_d, post_.kappa_r_p);
  const Eigen::Vector2d v_ref = post_field_velocity(p_o);
  Eigen::Vector3d ref;
  ref << v_ref, omega_d;
  Eigen::Vector3d a;
  a << post_field_acceleration(p_o), alpha_d;
  return a + scn_.ctrl.d_track * (ref - v.twist);
}

// Contact feedforward as joint torques J^T f, ramped in over the interim
// phase so the commanded torque stays continuous at both mode switches.
Eigen::VectorXd Controller::feedforward_torque(const RobotView& v, int i,
                                               const Eigen::Vector2d& p_o,
                                               double gamma) const {
  double w = 0.0;
  if (mode_ == Mode::Post)
    w = 1.0;
  else if (mode_ == Mode::Interim)
    w = gamma;
  if (w <= 0.0) return Eigen::VectorXd::Zero(scn_.robots[i].n_links);
  Eigen::Vector3d wrench;
  wrench << feedforward_force(post_field_velocity(p_o), i), 0.0;
  return w * v.jac.transpose() * wrench;
}

Eigen::Vector3d Controller::interim_target(const RobotView& v, int i,
                                           const Eigen::Vector2d& p_o,
                                           double gamma) const {
  if (gamma >= 1.0) return post_target(v, i, p_o);
  const auto& f = scn_.ante[i];
  const auto [omega_d, alpha_d] = angular_refs(v.theta, f.theta_d, f.kappa_r_a);
  Eigen::Vector3d ante_part;
  ante_part << ante_acceleration(v.p, f), alpha_d;
  Eigen::Vector3d err;
  err << p_int_d_[i] - v.p, wrap_angle(f.theta_d - v.theta);
  ante_part += scn_.ctrl.k_track * err;
  (void)omega_d;
  const Eigen::Vector3d blended =
      (1.0 - gamma) * ante_part + gamma * post_target(v, i, p_o);
  // no velocity feedback while the contacts settle: the interim runs on
  // position feedback around the integrated reference, and the hand-off is
  // kept torque-continuous by fading from the last ante-mode target
  const double fade =
      std::clamp(1.0 - gamma * scn_.ctrl.dt_int / 0.02, 0.0, 1.0);
  return fade * prev_targets_[i] + (1.0 - fade) * blended;
}

Eigen::Vector3d Controller::ref_twist_for(const std::vector<RobotView>& views,
                                          int i, const Eigen::Vector2d& p_o,
                                          double gamma) const {
  Eigen::Vector3d out;
  switch (mode_) {
    case Mode::Ante: {
      const auto [omega_d, alpha_d] = angular_refs(
          views[i].theta, scn_.ante[i].theta_d, scn_.ante[i].kappa_r_a);
      (void)alpha_d;
      out << sync_scale(views, i) * ante_velocity(views[i].p, scn_.ante[i]) +
              sync_correction(views, i),
          omega_d;
      break;
    }
    case Mode::Interim: {
      const auto [wa, aa] = angular_refs(
          views[i].theta, scn_.ante[i].theta_d, scn_.ante[i].kappa_r_a);
      (void)aa;
      const auto [wp, ap] = angular_refs(
          views[i].theta, scn_.ante[i].theta_d, post_.kappa_r_p);
      (void)ap;
      Eigen::Vector3d ante_ref, post_ref;
      ante_ref << ante_velocity(p_int_d_[i], scn_.ante[i]), wa;
      post_ref << post_field_velocity(p_o), wp;
      out = (1.0 - gamma) * ante_ref + gamma * post_ref;
      break;
    }
    case Mode::Post: {
      const auto [wp, ap] = angular_refs(
          views[i].theta, scn_.ante[i].theta_d, post_.kappa_r_p);
      (void)ap;
      out << post_field_velocity(p_o), wp;
      break;
    }
  }
  return out;
}

Eigen::Vector3d Controller::reference_twist(const WorldState& world,
                                            int robot) const {
  std::vector<RobotView> views;
  for (int i = 0; i < scn_.arm_count(); ++i) views.push_back(view(world, i));
  const double gamma =
      std::clamp((world.time - t_imp_) / scn_.ctrl.dt_int, 0.0, 1.0);
  const Eigen::Vector2d p_o = mode_ == Mode::Ante
                                  ? scn_.ante[0].p_o_est
                                  : infer_object_position(world);
  return ref_twist_for(views, robot, p_o, gamma);
}

Eigen::Vector3d Controller::mode_target(const WorldState& world, int robot,
                                        Mode mode, double gamma) const {
  std::vector<RobotView> views;
  for (int i = 0; i < scn_.arm_count(); ++i) views.push_back(view(world, i));
  switch (mode) {
    case Mode::Ante:
      return ante_target(views[robot], robot, sync_scale(views, robot),
                         sync_correction(views, robot));
    case Mode::Interim:
      return interim_target(views[robot], robot, infer_object_position(world),
                            gamma);
    case Mode::Post:
      return post_target(views[robot], robot, infer_object_position(world));
  }
  return Eigen::Vector3d::Zero();
}

QPProblem Controller::assemble(const WorldState& world,
                               const std::vector<RobotView>& views,
                               const std::vector<Eigen::Vector3d>& targets,
                               const std::vector<Eigen::VectorXd>& tau_ff)
    const {
  const int arms = scn_.arm_count();
  std::vector<int> offset(arms, 0);
  int n = 0;
  for (int i = 0; i < arms; ++i) {
    offset[i] = n;
    n += scn_.robots[i].n_links;
  }

  QPProblem qp;
  qp.H = Eigen::MatrixXd::Zero(n, n);
  qp.g = Eigen::VectorXd::Zero(n);
  auto add_rows = [&](const Eigen::MatrixXd& a, const Eigen::VectorXd& b,
                      double w) {
    qp.H += 2.0 * w * a.transpose() * a;
    qp.g -= 2.0 * w * a.transpose() * b;
  };

  const auto& c = scn_.ctrl;
  for (int i = 0; i < arms; ++i) {
    const int ni = scn_.robots[i].n_links;
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(3, n);
    a.block(0, offset[i], 3, ni) = views[i].jac;
    add_rows(a, targets[i] - views[i].jdot_qdot, c.w_track);

    // first-joint posture task
    Eigen::MatrixXd aq = Eigen::MatrixXd::Zero(1, n);
    aq(0, offset[i]) = 1.0;
    const double xi = world.q[i][0];
    const double dxi = world.dq[i][0];
    Eigen::VectorXd bq(1);
    bq[0] = -2.0 * std::sqrt(c.k_q) * dxi + c.k_q * (scn_.ante[i].xi_d - xi);
    add_rows(aq, bq, c.w_q);
  }

  if (arms == 2 && mode_ == Mode::Ante) {
    const Eigen::Matrix2d ts = mirror_operator();
    const double dist = (mirror(views[1].p) - views[0].p).norm();
    for (int i = 0; i < arms; ++i) {
      const int j = 1 - i;
      const Eigen::Vector2d pm = mirror(views[j].p);
      const Eigen::Vector2d vm = ts * views[j].twist.head<2>();
      const Eigen::Vector2d acc =
          c.k_sync * (pm - views[i].p) +
          2.0 * std::sqrt(c.k_sync) * (vm - views[i].twist.head<2>());
      Eigen::MatrixXd a = Eigen::MatrixXd::Zero(2, n);
      a.block(0, offset[i], 2, scn_.robots[i].n_links) =
          views[i].jac.topRows<2>();
      add_rows(a, acc - views[i].jdot_qdot.head<2>(), c.w_sync * dist);
    }
  }

  const int m = 3 * n;
  qp.A = Eigen::MatrixXd::Zero(m, n);
  qp.lb = Eigen::VectorXd::Zero(m);
  qp.ub = Eigen::VectorXd::Zero(m);
  int row = 0;
  for (int i = 0; i < arms; ++i) {
    const auto& model = scn_.robots[i];
    const int ni = model.n_links;
    const double dt = c.dt;
    for (int k = 0; k < ni; ++k, ++row) {
      qp.A(row, offset[i] + k) = 0.5 * dt * dt;
      const double a_cap =
          0.5 * std::min(-model.tau_min[k], model.tau_max[k]) /
          views[i].inertia(k, k);
      const double h = 0.5 * dt * dt;
      // keep a torque-feasible command inside the row even when the joint
      // has grazed its limit
      qp.lb[row] = std::min(
          model.q_min[k] - world.q[i][k] - world.dq[i][k] * dt, a_cap * h);
      qp.ub[row] = std::max(
          model.q_max[k] - world.q[i][k] - world.dq[i][k] * dt, -a_cap * h);
    }
    for (int k = 0; k < ni; ++k, ++row) {
      qp.A(row, offset[i] + k) = dt;
      // shrink the velocity bound near a position limit to the speed from
      // which half the torque budget can still stop the joint in time;
      // without this a joint can arrive at its limit too fast to brake and
      // the position row becomes permanently unsatisfiable
      const double a_cap =
          0.5 * std::min(-model.tau_min[k], model.tau_max[k]) /
          views[i].inertia(k, k);
      const double margin = 1e-3;
      const double room_up =
          std::max(0.0, model.q_max[k] - world.q[i][k] - margin);
      const double room_dn =
          std::max(0.0, world.q[i][k] - model.q_min[k] - margin);
      const double dq_ub =
          std::min(model.dq_max[k], std::sqrt(2.0 * a_cap * room_up));
      const double dq_lb =
          std::max(model.dq_min[k], -std::sqrt(2.0 * a_cap * room_dn));
      // never demand more than a torque-feasible deceleration in one step
      qp.lb[row] = std::min(dq_lb - world.dq[i][k], a_cap * dt);
      qp.ub[row] = std::max(dq_ub - world.dq[i][k], -a_cap * dt);
    }
    qp.A.block(row, offset[i], ni, ni) = views[i].inertia;
    qp.lb.segment(row, ni) = model.tau_min - views[i].bias - tau_ff[i];
    qp.ub.segment(row, ni) = model.tau_max - views[i].bias - tau_ff[i];
    row += ni;
  }
  return qp;
}

QPProblem Controller::build_qp(const WorldState& world) const {
  const int arms = scn_.arm_count();
  std::vector<RobotView> views;
  views.reserve(arms);
  for (int i = 0; i < arms; ++i) views.push_back(view(world, i));
  std::vector<Eigen::Vector3d> targets(arms);
  const double gamma =
      std::clamp((world.time - t_imp_) / scn_.ctrl.dt_int, 0.0, 1.0);
  const Eigen::Vector2d p_o = mode_ == Mode::Ante
                                  ? scn_.ante[0].p_o_est
                                  : infer_object_position(world);
  for (int i = 0; i < arms; ++i) {
    switch (mode_) {
      case Mode::Ante:
        targets[i] = ante_target(views[i], i, sync_scale(views, i),
                                 sync_correction(views, i));
        break;
      case Mode::Interim:
        targets[i] = interim_target(views[i], i, p_o, gamma);
        break;
      case Mode::Post: targets[i] = post_target(views[i], i, p_o); break;
    }
  }
  std::vector<Eigen::VectorXd> tau_ff(arms);
  for (int i = 0; i < arms; ++i)
    tau_ff[i] = feedforward_torque(views[i], i, p_o, gamma);
  return assemble(world, views, targets, tau_ff);
}

ControlOutput Controller::step(const WorldState& world) {
  const int arms = scn_.arm_count();
  std::vector<RobotView> views;
  views.reserve(arms);
  for (int i = 0; i < arms; ++i) views.push_back(view(world, i));

  update_modes(world, views);

  const double gamma =
      std::clamp((world.time - t_imp_) / scn_.ctrl.dt_int, 0.0, 1.0);
  const Eigen::Vector2d p_o = mode_ == Mode::Ante
                                  ? scn_.ante[0].p_o_est
                                  : infer_object_position(world);

  ControlOutput out;
  out.mode = mode_;
  out.target_accel.resize(3 * arms);
  out.ref_twist.resize(arms);
  std::vector<Eigen::Vector3d> targets(arms);
  for (int i = 0; i < arms; ++i) {
    switch (mode_) {
      case Mode::Ante:
        targets[i] = ante_target(views[i], i, sync_scale(views, i),
                                 sync_correction(views, i));
        break;
      case Mode::Interim:
        targets[i] = interim_target(views[i], i, p_o, gamma);
        break;
      case Mode::Post:
        targets[i] = post_target(views[i], i, p_o);
        break;
    }
    out.ref_twist[i] = ref_twist_for(views, i, p_o, gamma);
    out.target_accel.segment<3>(3 * i) = targets[i];
  }
  if (mode_ == Mode::Ante) prev_targets_ = targets;

  std::vector<Eigen::VectorXd> tau_ff(arms);
  for (int i = 0; i < arms; ++i)
    tau_ff[i] = feedforward_torque(views[i], i, p_o, gamma);
  const QPProblem qp = assemble(world, views, targets, tau_ff);
  const QPSolution sol = qp_.solve(qp, warm_.empty() ? nullptr : &warm_);
  out.qp_status = sol.status;
  Eigen::VectorXd ddq;
  if (sol.status == QPStatus::Optimal) {
    ddq = sol.x;
    warm_ = sol.active_set;
  } else {
    // failed solve: brake toward zero joint velocity with half the torque
    // budget so the arm comes to a safe stop instead of replaying a stale
    // command open loop
    ddq = Eigen::VectorXd::Zero(qp.H.rows());
    int o = 0;
    for (int i = 0; i < arms; ++i) {
      const auto& model = scn_.robots[i];
      for (int k = 0; k < model.n_links; ++k) {
        const double a_cap =
            0.5 * std::min(-model.tau_min[k], model.tau_max[k]) /
            views[i].inertia(k, k);
        ddq[o + k] = std::clamp(-world.dq[i][k] / scn_.ctrl.dt, -a_cap, a_cap);
      }
      o += model.n_links;
    }
    warm_.clear();
  }

  out.torques.resize(arms);
  int off = 0;
  for (int i = 0; i < arms; ++i) {
    const int ni = scn_.robots[i].n_links;
    out.torques[i] =
        views[i].inertia * ddq.segment(off, ni) + views[i].bias + tau_ff[i];
    off += ni;
  }
  return out;
}

}  // namespace rs
