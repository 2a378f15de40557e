#include "rs/contact.hpp"

#include <cmath>

#include "rs/dynamics.hpp"

namespace rs {

namespace {

inline Eigen::Vector2d perp(const Eigen::Vector2d& v) { return {-v.y(), v.x()}; }
inline double cross2(const Eigen::Vector2d& a, const Eigen::Vector2d& b) {
  return a.x() * b.y() - a.y() * b.x();
}
inline Eigen::Matrix2d rot(double th) {
  const double c = std::cos(th), s = std::sin(th);
  Eigen::Matrix2d R;
  R << c, -s, s, c;
  return R;
}

struct ContactWork {
  ContactPoint cp;
  Eigen::MatrixXd jac;        // 2 x n, contact-point Jacobian of the robot
  Eigen::VectorXd w_n, w_t;   // M^-1 J^T d, robot velocity response
  Eigen::Vector2d n, t;
  Eigen::Vector2d r_obj;      // contact point minus object center
  double k_n = 0, k_t = 0;    // effective inverse masses
  double bias = 0;            // separation bias velocity
  double lambda_n = 0, lambda_t = 0;
};

Eigen::Vector2d object_point_velocity(const WorldState& w,
                                      const Eigen::Vector2d& p) {
  return w.object_twist.head<2>() +
         w.object_twist.z() * perp(p - w.object_pose.head<2>());
}

}  // namespace

std::vector<ContactPoint> detect_contacts(const WorldState& world,
                                          const std::vector<RobotModel>& models,
                                          const ObjectModel& object,
                                          const StepParams& params) {
  std::vector<ContactPoint> out;
  const Eigen::Vector2d po = world.object_pose.head<2>();
  const double tho = world.object_pose.z();
  const Eigen::Matrix2d R = rot(tho);
  for (size_t i = 0; i < models.size(); ++i) {
    const auto [p_ee, th_ee] = forward_kinematics(models[i], world.q[i]);
    (void)th_ee;
    const Eigen::Vector2d local = R.transpose() * (p_ee - po);
    const Eigen::Vector2d he = object.half_extents;
    Eigen::Vector2d closest = local.cwiseMax(-he).cwiseMin(he);
    Eigen::Vector2d n_local;
    double gap;
    if ((closest - local).norm() > 1e-12) {
      n_local = (local - closest).normalized();
      gap = (local - closest).norm() - models[i].ee_radius;
    } else {
      // disc center inside the rectangle: push out through the nearest face
      const Eigen::Vector2d d = he - local.cwiseAbs();
      if (d.x() < d.y()) {
        n_local = {local.x() >= 0 ? 1.0 : -1.0, 0.0};
        closest = {n_local.x() * he.x(), local.y()};
        gap = -d.x() - models[i].ee_radius;
      } else {
        n_local = {0.0, local.y() >= 0 ? 1.0 : -1.0};
        closest = {local.x(), n_local.y() * he.y()};
        gap = -d.y() - models[i].ee_radius;
      }
    }
    ContactPoint cp;
    cp.normal = R * n_local;
    cp.position = po + R * closest;
    cp.gap = gap;
    cp.robot_index = static_cast<int>(i);
    const Eigen::MatrixXd J = geometric_jacobian(models[i], world.q[i]);
    const Eigen::Vector3d v_ee = J * world.dq[i];
    const Eigen::Vector2d r_e = cp.position - p_ee;
    const Eigen::Vector2d v_point = v_ee.head<2>() + v_ee.z() * perp(r_e);
    cp.normal_rel_velocity =
        cp.normal.dot(v_point - object_point_velocity(world, cp.position));
    out.push_back(cp);
  }
  return out;
}

namespace {

// Projected Gauss-Seidel over contact impulses; friction as a box-projected
// tangential impulse. Mutates dq and object twist in place.
void pgs_solve(std::vector<ContactWork>& contacts,
               std::vector<Eigen::VectorXd>& dq, Eigen::Vector3d& v_obj,
               const ObjectModel& object, const StepParams& params,
               double ground_friction_cap) {
  const double inv_m = 1.0 / object.mass;
  const double inv_i = 1.0 / object.inertia;
  // lever arm of the distributed sliding friction about the center; for a
  // uniform rectangle the exact integral is close to 0.4 (hx + hy)
  const double torsion_arm =
      0.4 * (object.half_extents.x() + object.half_extents.y());
  const double ground_torque_cap = ground_friction_cap * torsion_arm;
  Eigen::Vector2d lambda_ground = Eigen::Vector2d::Zero();
  double lambda_ground_t = 0.0;
  double max_change = 0.0;
  int it = 0;
  for (; it < params.pgs_iteration_cap; ++it) {
    max_change = 0.0;
    for (auto& c : contacts) {
      const int ri = c.cp.robot_index;
      const Eigen::Vector2d r_o = c.r_obj;
      // relative velocity at the contact point, end effector minus object
      const Eigen::Vector2d v_r2 = (c.jac * dq[ri]).eval();
      const Eigen::Vector2d v_obj_pt = v_obj.head<2>() + v_obj.z() * perp(r_o);
      const Eigen::Vector2d v_rel = v_r2 - v_obj_pt;

      // normal
      const double v_n = c.n.dot(v_rel);
      double d_n = (c.bias - v_n) / c.k_n;
      const double new_n = std::max(0.0, c.lambda_n + d_n);
      d_n = new_n - c.lambda_n;
      c.lambda_n = new_n;
      if (d_n != 0.0) {
        dq[ri] += c.w_n * d_n;
        v_obj.head<2>() -= d_n * c.n * inv_m;
        v_obj.z() -= d_n * cross2(r_o, c.n) * inv_i;
      }
      max_change = std::max(max_change, std::abs(d_n));

      // tangential, Coulomb box |lambda_t| <= mu lambda_n
      const Eigen::Vector2d v_rel2 =
          (c.jac * dq[ri]).eval() -
          (v_obj.head<2>() + v_obj.z() * perp(r_o)).eval();
      const double v_t = c.t.dot(v_rel2);
      double d_t = -v_t / c.k_t;
      const double cap = object.contact_friction_mu * c.lambda_n;
      const double new_t = std::clamp(c.lambda_t + d_t, -cap, cap);
      d_t = new_t - c.lambda_t;
      c.lambda_t = new_t;
      if (d_t != 0.0) {
        dq[ri] += c.w_t * d_t;
        v_obj.head<2>() -= d_t * c.t * inv_m;
        v_obj.z() -= d_t * cross2(r_o, c.t) * inv_i;
      }
      max_change = std::max(max_change, std::abs(d_t));
    }

    // object-ground Coulomb friction as an equivalent point at the center
    if (ground_friction_cap > 0.0) {
      const Eigen::Vector2d d = -object.mass * v_obj.head<2>();
      Eigen::Vector2d new_g = lambda_ground + d;
      if (new_g.norm() > ground_friction_cap)
        new_g *= ground_friction_cap / new_g.norm();
      const Eigen::Vector2d dg = new_g - lambda_ground;
      lambda_ground = new_g;
      v_obj.head<2>() += dg * inv_m;
      max_change = std::max(max_change, dg.norm());

      // torsional part of the sliding friction, resisting spin in place
      const double dtq = std::clamp(lambda_ground_t - object.inertia * v_obj.z(),
                                    -ground_torque_cap, ground_torque_cap) -
                         lambda_ground_t;
      lambda_ground_t += dtq;
      v_obj.z() += dtq * inv_i;
      max_change = std::max(max_change, std::abs(dtq));
    }

    if (max_change < params.pgs_tolerance) break;
  }
  if (it == params.pgs_iteration_cap && max_change >= params.pgs_tolerance)
    throw SolverFailure("contact impulse iteration exceeded cap");
}

std::vector<ContactWork> prepare_contacts(
    const WorldState& world, const std::vector<RobotModel>& models,
    const ObjectModel& object, const StepParams& params, bool with_bias,
    const std::vector<Eigen::LDLT<Eigen::MatrixXd>>& inertia) {
  std::vector<ContactWork> work;
  const auto cps = detect_contacts(world, models, object, params);
  for (const auto& cp : cps) {
    if (cp.gap > params.activation_gap) continue;
    ContactWork w;
    w.cp = cp;
    const int ri = cp.robot_index;
    const auto [p_ee, th_ee] = forward_kinematics(models[ri], world.q[ri]);
    (void)th_ee;
    const Eigen::MatrixXd J = geometric_jacobian(models[ri], world.q[ri]);
    const Eigen::Vector2d r_e = cp.position - p_ee;
    w.jac = J.topRows(2) + perp(r_e) * J.row(2);
    w.n = cp.normal;
    w.t = perp(cp.normal);
    w.r_obj = cp.position - world.object_pose.head<2>();
    w.w_n = inertia[ri].solve(w.jac.transpose() * w.n);
    w.w_t = inertia[ri].solve(w.jac.transpose() * w.t);
    const double inv_m = 1.0 / object.mass;
    const double inv_i = 1.0 / object.inertia;
    w.k_n = w.n.dot(w.jac * w.w_n) + inv_m +
            cross2(w.r_obj, w.n) * cross2(w.r_obj, w.n) * inv_i;
    w.k_t = w.t.dot(w.jac * w.w_t) + inv_m +
            cross2(w.r_obj, w.t) * cross2(w.r_obj, w.t) * inv_i;
    if (with_bias)
      w.bias = params.baumgarte *
               std::max(0.0, -cp.gap - 0.5 * params.penetration_tolerance) /
               params.dt;
    work.push_back(std::move(w));
  }
  return work;
}

std::vector<Eigen::LDLT<Eigen::MatrixXd>> factor_inertias(
    const WorldState& world, const std::vector<RobotModel>& models) {
  std::vector<Eigen::LDLT<Eigen::MatrixXd>> out;
  for (size_t i = 0; i < models.size(); ++i)
    out.emplace_back(joint_space_inertia(models[i], world.q[i]));
  return out;
}

}  // namespace

WorldState step(const WorldState& world, const std::vector<RobotModel>& models,
                const ObjectModel& object,
                const std::vector<Eigen::VectorXd>& torques,
                const StepParams& params) {
  if (params.dt <= 0) throw std::invalid_argument("step: dt must be > 0");
  WorldState next = world;
  const auto inertia = factor_inertias(world, models);

  for (size_t i = 0; i < models.size(); ++i) {
    const Eigen::VectorXd tau = torques[i]
                                    .cwiseMax(models[i].tau_min)
                                    .cwiseMin(models[i].tau_max);
    const Eigen::VectorXd h =
        bias_forces(models[i], world.q[i], world.dq[i], params.arm_gravity);
    next.dq[i] = world.dq[i] + params.dt * inertia[i].solve(tau - h);
  }

  auto contacts =
      prepare_contacts(world, models, object, params, true, inertia);
  if (!contacts.empty() || object.surface_friction_mu > 0.0) {
    const double cap = object.surface_friction_mu * object.mass *
                       params.gravity_out_of_plane * params.dt;
    pgs_solve(contacts, next.dq, next.object_twist, object, params, cap);
  }

  for (size_t i = 0; i < models.size(); ++i)
    next.q[i] = world.q[i] + params.dt * next.dq[i];
  next.object_pose += params.dt * next.object_twist;
  next.time = world.time + params.dt;
  next.active_contacts = detect_contacts(next, models, object, params);
  return next;
}

WorldState resolve_impact(const WorldState& world,
                          const std::vector<RobotModel>& models,
                          const ObjectModel& object, const StepParams& params) {
  WorldState next = world;
  const auto inertia = factor_inertias(world, models);
  auto contacts =
      prepare_contacts(world, models, object, params, false, inertia);
  if (!contacts.empty())
    pgs_solve(contacts, next.dq, next.object_twist, object, params, 0.0);
  next.active_contacts = detect_contacts(next, models, object, params);
  return next;
}

Eigen::Vector3d simulate_impact_event(const std::vector<RobotModel>& models,
                                      const ObjectModel& object,
                                      const std::vector<Eigen::VectorXd>& q,
                                      const std::vector<Eigen::VectorXd>& dq,
                                      const Eigen::Vector3d& object_pose,
                                      const StepParams& params) {
  WorldState w;
  w.q = q;
  w.dq = dq;
  w.object_pose = object_pose;
  w.active_contacts = detect_contacts(w, models, object, params);

  w = resolve_impact(w, models, object, params);

  StepParams p = params;
  p.dt = 5e-3;
  std::vector<Eigen::VectorXd> tau;
  for (size_t i = 0; i < models.size(); ++i) {
    const Eigen::VectorXd zero = Eigen::VectorXd::Zero(models[i].n_links);
    tau.push_back(bias_forces(models[i], w.q[i], zero, p.arm_gravity));
  }
  w = step(w, models, object, tau, p);
  return w.object_twist;
}

}  // namespace rs
