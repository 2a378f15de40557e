#include "rs/scenario.hpp"

#include <cstdint>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "rs/kinematics.hpp"

namespace rs {

using nlohmann::json;

const char* to_string(ScenarioKind k) {
  return k == ScenarioKind::HitAndPush ? "hit_and_push" : "dual_arm_grab";
}

const char* to_string(Variant v) {
  switch (v) {
    case Variant::Proposed: return "proposed";
    case Variant::NoRS: return "no_rs";
    case Variant::NoInterim: return "no_interim";
    case Variant::NoImpactMap: return "no_impact_map";
  }
  return "?";
}

Variant variant_from_string(const std::string& s) {
  if (s == "proposed") return Variant::Proposed;
  if (s == "no_rs") return Variant::NoRS;
  if (s == "no_interim") return Variant::NoInterim;
  if (s == "no_impact_map") return Variant::NoImpactMap;
  throw std::invalid_argument("unknown controller variant: " + s);
}

Eigen::Vector3d Scenario::actual_object_pose() const {
  Eigen::Vector3d p = object_pose_nominal;
  p.head<2>() += displacement * displacement_dir;
  return p;
}

double Scenario::face_half_extent(int robot) const {
  const Eigen::Vector2d n = face_normal[robot];
  return std::abs(n.x()) * object.half_extents.x() +
         std::abs(n.y()) * object.half_extents.y();
}

Eigen::Vector2d Scenario::face_tangent(int robot) const {
  const Eigen::Vector2d n = face_normal[robot];
  return {-n.y(), n.x()};
}

double Scenario::projected_coordinate(int robot, const Eigen::Vector2d& p) const {
  return face_tangent(robot).dot(p - object_pose_nominal.head<2>());
}

void Scenario::validate() const {
  if (robots.empty() || robots.size() > 2)
    throw std::invalid_argument("Scenario: 1 or 2 robots required");
  for (const auto& r : robots) r.validate();
  object.validate();
  if (ante.size() != robots.size() || face_normal.size() != robots.size() ||
      q0.size() != robots.size())
    throw std::invalid_argument("Scenario: per-robot arrays inconsistent");
  for (const auto& a : ante) a.validate();
  if (std::abs(displacement) > 0.05)
    throw std::invalid_argument("Scenario: displacement outside +-0.05 m");
  if (duration < 2.0)
    throw std::invalid_argument("Scenario: duration must be >= 2 s");
}

namespace {

json vec_to_json(const Eigen::VectorXd& v) {
  json a = json::array();
  for (int i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

Eigen::VectorXd vec_from_json(const json& a) {
  Eigen::VectorXd v(a.size());
  for (size_t i = 0; i < a.size(); ++i) v[i] = a[i].get<double>();
  return v;
}

json robot_to_json(const RobotModel& r) {
  return json{{"n_links", r.n_links},
              {"link_lengths_m", vec_to_json(r.link_lengths)},
              {"link_masses_kg", vec_to_json(r.link_masses)},
              {"link_inertias_kgm2", vec_to_json(r.link_inertias)},
              {"com_offsets_m", vec_to_json(r.com_offsets)},
              {"motor_inertia_kgm2", vec_to_json(r.motor_inertia)},
              {"base_pose_m_m_rad", vec_to_json(r.base_pose)},
              {"q_min_rad", vec_to_json(r.q_min)},
              {"q_max_rad", vec_to_json(r.q_max)},
              {"dq_min_rad_s", vec_to_json(r.dq_min)},
              {"dq_max_rad_s", vec_to_json(r.dq_max)},
              {"tau_min_Nm", vec_to_json(r.tau_min)},
              {"tau_max_Nm", vec_to_json(r.tau_max)},
              {"ee_radius_m", r.ee_radius}};
}

RobotModel robot_from_json(const json& j) {
  RobotModel r;
  r.n_links = j.at("n_links").get<int>();
  r.link_lengths = vec_from_json(j.at("link_lengths_m"));
  r.link_masses = vec_from_json(j.at("link_masses_kg"));
  r.link_inertias = vec_from_json(j.at("link_inertias_kgm2"));
  r.com_offsets = vec_from_json(j.at("com_offsets_m"));
  r.motor_inertia = vec_from_json(j.at("motor_inertia_kgm2"));
  r.base_pose = vec_from_json(j.at("base_pose_m_m_rad"));
  r.q_min = vec_from_json(j.at("q_min_rad"));
  r.q_max = vec_from_json(j.at("q_max_rad"));
  r.dq_min = vec_from_json(j.at("dq_min_rad_s"));
  r.dq_max = vec_from_json(j.at("dq_max_rad_s"));
  r.tau_min = vec_from_json(j.at("tau_min_Nm"));
  r.tau_max = vec_from_json(j.at("tau_max_Nm"));
  r.ee_radius = j.at("ee_radius_m").get<double>();
  return r;
}

json ante_to_json(const AnteFieldParams& a) {
  return json{{"p_imp_m", vec_to_json(a.p_imp)},
              {"v_imp_m_s", vec_to_json(a.v_imp)},
              {"alpha_1_s", a.alpha},
              {"r_min_a_m", a.r_min_a},
              {"r_max_a_m", a.r_max_a},
              {"p_o_est_m", vec_to_json(a.p_o_est)},
              {"theta_d_rad", a.theta_d},
              {"kappa_r_a_1_s", a.kappa_r_a},
              {"xi_d_rad", a.xi_d}};
}

AnteFieldParams ante_from_json(const json& j) {
  AnteFieldParams a;
  a.p_imp = vec_from_json(j.at("p_imp_m"));
  a.v_imp = vec_from_json(j.at("v_imp_m_s"));
  a.alpha = j.at("alpha_1_s").get<double>();
  a.r_min_a = j.at("r_min_a_m").get<double>();
  a.r_max_a = j.at("r_max_a_m").get<double>();
  a.p_o_est = vec_from_json(j.at("p_o_est_m"));
  a.theta_d = j.at("theta_d_rad").get<double>();
  a.kappa_r_a = j.at("kappa_r_a_1_s").get<double>();
  a.xi_d = j.at("xi_d_rad").get<double>();
  return a;
}

}  // namespace

std::string scenario_to_json(const Scenario& s) {
  json j;
  j["kind"] = to_string(s.kind);
  j["object_id"] = s.object_id;
  j["init_id"] = s.init_id;
  json robots = json::array();
  for (const auto& r : s.robots) robots.push_back(robot_to_json(r));
  j["robots"] = robots;
  j["object"] = {{"mass_kg", s.object.mass},
                 {"inertia_kgm2", s.object.inertia},
                 {"half_extents_m", vec_to_json(s.object.half_extents)},
                 {"surface_friction_mu", s.object.surface_friction_mu},
                 {"contact_friction_mu", s.object.contact_friction_mu},
                 {"restitution", s.object.restitution}};
  j["object_pose_nominal_m_m_rad"] = vec_to_json(s.object_pose_nominal);
  j["displacement_dir"] = vec_to_json(s.displacement_dir);
  j["displacement_m"] = s.displacement;
  json ante = json::array();
  for (const auto& a : s.ante) ante.push_back(ante_to_json(a));
  j["ante_fields"] = ante;
  j["post_field"] = {{"p_of_m", vec_to_json(s.post_base.p_of)},
                     {"kappa_p_1_s", s.post_base.kappa_p},
                     {"r_min_p_m", s.post_base.r_min_p},
                     {"r_max_p_m", s.post_base.r_max_p},
                     {"kappa_r_p_1_s", s.post_base.kappa_r_p},
                     {"theta_d_rad", s.post_base.theta_d}};
  json faces = json::array();
  for (const auto& n : s.face_normal) faces.push_back(vec_to_json(n));
  j["face_normals"] = faces;
  json q0 = json::array();
  for (const auto& q : s.q0) q0.push_back(vec_to_json(q));
  j["q0_rad"] = q0;
  j["controller"] = {{"dt_s", s.ctrl.dt},
                     {"d_track", s.ctrl.d_track},
                     {"k_track", s.ctrl.k_track},
                     {"k_q", s.ctrl.k_q},
                     {"k_sync", s.ctrl.k_sync},
                     {"w_track", s.ctrl.w_track},
                     {"w_q", s.ctrl.w_q},
                     {"w_sync", s.ctrl.w_sync},
                     {"dt_int_s", s.ctrl.dt_int},
                     {"variant", to_string(s.ctrl.variant)},
                     {"detect_threshold_rad_s", s.ctrl.detect_threshold},
                     {"detect_latency_steps", s.ctrl.detect_latency},
                     {"clamp_safety", s.ctrl.clamp_safety}};
  j["physics"] = {{"dt_s", s.physics.dt},
                  {"penetration_tolerance_m", s.physics.penetration_tolerance},
                  {"activation_gap_m", s.physics.activation_gap},
                  {"pgs_iteration_cap", s.physics.pgs_iteration_cap},
                  {"pgs_tolerance", s.physics.pgs_tolerance},
                  {"baumgarte", s.physics.baumgarte},
                  {"gravity_out_of_plane_m_s2", s.physics.gravity_out_of_plane}};
  j["seed"] = s.seed;
  j["duration_s"] = s.duration;
  j["impact_dataset_path"] = s.impact_dataset_path;
  j["plant_mass_scale"] = s.plant_mass_scale;
  return j.dump(2);
}

Scenario scenario_from_json(const std::string& text) {
  const json j = json::parse(text);
  Scenario s;
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "hit_and_push")
    s.kind = ScenarioKind::HitAndPush;
  else if (kind == "dual_arm_grab")
    s.kind = ScenarioKind::DualArmGrab;
  else
    throw std::invalid_argument("unknown scenario kind: " + kind);
  s.object_id = j.value("object_id", "custom");
  s.init_id = j.value("init_id", "A");
  for (const auto& r : j.at("robots")) s.robots.push_back(robot_from_json(r));
  const json& o = j.at("object");
  s.object.mass = o.at("mass_kg").get<double>();
  s.object.inertia = o.at("inertia_kgm2").get<double>();
  s.object.half_extents = vec_from_json(o.at("half_extents_m"));
  s.object.surface_friction_mu = o.at("surface_friction_mu").get<double>();
  s.object.contact_friction_mu = o.at("contact_friction_mu").get<double>();
  s.object.restitution = o.value("restitution", 0.0);
  s.object_pose_nominal = vec_from_json(j.at("object_pose_nominal_m_m_rad"));
  s.displacement_dir = vec_from_json(j.at("displacement_dir"));
  s.displacement = j.at("displacement_m").get<double>();
  for (const auto& a : j.at("ante_fields")) s.ante.push_back(ante_from_json(a));
  const json& pf = j.at("post_field");
  s.post_base.p_of = vec_from_json(pf.at("p_of_m"));
  s.post_base.kappa_p = pf.at("kappa_p_1_s").get<double>();
  s.post_base.r_min_p = pf.at("r_min_p_m").get<double>();
  s.post_base.r_max_p = pf.at("r_max_p_m").get<double>();
  s.post_base.kappa_r_p = pf.at("kappa_r_p_1_s").get<double>();
  s.post_base.theta_d = pf.at("theta_d_rad").get<double>();
  for (const auto& n : j.at("face_normals"))
    s.face_normal.push_back(vec_from_json(n));
  for (const auto& q : j.at("q0_rad")) s.q0.push_back(vec_from_json(q));
  const json& c = j.at("controller");
  s.ctrl.dt = c.at("dt_s").get<double>();
  s.ctrl.d_track = c.at("d_track").get<double>();
  s.ctrl.k_track = c.at("k_track").get<double>();
  s.ctrl.k_q = c.at("k_q").get<double>();
  s.ctrl.k_sync = c.at("k_sync").get<double>();
  s.ctrl.w_track = c.at("w_track").get<double>();
  s.ctrl.w_q = c.at("w_q").get<double>();
  s.ctrl.w_sync = c.at("w_sync").get<double>();
  s.ctrl.dt_int = c.at("dt_int_s").get<double>();
  s.ctrl.variant = variant_from_string(c.at("variant").get<std::string>());
  s.ctrl.detect_threshold = c.at("detect_threshold_rad_s").get<double>();
  s.ctrl.detect_latency = c.at("detect_latency_steps").get<int>();
  s.ctrl.clamp_safety = c.value("clamp_safety", 1.5);
  const json& ph = j.at("physics");
  s.physics.dt = ph.at("dt_s").get<double>();
  s.physics.penetration_tolerance = ph.at("penetration_tolerance_m").get<double>();
  s.physics.activation_gap = ph.at("activation_gap_m").get<double>();
  s.physics.pgs_iteration_cap = ph.at("pgs_iteration_cap").get<int>();
  s.physics.pgs_tolerance = ph.at("pgs_tolerance").get<double>();
  s.physics.baumgarte = ph.at("baumgarte").get<double>();
  s.physics.gravity_out_of_plane = ph.at("gravity_out_of_plane_m_s2").get<double>();
  s.seed = j.at("seed").get<unsigned>();
  s.duration = j.at("duration_s").get<double>();
  s.impact_dataset_path = j.value("impact_dataset_path", "");
  s.plant_mass_scale = j.value("plant_mass_scale", 1.0);
  s.validate();
  return s;
}

Scenario load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open scenario file: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return scenario_from_json(ss.str());
}

void save_scenario(const Scenario& s, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write scenario file: " + path);
  out << scenario_to_json(s) << "\n";
}

std::string Scenario::hash() const {
  // provenance hash over everything the impact map depends on: the physical
  // setup and the ante fields, excluding seed/variant/init/displacement
  std::ostringstream ss;
  ss.precision(17);
  ss << to_string(kind) << '|' << object.mass << '|' << object.inertia << '|'
     << object.half_extents.transpose() << '|' << object.surface_friction_mu
     << '|' << object.contact_friction_mu << '|'
     << object_pose_nominal.transpose() << '|';
  for (const auto& r : robots)
    ss << r.n_links << ';' << r.link_lengths.transpose() << ';'
       << r.link_masses.transpose() << ';' << r.link_inertias.transpose() << ';'
       << r.com_offsets.transpose() << ';' << r.motor_inertia.transpose() << ';'
       << r.base_pose.transpose() << ';' << r.ee_radius << '|';
  for (const auto& a : ante)
    ss << a.p_imp.transpose() << ';' << a.v_imp.transpose() << ';' << a.alpha
       << ';' << a.r_min_a << ';' << a.r_max_a << ';' << a.p_o_est.transpose()
       << ';' << a.theta_d << ';' << a.xi_d << '|';
  for (const auto& n : face_normal) ss << n.transpose() << '|';
  const std::string data = ss.str();
  uint64_t h = 1469598103934665603ull;  // FNV-1a
  for (unsigned char c : data) {
    h ^= c;
    h *= 1099511628211ull;
  }
  std::ostringstream out;
  out << std::hex << h;
  return out.str();
}

namespace {

RobotModel default_arm(const Eigen::Vector3d& base_pose) {
  RobotModel r;
  r.n_links = 4;
  r.link_lengths = Eigen::Vector4d{0.40, 0.35, 0.30, 0.20};
  r.link_masses = Eigen::Vector4d{2.0, 1.5, 1.0, 0.5};
  r.link_inertias =
      (r.link_masses.array() * r.link_lengths.array().square() / 12.0).matrix();
  r.com_offsets = 0.5 * r.link_lengths;
  r.motor_inertia = Eigen::Vector4d::Constant(0.05);
  r.base_pose = base_pose;
  r.q_min = Eigen::Vector4d::Constant(-2.9);
  r.q_max = Eigen::Vector4d::Constant(2.9);
  r.dq_min = Eigen::Vector4d::Constant(-4.0);
  r.dq_max = Eigen::Vector4d::Constant(4.0);
  r.tau_min = Eigen::Vector4d::Constant(-80.0);
  r.tau_max = Eigen::Vector4d::Constant(80.0);
  return r;
}

ObjectModel catalogue_object(const std::string& id) {
  ObjectModel o;
  o.half_extents = {0.08, 0.06};
  if (id == "parcel")
    o.mass = 0.60;
  else if (id == "catfood")
    o.mass = 1.30;
  else if (id == "juice")
    o.mass = 2.20;
  else
    throw std::invalid_argument("unknown object id: " + id);
  o.inertia = o.mass *
              (o.half_extents.squaredNorm()) / 3.0;
  o.surface_friction_mu = 0.30;
  o.contact_friction_mu = 0.60;
  return o;
}

Eigen::VectorXd solve_q0(const RobotModel& arm, const Eigen::Vector2d& p,
                         double theta, double xi, bool elbow_up) {
  auto q = inverse_kinematics(arm, p, theta, xi, elbow_up);
  if (!q) q = inverse_kinematics(arm, p, theta, xi, !elbow_up);
  if (!q)
    throw std::invalid_argument("initial configuration unreachable");
  return *q;
}

}  // namespace

Scenario make_push_scenario(const std::string& object_id,
                            const std::string& init_id, double displacement,
                            Variant variant, unsigned seed) {
  Scenario s;
  s.kind = ScenarioKind::HitAndPush;
  s.object_id = object_id;
  s.init_id = init_id;
  // base below the approach line: the whole corridor from the initial poses
  // through p_imp and on to the push-off target stays on one elbow branch
  // with >0.35 rad of joint-limit margin and clear of full extension
  s.robots = {default_arm({-0.10, -0.60, 0.0})};
  s.object = catalogue_object(object_id);
  s.object_pose_nominal = {0.55, 0.0, 0.0};
  s.displacement_dir = {1.0, 0.0};
  s.displacement = displacement;
  s.face_normal = {Eigen::Vector2d{-1.0, 0.0}};

  AnteFieldParams a;
  a.p_imp = {0.45, 0.0};
  a.v_imp = {0.25, 0.0};
  a.alpha = 5.0;
  // wide enough that the detector gate still covers impacts on an object
  // displaced by the full +-30 mm
  a.r_min_a = 0.14;
  a.r_max_a = 0.28;
  a.p_o_est = {0.55, 0.0};
  a.theta_d = 0.0;
  a.kappa_r_a = 4.0;
  a.xi_d = 0.9;
  s.ante = {a};

  s.post_base.p_of = {0.87, 0.0};
  s.post_base.kappa_p = 2.0;
  s.post_base.r_min_p = 0.1;
  s.post_base.r_max_p = 0.3;
  s.post_base.kappa_r_p = 4.0;
  s.post_base.theta_d = 0.0;

  Eigen::Vector2d p0;
  double th0;
  if (init_id == "A") {
    p0 = {0.00, 0.20};
    th0 = 0.3;
  } else if (init_id == "B") {
    p0 = {0.05, -0.10};
    th0 = -0.3;
  } else if (init_id == "C") {
    p0 = {-0.05, 0.05};
    th0 = 0.2;
  } else {
    throw std::invalid_argument("unknown init id: " + init_id);
  }
  s.q0 = {solve_q0(s.robots[0], p0, th0, a.xi_d, false)};

  s.ctrl.variant = variant;
  s.seed = seed;
  s.duration = 3.5;
  return s;
}

Scenario make_grab_scenario(const std::string& object_id,
                            const std::string& init_id, double displacement,
                            Variant variant, unsigned seed) {
  Scenario s;
  s.kind = ScenarioKind::DualArmGrab;
  s.object_id = object_id;
  s.init_id = init_id;
  // bases to the right of the object, mirrored across the conveyor line:
  // the approach and push-through corridors stay on one elbow branch per
  // arm and clear of the 2R-subchain singularities
  s.robots = {default_arm({1.10, -1.05, M_PI / 2}),
              default_arm({1.10, 1.05, -M_PI / 2})};
  s.object = catalogue_object(object_id);
  s.object_pose_nominal = {0.55, 0.0, 0.0};
  s.displacement_dir = {0.0, 1.0};
  s.displacement = displacement;
  s.face_normal = {Eigen::Vector2d{0.0, -1.0}, Eigen::Vector2d{0.0, 1.0}};

  AnteFieldParams a1;
  a1.p_imp = {0.55, -0.08};
  // grab while moving: the transport component keeps the predicted
  // post-impact object velocity pointing toward the push-off target, so the
  // post field has no stagnation surface short of p_of; its ratio to the
  // normal component stays below the contact friction coefficient so the
  // tangential impulse sticks instead of saturating
  a1.v_imp = {0.075, std::sqrt(0.0625 - 0.005625)};
  a1.alpha = 5.0;
  a1.r_min_a = 0.14;
  a1.r_max_a = 0.28;
  a1.p_o_est = {0.55, 0.0};
  a1.theta_d = M_PI / 2;
  a1.kappa_r_a = 4.0;
  a1.xi_d = 0.5;
  AnteFieldParams a2 = a1;
  a2.p_imp = {0.55, 0.08};
  a2.v_imp = {0.075, -std::sqrt(0.0625 - 0.005625)};
  a2.theta_d = -M_PI / 2;
  a2.xi_d = -0.5;
  s.ante = {a1, a2};

  s.post_base.p_of = {0.87, 0.0};
  s.post_base.kappa_p = 2.0;
  // the clamped grab leaves only a small post-impact speed, so blend toward
  // the push-off attractor after a short escape distance
  s.post_base.r_min_p = 0.02;
  s.post_base.r_max_p = 0.15;
  s.post_base.kappa_r_p = 4.0;
  s.post_base.theta_d = M_PI / 2;  // per-robot theta_d taken from ante params

  Eigen::Vector2d p1, p2;
  double th1, th2;
  if (init_id == "A") {
    p1 = {0.40, -0.45};
    th1 = M_PI / 2 + 0.3;
    p2 = {0.72, 0.50};
    th2 = -M_PI / 2 - 0.2;
  } else if (init_id == "B") {
    p1 = {0.80, -0.40};
    th1 = M_PI / 2 - 0.2;
    p2 = {0.45, 0.42};
    th2 = -M_PI / 2 + 0.25;
  } else if (init_id == "C") {
    p1 = {0.60, -0.55};
    th1 = M_PI / 2;
    p2 = {0.35, 0.50};
    th2 = -M_PI / 2 + 0.15;
  } else {
    throw std::invalid_argument("unknown init id: " + init_id);
  }
  s.q0 = {solve_q0(s.robots[0], p1, th1, s.ante[0].xi_d, false),
          solve_q0(s.robots[1], p2, th2, s.ante[1].xi_d, true)};

  s.ctrl.variant = variant;
  s.seed = seed;
  // the clamped transport starts slow; leave time to settle at p_of
  s.duration = 4.5;
  return s;
}

}  // namespace rs
