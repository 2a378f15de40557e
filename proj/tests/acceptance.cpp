// Acceptance suite: one pass/fail line per criterion, exit code 3 on any
// failure. Expects the tests source directory (for the golden SVG fixture)
// as argv[1]; pass --write-golden as argv[2] to regenerate the fixture.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "rs/ablation.hpp"
#include "rs/contact.hpp"
#include "rs/dynamics.hpp"
#include "rs/kinematics.hpp"
#include "rs/svg_plot.hpp"

using namespace rs;

namespace {

struct Criterion {
  int id;
  std::string name;
  bool pass = false;
  std::string detail;
};

std::vector<Criterion> g_results;

void report(int id, const std::string& name, bool pass,
            const std::string& detail) {
  g_results.push_back({id, name, pass, detail});
  std::printf("[%s] %2d. %-28s %s\n", pass ? "PASS" : "FAIL", id, name.c_str(),
              detail.c_str());
  std::fflush(stdout);
}

double seconds_since(
    const std::chrono::steady_clock::time_point& t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
      .count();
}

WorldState initial_world(const Scenario& s, const Controller& ctrl) {
  WorldState w;
  w.q = s.q0;
  w.dq.resize(s.arm_count());
  for (int i = 0; i < s.arm_count(); ++i)
    w.dq[i] = Eigen::VectorXd::Zero(s.robots[i].n_links);
  w.object_pose = s.actual_object_pose();
  // on-reference start, matching run_rollout
  for (int i = 0; i < s.arm_count(); ++i)
    if (auto dq0 = joint_velocities_for_twist(s.robots[i], w.q[i],
                                              ctrl.reference_twist(w, i)))
      w.dq[i] = *dq0;
  return w;
}

Eigen::Vector2d perp(const Eigen::Vector2d& v) { return {-v.y(), v.x()}; }

// Groupwise ordering: proposed lowest within every group key. Ties are
// allowed: before the first detection all variants share one code path, so
// a peak on the shared approach gives exactly equal group means.
bool proposed_lowest(const std::vector<GroupRow>& rows, std::string* why) {
  std::map<std::string, double> proposed;
  for (const auto& r : rows)
    if (r.variant == Variant::Proposed) proposed[r.group_key] = r.mean_max_target_accel;
  for (const auto& r : rows) {
    if (r.variant == Variant::Proposed) continue;
    auto it = proposed.find(r.group_key);
    if (it == proposed.end() || !(it->second <= r.mean_max_target_accel)) {
      if (why)
        *why = std::string(to_string(r.variant)) + "@" + r.group_key +
               " not above proposed";
      return false;
    }
  }
  return true;
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.4g", v);
  return buf;
}

double percentile95(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  return v[static_cast<size_t>(0.95 * (v.size() - 1))];
}

// Per-rollout torque-jump statistics for criterion 5.
struct JumpStats {
  double p95 = 0.0;
  std::vector<double> window_max;  // per mode switch, max jump within +-10 ms
};

JumpStats torque_jumps(const RolloutLog& log) {
  JumpStats out;
  std::vector<double> jumps(log.steps.size(), 0.0);
  std::vector<double> switch_times;
  for (size_t k = 1; k < log.steps.size(); ++k) {
    double j = 0.0;
    for (size_t i = 0; i < log.steps[k].tau.size(); ++i)
      j = std::max(j, (log.steps[k].tau[i] - log.steps[k - 1].tau[i])
                          .lpNorm<Eigen::Infinity>());
    jumps[k] = j;
    if (log.steps[k].mode != log.steps[k - 1].mode)
      switch_times.push_back(log.steps[k].time);
  }
  out.p95 = percentile95(std::vector<double>(jumps.begin() + 1, jumps.end()));
  for (double ts : switch_times) {
    double m = 0.0;
    for (size_t k = 1; k < log.steps.size(); ++k)
      if (std::abs(log.steps[k].time - ts) <= 0.010 + 1e-9)
        m = std::max(m, jumps[k]);
    out.window_max.push_back(m);
  }
  return out;
}

// Deterministic synthetic log for the golden SVG fixture.
RolloutLog synthetic_log() {
  RolloutLog log;
  log.scenario = make_push_scenario("parcel", "A", 0.0, Variant::Proposed, 1);
  log.detect_times = {0.020};
  for (int k = 0; k < 60; ++k) {
    StepRecord r;
    r.time = 1e-3 * k;
    r.mode = k < 20 ? Mode::Ante : Mode::Post;
    r.ee_twist = {{0.3 * std::sin(0.1 * k), 0.2 * std::cos(0.1 * k), 0.05}};
    r.ref_twist = {{0.27 * std::sin(0.1 * k), 0.18 * std::cos(0.1 * k), 0.04}};
    r.target_accel_norm = std::abs(std::sin(0.2 * k)) * 3.0;
    r.impact_flags = {static_cast<uint8_t>(k >= 20)};
    log.steps.push_back(std::move(r));
  }
  return log;
}

}  // namespace

// --- criterion implementations ---------------------------------------------

static void criterion_push_ablation(const ImpactDataset& push_ds) {
  const auto t0 = std::chrono::steady_clock::now();
  const AblationSummary s = run_ablation(default_push_matrix(), 1, &push_ds);
  const double elapsed = seconds_since(t0);

  int failed_cells = 0;
  for (const auto& c : s.cells) failed_cells += c.failed;
  std::string why;
  bool ok = failed_cells == 0;
  if (!ok) why = std::to_string(failed_cells) + " failed cells";
  ok = ok && proposed_lowest(s.by_object, &why) &&
       proposed_lowest(s.by_init, &why) &&
       proposed_lowest(s.by_displacement, &why);
  const double prop = overall_mean(s, Variant::Proposed);
  const double nors = overall_mean(s, Variant::NoRS);
  if (ok && !(nors >= 2.0 * prop)) {
    ok = false;
    why = "no_rs/proposed ratio " + fmt(nors / prop) + " < 2";
  }
  if (ok && elapsed > 300.0) {
    ok = false;
    why = "runtime " + fmt(elapsed) + " s > 300 s";
  }
  report(1, "ablation ordering (push)", ok,
         ok ? "180 cells, no_rs/proposed = " + fmt(nors / prop) + ", " +
                  fmt(elapsed) + " s"
            : why);
}

static void criterion_grab_ablation(const ImpactDataset& grab_ds) {
  const auto t0 = std::chrono::steady_clock::now();
  const AblationSummary s = run_ablation(default_grab_matrix(), 1, &grab_ds);
  const double elapsed = seconds_since(t0);

  int failed_cells = 0;
  for (const auto& c : s.cells) failed_cells += c.failed;
  std::string why;
  bool ok = failed_cells == 0;
  if (!ok) why = std::to_string(failed_cells) + " failed cells";
  ok = ok && proposed_lowest(s.by_object, &why) &&
       proposed_lowest(s.by_init, &why) &&
       proposed_lowest(s.by_displacement, &why);

  // first-impact ordering: the right robot (base y > 0) flags first whenever
  // the object is displaced toward it
  int checked = 0;
  for (const auto& c : s.cells) {
    if (c.failed || c.displacement <= 0.0) continue;
    const double t_left = c.detect_times[0], t_right = c.detect_times[1];
    if (t_right < 0.0 || (t_left >= 0.0 && t_right >= t_left)) {
      ok = false;
      why = "cell " + std::to_string(c.index) + ": right robot not first (" +
            fmt(t_left) + " vs " + fmt(t_right) + ")";
      break;
    }
    ++checked;
  }
  const double prop = overall_mean(s, Variant::Proposed);
  const double nors = overall_mean(s, Variant::NoRS);
  if (ok && !(nors >= 2.0 * prop)) {
    ok = false;
    why = "no_rs/proposed ratio " + fmt(nors / prop) + " < 2";
  }
  if (ok && elapsed > 480.0) {
    ok = false;
    why = "runtime " + fmt(elapsed) + " s > 480 s";
  }
  report(2, "ablation ordering (grab)", ok,
         ok ? "180 cells, ratio " + fmt(nors / prop) + ", " +
                  std::to_string(checked) + " first-impact checks, " +
                  fmt(elapsed) + " s"
            : why);
}

static void criterion_velocity_jump(const ImpactDataset& push_ds) {
  const Scenario s =
      make_push_scenario("parcel", "A", 0.0, Variant::Proposed, 1);
  Controller ctrl(s, &push_ds);
  WorldState w = initial_world(s, ctrl);
  WorldState pre = w, post = w;
  int impact_step = -1;
  for (int k = 0; k < 3500; ++k) {
    const ControlOutput out = ctrl.step(w);
    const WorldState next = step(w, s.robots, s.object, out.torques, s.physics);
    if (impact_step < 0 && next.object_twist.norm() > 1e-9) {
      impact_step = k;
      pre = w;
      post = next;
    }
    w = next;
    if (impact_step >= 0 && ctrl.mode() != Mode::Ante) break;
  }
  if (impact_step < 0 || ctrl.mode() == Mode::Ante) {
    report(3, "velocity-jump structure", false, "no impact in the rollout");
    return;
  }

  // inelastic momentum prediction from the pre-impact state, with the
  // effective mass taken at the contact point
  const RobotModel& rm = s.robots[0];
  const Eigen::Vector2d n = s.face_normal[0];  // from object toward the arm
  const Eigen::Vector2d d = -n;                // direction of the push
  const Eigen::MatrixXd J = geometric_jacobian(rm, pre.q[0]);
  const Eigen::Vector2d r_e = -rm.ee_radius * n;  // ee center -> contact point
  const Eigen::MatrixXd jc = J.topRows(2) + perp(r_e) * J.row(2);
  const Eigen::MatrixXd mbar = joint_space_inertia(rm, pre.q[0]);
  const double k_inv = d.dot(jc * mbar.ldlt().solve(jc.transpose() * d));
  const double m_eff = 1.0 / k_inv;
  const double v_minus = d.dot(jc * pre.dq[0]);
  const double predicted = m_eff * v_minus / (m_eff + s.object.mass);
  const double measured = d.dot(post.object_twist.head<2>());

  bool ok = std::abs(measured - predicted) <= 0.02 * std::abs(predicted);
  std::string why = "post speed " + fmt(measured) + " vs predicted " +
                    fmt(predicted);
  if (ok && !(post.object_twist.head<2>().norm() < v_minus)) {
    ok = false;
    why = "object speed not below the ante approach speed";
  }
  // proposed reference at detection equals the interpolated prediction
  if (ok) {
    const Eigen::Vector2d at_det =
        ctrl.post_field_velocity(ctrl.cached_p_o_plus());
    if ((at_det - ctrl.cached_v_o_est().head<2>()).norm() != 0.0) {
      ok = false;
      why = "reference at detection differs from the prediction";
    }
  }
  report(3, "velocity-jump structure", ok,
         ok ? "post " + fmt(measured) + " m/s, predicted " + fmt(predicted) +
                  " m/s, ante " + fmt(v_minus) + " m/s"
            : why);
}

static void criterion_impact_map(const ImpactDataset& push_ds,
                                 const ImpactDataset& grab_ds) {
  bool ok = true;
  std::string why;

  // node reproduction; some grab nodes are physically near-zero (opposed
  // pinch offsets cancel the transport), so errors are taken relative to a
  // floor of 1% of the dataset's largest node
  auto scale_floor = [](const ImpactDataset& ds) {
    double top = 0.0;
    for (const auto& smp : ds.samples)
      top = std::max(top, smp.v_o_plus.norm());
    return 0.01 * top;
  };
  double worst_node = 0.0;
  for (const ImpactDataset* ds : {&push_ds, &grab_ds}) {
    const double floor = scale_floor(*ds);
    for (const auto& smp : ds->samples) {
      const double rel = (interpolate(*ds, smp.key) - smp.v_o_plus).norm() /
                         std::max(smp.v_o_plus.norm(), floor);
      worst_node = std::max(worst_node, rel);
    }
  }
  if (worst_node > 1e-9) {
    ok = false;
    why = "node reproduction " + fmt(worst_node) + " > 1e-9";
  }

  // leave-one-out cross validation
  double worst_median = 0.0;
  for (const ImpactDataset* ds : {&push_ds, &grab_ds}) {
    const double floor = scale_floor(*ds);
    std::vector<double> errs;
    for (size_t i = 0; i < ds->samples.size(); ++i) {
      ImpactDataset sub;
      sub.arm_count = ds->arm_count;
      sub.rho = ds->rho;
      for (size_t j = 0; j < ds->samples.size(); ++j)
        if (j != i) sub.samples.push_back(ds->samples[j]);
      build_weights(sub);
      const Eigen::Vector3d pred = interpolate(sub, ds->samples[i].key);
      errs.push_back((pred - ds->samples[i].v_o_plus).norm() /
                     std::max(ds->samples[i].v_o_plus.norm(), floor));
    }
    std::sort(errs.begin(), errs.end());
    const double median = errs[errs.size() / 2];
    worst_median = std::max(worst_median, median);
    if (ok && median > 0.10) {
      ok = false;
      why = "LOOCV median " + fmt(median) + " > 0.10";
    }
  }

  // 1-DOF analytic momentum oracle: single link hit on a resting object
  if (ok) {
    RobotModel one;
    one.n_links = 1;
    one.link_lengths = Eigen::VectorXd::Constant(1, 0.5);
    one.link_masses = Eigen::VectorXd::Constant(1, 1.2);
    one.link_inertias = Eigen::VectorXd::Constant(1, 0.03);
    one.com_offsets = Eigen::VectorXd::Constant(1, 0.25);
    one.motor_inertia = Eigen::VectorXd::Constant(1, 0.0);
    one.q_min = Eigen::VectorXd::Constant(1, -10.0);
    one.q_max = Eigen::VectorXd::Constant(1, 10.0);
    one.dq_min = Eigen::VectorXd::Constant(1, -50.0);
    one.dq_max = Eigen::VectorXd::Constant(1, 50.0);
    one.tau_min = Eigen::VectorXd::Constant(1, -100.0);
    one.tau_max = Eigen::VectorXd::Constant(1, 100.0);

    ObjectModel obj;
    obj.mass = 0.8;
    obj.inertia = 0.01;
    obj.half_extents = {0.08, 0.06};
    obj.surface_friction_mu = 0.0;
    obj.contact_friction_mu = 0.0;

    WorldState w;
    w.q = {Eigen::VectorXd::Zero(1)};
    w.dq = {Eigen::VectorXd::Constant(1, 1.0)};
    // tip at (0.5, 0) moving +y; object face just touching above the disc
    w.object_pose = {0.5, obj.half_extents.y() + one.ee_radius - 1e-5, 0.0};
    StepParams params;
    const WorldState after = resolve_impact(w, {one}, obj, params);

    const double l = one.link_lengths[0];
    const double i_tot =
        one.link_inertias[0] + one.link_masses[0] * 0.25 * 0.25;
    const double m_eff = i_tot / (l * l);
    const double v_minus = l * 1.0;
    const double v_common = m_eff * v_minus / (m_eff + obj.mass);
    if (std::abs(after.object_twist.y() - v_common) > 1e-6) {
      ok = false;
      why = "1-DOF momentum mismatch " +
            fmt(std::abs(after.object_twist.y() - v_common));
    }
  }

  report(4, "impact-map fidelity", ok,
         ok ? "node err " + fmt(worst_node) + ", LOOCV median " +
                  fmt(worst_median)
            : why);
}

static void criterion_torque_continuity(const ImpactDataset& push_ds) {
  bool ok = true;
  std::string why, detail;
  for (const std::string& object : {"parcel", "catfood", "juice"}) {
    Scenario prop = make_push_scenario(object, "A", 0.0, Variant::Proposed, 1);
    Scenario nors = make_push_scenario(object, "A", 0.0, Variant::NoRS, 1);
    const RolloutLog lp = run_rollout(prop, &push_ds);
    const RolloutLog ln = run_rollout(nors, nullptr);
    if (lp.failed || ln.failed) {
      ok = false;
      why = object + ": rollout failed";
      break;
    }
    const JumpStats sp = torque_jumps(lp);
    const JumpStats sn = torque_jumps(ln);
    if (sp.window_max.empty() || sn.window_max.empty()) {
      ok = false;
      why = object + ": no mode switch observed";
      break;
    }
    for (double m : sp.window_max)
      if (m > sp.p95 + 1e-12) {
        ok = false;
        why = object + ": proposed window jump " + fmt(m) + " > P95 " +
              fmt(sp.p95);
      }
    const double worst_n =
        *std::max_element(sn.window_max.begin(), sn.window_max.end());
    if (ok && !(worst_n > sn.p95)) {
      ok = false;
      why = object + ": no_rs does not violate (window " + fmt(worst_n) +
            " <= P95 " + fmt(sn.p95) + ")";
    }
    if (!ok) break;
    detail += object + " P95 " + fmt(sp.p95) + "; ";
  }
  report(5, "torque continuity", ok, ok ? detail : why);
}

static void criterion_qp(const ImpactDataset& push_ds) {
  bool ok = true;
  std::string why;
  std::mt19937 rng(101);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  QPSolver solver;
  double worst_gap = 0.0;
  for (int trial = 0; trial < 1000 && ok; ++trial) {
    const int n = 3 + trial % 8;
    Eigen::MatrixXd a(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) a(i, j) = gauss(rng);
    QPProblem p;
    p.H = a.transpose() * a + 0.3 * Eigen::MatrixXd::Identity(n, n);
    p.g = Eigen::VectorXd::NullaryExpr(n, [&](int) { return 2.0 * u(rng); });
    p.A = Eigen::MatrixXd::Identity(n, n);
    p.lb.resize(n);
    p.ub.resize(n);
    for (int k = 0; k < n; ++k) {
      const double x = u(rng), y = u(rng);
      p.lb[k] = std::min(x, y);
      p.ub[k] = std::max(x, y);
    }
    const QPSolution sol = solver.solve(p);
    if (sol.status != QPStatus::Optimal) {
      ok = false;
      why = "random problem " + std::to_string(trial) + " not optimal";
      break;
    }
    const Eigen::VectorXd ref =
        oracle::projected_gradient_box(p.H, p.g, p.lb, p.ub);
    const double gap = oracle::qp_objective(p.H, p.g, sol.x) -
                       oracle::qp_objective(p.H, p.g, ref);
    worst_gap = std::max(worst_gap, gap);
    if (gap > 1e-8) {
      ok = false;
      why = "objective gap " + fmt(gap) + " > 1e-8";
    }
  }

  // every closed-loop QP solution satisfies its bounds
  int solved = 0, total = 0;
  double worst_violation = 0.0;
  if (ok) {
    const Scenario s =
        make_push_scenario("catfood", "B", 0.015, Variant::Proposed, 2);
    Controller ctrl(s, &push_ds);
    QPSolver fresh;
    WorldState w = initial_world(s, ctrl);
    for (int k = 0; k < 2500; ++k) {
      const ControlOutput out = ctrl.step(w);
      const QPProblem qp = ctrl.build_qp(w);
      const QPSolution sol = fresh.solve(qp);
      ++total;
      if (sol.status == QPStatus::Optimal) {
        ++solved;
        const Eigen::VectorXd ax = qp.A * sol.x;
        const double viol = std::max((qp.lb - ax).maxCoeff(),
                                     (ax - qp.ub).maxCoeff());
        worst_violation = std::max(worst_violation, viol);
        if (viol > 1e-8) {
          ok = false;
          why = "closed-loop bound violation " + fmt(viol);
          break;
        }
      }
      w = step(w, s.robots, s.object, out.torques, s.physics);
    }
    if (ok && solved < total * 99 / 100) {
      ok = false;
      why = "only " + std::to_string(solved) + "/" + std::to_string(total) +
            " closed-loop QPs optimal";
    }
  }
  report(6, "QP correctness", ok,
         ok ? "1000 oracle problems (worst gap " + fmt(worst_gap) + "), " +
                  std::to_string(solved) + " closed-loop solves (worst bound " +
                  "slack " + fmt(worst_violation) + ")"
            : why);
}

static void criterion_fields() {
  const Scenario s =
      make_push_scenario("parcel", "A", 0.0, Variant::Proposed, 1);
  const AnteFieldParams& a = s.ante[0];
  bool ok = true;
  std::string why;

  std::mt19937 rng(33);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int k = 0; k < 200 && ok; ++k) {
    const Eigen::Vector2d p(u(rng), u(rng));
    if (std::abs(ante_velocity_raw(p, a).norm() - a.v_imp.norm()) > 1e-12) {
      ok = false;
      why = "raw field speed not preserved";
    }
  }
  const Eigen::Vector2d inside = a.p_o_est + Eigen::Vector2d(0.04, 0.05);
  if (ok && (ante_velocity(inside, a) - a.v_imp).norm() != 0.0) {
    ok = false;
    why = "beta = 0 region is not exactly v_imp";
  }
  if (ok) {
    const double h = 1e-6;
    auto deriv = [&](double r) {
      return (smoothstep(r + h, a.r_min_a, a.r_max_a) -
              smoothstep(r - h, a.r_min_a, a.r_max_a)) /
             (2 * h);
    };
    if (std::abs(deriv(a.r_min_a - 2 * h) - deriv(a.r_min_a + 2 * h)) > 1e-3 ||
        std::abs(deriv(a.r_max_a - 2 * h) - deriv(a.r_max_a + 2 * h)) > 1e-3) {
      ok = false;
      why = "smoothstep not C1 at a knot";
    }
  }
  double worst = 0.0;
  if (ok) {
    auto field = [&](const Eigen::Vector2d& p) { return ante_velocity(p, a); };
    std::uniform_real_distribution<double> span(-0.6, 0.6);
    int tested = 0;
    while (tested < 100) {
      const Eigen::Vector2d p = a.p_o_est + Eigen::Vector2d(span(rng), span(rng));
      const double r = (p - a.p_o_est).norm();
      if (std::abs(r - a.r_min_a) < 2e-3 || std::abs(r - a.r_max_a) < 2e-3)
        continue;
      const double h = 1e-4;
      const Eigen::Vector2d num =
          (field(oracle::rk4(field, p, h)) - field(oracle::rk4(field, p, -h))) /
          (2 * h);
      const double rel = (ante_acceleration(p, a) - num).norm() /
                         std::max(1.0, num.norm());
      worst = std::max(worst, rel);
      if (rel > 1e-3) {
        ok = false;
        why = "streamline disagreement " + fmt(rel) + " at (" + fmt(p.x()) +
              ", " + fmt(p.y()) + ")";
        break;
      }
      ++tested;
    }
  }
  report(7, "field properties", ok,
         ok ? "100 streamline points, worst rel " + fmt(worst) : why);
}

static void criterion_interim(const ImpactDataset& push_ds,
                              const ImpactDataset& grab_ds) {
  bool ok = true;
  std::string why;

  // gamma endpoints and hand-off exactness on the push scenario
  {
    const Scenario s =
        make_push_scenario("parcel", "A", 0.0, Variant::Proposed, 1);
    Controller ctrl(s, &push_ds);
    WorldState w = initial_world(s, ctrl);
    Eigen::Vector2d p_entry = Eigen::Vector2d::Zero();
    bool entered = false;
    while (ctrl.mode() == Mode::Ante && w.time < 3.5) {
      const Mode before = ctrl.mode();
      const ControlOutput out = ctrl.step(w);
      if (before == Mode::Ante && ctrl.mode() == Mode::Interim) {
        entered = true;
        p_entry = forward_kinematics(s.robots[0], w.q[0]).first;
      }
      w = step(w, s.robots, s.object, out.torques, s.physics);
    }
    if (!entered) {
      ok = false;
      why = "interim mode never entered";
    }
    if (ok && (ctrl.p_int_d(0) - p_entry).norm() != 0.0) {
      ok = false;
      why = "position feedback not zero at T_imp";
    }
    if (ok) {
      const Eigen::Vector3d at1 = ctrl.mode_target(w, 0, Mode::Interim, 1.0);
      const Eigen::Vector3d post = ctrl.mode_target(w, 0, Mode::Post, 0.0);
      // past the entry fade the blend is affine in gamma
      const Eigen::Vector3d lo = ctrl.mode_target(w, 0, Mode::Interim, 0.4);
      const Eigen::Vector3d hi = ctrl.mode_target(w, 0, Mode::Interim, 0.8);
      const Eigen::Vector3d mid = ctrl.mode_target(w, 0, Mode::Interim, 0.6);
      if ((at1 - post).lpNorm<Eigen::Infinity>() > 1e-12) {
        ok = false;
        why = "interim(1) differs from post";
      } else if ((mid - 0.5 * (lo + hi)).lpNorm<Eigen::Infinity>() > 1e-12) {
        ok = false;
        why = "gamma blend is not affine past the fade";
      }
    }
  }

  // dual-arm interim completes contact on all default grab cells
  int cells = 0;
  if (ok) {
    const MatrixConfig m = default_grab_matrix();
    for (size_t pair = 0; pair < m.inits.size() && ok; ++pair)
      for (const std::string& object : m.objects) {
        const Scenario s =
            make_grab_scenario(object, m.inits[pair],
                               m.displacements[pair], Variant::Proposed, 1);
        Controller ctrl(s, &grab_ds);
        WorldState w = initial_world(s, ctrl);
        std::vector<double> touch(2, -1.0);
        double t_post = -1.0;
        for (int k = 0; k < 3500; ++k) {
          const ControlOutput out = ctrl.step(w);
          w = step(w, s.robots, s.object, out.torques, s.physics);
          for (const auto& cp : w.active_contacts)
            if (cp.gap <= s.physics.activation_gap &&
                touch[cp.robot_index] < 0.0)
              touch[cp.robot_index] = w.time;
          if (ctrl.mode() == Mode::Post && t_post < 0.0) t_post = w.time;
          if (t_post >= 0.0 && w.time > t_post + 0.1) break;
        }
        const double deadline = ctrl.t_imp() + s.ctrl.dt_int + 1e-9;
        if (ctrl.mode() != Mode::Post || touch[0] < 0.0 || touch[1] < 0.0 ||
            std::max(touch[0], touch[1]) > deadline) {
          ok = false;
          why = object + "/" + m.inits[pair] + ": second contact at " +
                fmt(std::max(touch[0], touch[1])) + " vs deadline " +
                fmt(deadline);
          break;
        }
        ++cells;
      }
  }
  report(8, "interim-mode contract", ok,
         ok ? std::to_string(cells) + " grab cells complete contact in time"
            : why);
}

static void criterion_synchronization(const ImpactDataset& grab_ds) {
  bool ok = true;
  std::string why, detail;
  for (const std::string& init : {"A", "B", "C"}) {
    const Scenario s =
        make_grab_scenario("parcel", init, 0.0, Variant::Proposed, 1);
    Controller ctrl(s, &grab_ds);
    const Eigen::Matrix2d ts = ctrl.mirror_operator();
    if ((ts * ts - Eigen::Matrix2d::Identity()).lpNorm<Eigen::Infinity>() >
        1e-14) {
      ok = false;
      why = "mirror operator is not an involution";
      break;
    }
    WorldState w = initial_world(s, ctrl);
    double err = -1.0;
    for (int k = 0; k < 3500; ++k) {
      const ControlOutput out = ctrl.step(w);
      w = step(w, s.robots, s.object, out.torques, s.physics);
      bool touching = false;
      for (const auto& cp : w.active_contacts)
        touching |= cp.gap <= s.physics.activation_gap;
      if (touching) {
        const Eigen::Vector2d p1 = forward_kinematics(s.robots[0], w.q[0]).first;
        const Eigen::Vector2d p2 = forward_kinematics(s.robots[1], w.q[1]).first;
        err = (ctrl.mirror(p2) - p1).norm();
        break;
      }
    }
    if (err < 0.0) {
      ok = false;
      why = "init " + init + ": no impact";
      break;
    }
    if (err >= 0.005) {
      ok = false;
      why = "init " + init + ": mirror error " + fmt(err) + " m >= 5 mm";
      break;
    }
    detail += init + " " + fmt(err * 1e3) + " mm; ";
  }
  report(9, "synchronization", ok, ok ? detail : why);
}

static void criterion_determinism(const ImpactDataset& push_ds,
                                  const std::string& fixture_dir,
                                  bool write_golden) {
  bool ok = true;
  std::string why;
  const Scenario s =
      make_push_scenario("juice", "C", -0.030, Variant::Proposed, 7);
  const RolloutLog a = run_rollout(s, &push_ds);
  const RolloutLog b = run_rollout(s, &push_ds);
  std::ostringstream ca, cb;
  write_rollout_csv(a, ca);
  write_rollout_csv(b, cb);
  if (ca.str() != cb.str()) {
    ok = false;
    why = "repeated same-seed rollouts produced different CSV bytes";
  }

  const std::string golden_path = fixture_dir + "/golden_velocity.svg";
  const std::string svg = render_velocity_svg(synthetic_log());
  if (write_golden) {
    std::ofstream out(golden_path, std::ios::binary);
    out << svg;
  }
  if (ok) {
    std::ifstream in(golden_path, std::ios::binary);
    if (!in) {
      ok = false;
      why = "golden fixture missing: " + golden_path;
    } else {
      std::ostringstream buf;
      buf << in.rdbuf();
      if (buf.str() != svg) {
        ok = false;
        why = "SVG does not match the golden fixture";
      }
    }
  }
  report(10, "determinism and formats", ok,
         ok ? "CSV byte-identical, golden SVG matches" : why);
}

int main(int argc, char** argv) {
  const std::string fixture_dir = argc > 1 ? argv[1] : ".";
  const bool write_golden =
      argc > 2 && std::string(argv[2]) == "--write-golden";

  const Scenario push_ref =
      make_push_scenario("parcel", "A", 0.0, Variant::Proposed, 1);
  const Scenario grab_ref =
      make_grab_scenario("parcel", "A", 0.0, Variant::Proposed, 1);
  const ImpactDataset push_ds =
      generate_dataset(push_ref, 25, 0.8 * 2.0 * push_ref.face_half_extent(0));
  const ImpactDataset grab_ds =
      generate_dataset(grab_ref, 49, 0.8 * 2.0 * grab_ref.face_half_extent(0));

  using Fn = std::function<void()>;
  const std::vector<std::pair<int, Fn>> criteria = {
      {1, [&] { criterion_push_ablation(push_ds); }},
      {2, [&] { criterion_grab_ablation(grab_ds); }},
      {3, [&] { criterion_velocity_jump(push_ds); }},
      {4, [&] { criterion_impact_map(push_ds, grab_ds); }},
      {5, [&] { criterion_torque_continuity(push_ds); }},
      {6, [&] { criterion_qp(push_ds); }},
      {7, [&] { criterion_fields(); }},
      {8, [&] { criterion_interim(push_ds, grab_ds); }},
      {9, [&] { criterion_synchronization(grab_ds); }},
      {10, [&] { criterion_determinism(push_ds, fixture_dir, write_golden); }},
  };
  for (const auto& [id, fn] : criteria) {
    try {
      fn();
    } catch (const std::exception& e) {
      report(id, "criterion " + std::to_string(id), false,
             std::string("exception: ") + e.what());
    }
  }

  int failures = 0;
  for (const auto& c : g_results) failures += !c.pass;
  std::printf("%d/%zu criteria passed\n", static_cast<int>(g_results.size()) - failures,
              g_results.size());
  return failures == 0 ? 0 : 3;
}
