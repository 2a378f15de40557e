#include "rs/impact_map.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "rs/contact.hpp"
#include "rs/fields.hpp"
#include "rs/kinematics.hpp"
#include "rs/scenario.hpp"

namespace rs {

void ImpactDataset::validate() const {
  if (samples.empty()) throw std::invalid_argument("ImpactDataset: empty");
  if (arm_count < 1 || arm_count > 2)
    throw std::invalid_argument("ImpactDataset: arm_count must be 1 or 2");
  for (size_t i = 0; i < samples.size(); ++i) {
    if (samples[i].key.size() != arm_count)
      throw std::invalid_argument("ImpactDataset: key dimension mismatch");
    for (size_t j = i + 1; j < samples.size(); ++j)
      if ((samples[i].key - samples[j].key).norm() <= 1e-9)
        throw std::invalid_argument("ImpactDataset: near-duplicate sample keys");
  }
}

double rbf_kernel(double r, double rho) {
  const double x = rho * r;
  return std::exp(-x * x);
}

namespace {

double default_rho(const std::vector<ImpactSample>& samples) {
  // scale on the median nearest-neighbour spacing: neighbours keep strong
  // kernel overlap while distant nodes decay, which keeps the kernel matrix
  // well conditioned on dense grids
  std::vector<double> nn;
  for (size_t i = 0; i < samples.size(); ++i) {
    double best = std::numeric_limits<double>::infinity();
    for (size_t j = 0; j < samples.size(); ++j)
      if (j != i)
        best = std::min(best, (samples[i].key - samples[j].key).norm());
    if (std::isfinite(best)) nn.push_back(best);
  }
  if (nn.empty()) return 1.0;
  std::nth_element(nn.begin(), nn.begin() + nn.size() / 2, nn.end());
  return 1.0 / (2.0 * nn[nn.size() / 2]);
}

}  // namespace

void build_weights(ImpactDataset& ds) {
  ds.validate();
  if (ds.rho <= 0.0) ds.rho = default_rho(ds.samples);
  const int n = static_cast<int>(ds.samples.size());
  Eigen::MatrixXd phi(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      phi(i, j) =
          rbf_kernel((ds.samples[i].key - ds.samples[j].key).norm(), ds.rho);
  const Eigen::JacobiSVD<Eigen::MatrixXd> svd(phi);
  const double cond = svd.singularValues()(0) /
                      svd.singularValues()(svd.singularValues().size() - 1);
  if (!(cond < 1e12))
    throw std::runtime_error(
        "impact map kernel matrix is ill-conditioned; increase sample "
        "spacing or rho");

  Eigen::MatrixXd targets(n, 3);
  for (int i = 0; i < n; ++i)
    targets.row(i) = ds.samples[i].v_o_plus.transpose();
  // LDLT with a few rounds of iterative refinement drives the nodal
  // residual to machine level even on moderately conditioned grids
  const Eigen::LDLT<Eigen::MatrixXd> ldlt(phi);
  ds.weights = ldlt.solve(targets);
  for (int it = 0; it < 3; ++it)
    ds.weights += ldlt.solve(targets - phi * ds.weights);
  ds.weights_built = true;
}

Eigen::Vector3d interpolate(const ImpactDataset& ds,
                            const Eigen::VectorXd& query, bool* extrapolating) {
  if (!ds.weights_built)
    throw std::logic_error("impact map weights not built");
  if (query.size() != ds.arm_count)
    throw std::invalid_argument("impact map query dimension mismatch");
  Eigen::Vector3d out = Eigen::Vector3d::Zero();
  double nearest = std::numeric_limits<double>::infinity();
  for (size_t j = 0; j < ds.samples.size(); ++j) {
    const double r = (query - ds.samples[j].key).norm();
    nearest = std::min(nearest, r);
    out += ds.weights.row(j).transpose() * rbf_kernel(r, ds.rho);
  }
  if (extrapolating) *extrapolating = nearest > 2.0 / ds.rho;
  return out;
}

ImpactDataset generate_dataset(const Scenario& s, int n_samples,
                               double face_extent) {
  if (n_samples < 1)
    throw std::invalid_argument("generate_dataset: n_samples must be >= 1");
  const int arms = s.arm_count();

  // uniform grid over the face extent; dual-arm gets the product grid
  const int side =
      arms == 1 ? n_samples
                : std::max(1, static_cast<int>(std::lround(
                                  std::sqrt(static_cast<double>(n_samples)))));
  auto coord = [&](int k) {
    if (side == 1) return 0.0;
    return -0.5 * face_extent + face_extent * k / (side - 1.0);
  };
  const int total = arms == 1 ? side : side * side;

  ImpactDataset ds;
  ds.arm_count = arms;
  ds.scenario_hash = s.hash();

  int skipped = 0;
  for (int idx = 0; idx < total; ++idx) {
    Eigen::VectorXd key(arms);
    if (arms == 1)
      key[0] = coord(idx);
    else {
      key[0] = coord(idx / side);
      key[1] = coord(idx % side);
    }

    std::vector<Eigen::VectorXd> q(arms), dq(arms);
    bool ok = true;
    for (int i = 0; i < arms && ok; ++i) {
      const Eigen::Vector2d p =
          s.object_pose_nominal.head<2>() +
          s.face_normal[i] * (s.face_half_extent(i) + s.robots[i].ee_radius) +
          s.face_tangent(i) * key[i];
      // take the elbow branch closest to the scenario's initial
      // configuration so the sampled impact states match the rollout
      auto up = inverse_kinematics(s.robots[i], p, s.ante[i].theta_d,
                                   s.ante[i].xi_d, true);
      auto dn = inverse_kinematics(s.robots[i], p, s.ante[i].theta_d,
                                   s.ante[i].xi_d, false);
      auto qi = up;
      if (up && dn)
        qi = (*up - s.q0[i]).norm() <= (*dn - s.q0[i]).norm() ? up : dn;
      else if (!up)
        qi = dn;
      if (!qi) {
        ok = false;
        break;
      }
      Eigen::Vector3d twist;
      twist << ante_velocity(p, s.ante[i]), 0.0;
      auto dqi = joint_velocities_for_twist(s.robots[i], *qi, twist);
      if (!dqi) {
        ok = false;
        break;
      }
      q[i] = *qi;
      dq[i] = *dqi;
    }
    if (!ok) {
      ++skipped;
      continue;
    }
    const Eigen::Vector3d v_plus = simulate_impact_event(
        s.robots, s.object, q, dq, s.object_pose_nominal, s.physics);
    ds.samples.push_back({key, v_plus});
  }

  if (static_cast<int>(ds.samples.size()) * 5 < total * 4) {
    std::ostringstream msg;
    msg << "impact map generation retained only " << ds.samples.size() << "/"
        << total << " samples (need >= 80%)";
    throw std::runtime_error(msg.str());
  }
  build_weights(ds);
  return ds;
}

void save_dataset(const ImpactDataset& ds, std::ostream& out) {
  out.precision(17);
  out << "# rs-impact-map v1\n";
  out << "# scenario_hash " << ds.scenario_hash << "\n";
  out << "# arm_count " << ds.arm_count << "\n";
  out << "# rho " << ds.rho << "\n";
  out << "# n_samples " << ds.samples.size() << "\n";
  out << "# columns: key..., vx, vy, omega\n";
  for (const auto& smp : ds.samples) {
    for (int k = 0; k < smp.key.size(); ++k) out << smp.key[k] << " ";
    out << smp.v_o_plus.x() << " " << smp.v_o_plus.y() << " "
        << smp.v_o_plus.z() << "\n";
  }
}

void save_dataset(const ImpactDataset& ds, const std::string& path) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot write dataset: " + path);
  save_dataset(ds, f);
}

ImpactDataset load_dataset(std::istream& in) {
  ImpactDataset ds;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (line[0] == '#') {
      std::istringstream hs(line.substr(1));
      std::string keyword;
      hs >> keyword;
      if (keyword == "scenario_hash") hs >> ds.scenario_hash;
      else if (keyword == "arm_count") hs >> ds.arm_count;
      else if (keyword == "rho") hs >> ds.rho;
      continue;
    }
    std::istringstream ls(line);
    ImpactSample smp;
    smp.key.resize(ds.arm_count);
    for (int k = 0; k < ds.arm_count; ++k) ls >> smp.key[k];
    ls >> smp.v_o_plus.x() >> smp.v_o_plus.y() >> smp.v_o_plus.z();
    if (!ls) throw std::runtime_error("malformed impact map row: " + line);
    ds.samples.push_back(std::move(smp));
  }
  build_weights(ds);
  return ds;
}

ImpactDataset load_dataset(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot open dataset: " + path);
  return load_dataset(f);
}

}  // namespace rs
