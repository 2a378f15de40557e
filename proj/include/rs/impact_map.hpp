#pragma once

#include <Eigen/Dense>
#include <iosfwd>
#include <string>
#include <vector>

namespace rs {

struct Scenario;

// One sampled impact: the projected end-effector coordinate(s) along the
// nominal impact face (one per arm), and the resulting object twist.
struct ImpactSample {
  Eigen::VectorXd key;       // arm_count coordinates, m
  Eigen::Vector3d v_o_plus;  // vx, vy, omega
};

// Simulation-sampled impact map with Gaussian RBF interpolation.
struct ImpactDataset {
  std::vector<ImpactSample> samples;
  int arm_count = 1;
  double rho = 0.0;           // 1/m, RBF shape; 0 means "pick from spacing"
  Eigen::MatrixXd weights;    // N x 3
  bool weights_built = false;
  std::string scenario_hash;

  void validate() const;
};

// Gaussian kernel exp(-(rho r)^2).
double rbf_kernel(double r, double rho);

// Solves (Phi + lambda I) W = V with ridge lambda = 1e-10. Throws on
// conditioning failure (estimate > 1e12).
void build_weights(ImpactDataset& dataset);

// Sum_j w_j phi(|query - key_j|). Extrapolation is allowed; queries farther
// than 2/rho from every key set *extrapolating when provided.
Eigen::Vector3d interpolate(const ImpactDataset& dataset,
                            const Eigen::VectorXd& query,
                            bool* extrapolating = nullptr);

// Runs one single-timestep nonsmooth simulation per grid point over the
// impact face(s) and collects the post-impact object twists. Samples whose
// inverse kinematics fail are skipped; generation fails below 80% retention.
ImpactDataset generate_dataset(const Scenario& scenario, int n_samples,
                               double face_extent);

// Flat text table, one row per sample, with a provenance header.
void save_dataset(const ImpactDataset& dataset, std::ostream& out);
void save_dataset(const ImpactDataset& dataset, const std::string& path);
ImpactDataset load_dataset(std::istream& in);
ImpactDataset load_dataset(const std::string& path);

}  // namespace rs
