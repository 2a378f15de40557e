#pragma once

#include "rs/rollout.hpp"

namespace rs {

// Full-factorial batch: variants x objects x (init, displacement) pairs x
// seeds. Initial configurations are paired with displacements by index so
// the third axis matches both groupings.
struct MatrixConfig {
  ScenarioKind kind = ScenarioKind::HitAndPush;
  std::vector<Variant> variants = {Variant::Proposed, Variant::NoRS,
                                   Variant::NoInterim, Variant::NoImpactMap};
  std::vector<std::string> objects = {"parcel", "catfood", "juice"};
  std::vector<std::string> inits = {"A", "B", "C"};
  std::vector<double> displacements = {-0.030, 0.0, 0.030};
  std::vector<unsigned> seeds = {1, 2, 3, 4, 5};
  std::string dataset_path;
  double duration = 3.5;
};

MatrixConfig default_push_matrix();
MatrixConfig default_grab_matrix();
MatrixConfig load_matrix(const std::string& path);
void save_matrix(const MatrixConfig& m, const std::string& path);

struct CellResult {
  int index = 0;
  Variant variant = Variant::Proposed;
  std::string object, init;
  double displacement = 0.0;
  unsigned seed = 0;
  double max_target_accel = 0.0;
  std::vector<double> detect_times;
  bool failed = false;
  std::string failure_reason;
};

struct GroupRow {
  Variant variant;
  std::string group_key;
  double mean_max_target_accel = 0.0;
  double stddev = 0.0;
  int n = 0;
};

struct AblationSummary {
  MatrixConfig config;
  std::vector<CellResult> cells;                   // cell-index order
  std::vector<GroupRow> by_object, by_init, by_displacement, overall;
};

Scenario scenario_for_cell(const MatrixConfig& m, Variant variant,
                           const std::string& object, const std::string& init,
                           double displacement, unsigned seed);

// Runs every cell over a pool of `jobs` workers; results are ordered by
// cell index regardless of completion order. Failed cells carry the reason
// and are excluded from group means.
AblationSummary run_ablation(const MatrixConfig& config, int jobs,
                             const ImpactDataset* dataset = nullptr);

double overall_mean(const AblationSummary& summary, Variant variant);

// rollouts.csv plus one aggregate CSV per grouping axis.
void write_ablation_csvs(const AblationSummary& summary,
                         const std::string& out_dir);

}  // namespace rs
