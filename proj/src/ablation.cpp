#include "rs/ablation.hpp"

#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <thread>

#include "json.hpp"

namespace rs {

using nlohmann::json;

MatrixConfig default_push_matrix() { return MatrixConfig{}; }

MatrixConfig default_grab_matrix() {
  MatrixConfig m;
  m.kind = ScenarioKind::DualArmGrab;
  m.displacements = {0.0, 0.015, 0.030};
  m.duration = 4.5;
  return m;
}

MatrixConfig load_matrix(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open matrix file: " + path);
  json j;
  in >> j;
  MatrixConfig m;
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "hit_and_push")
    m = default_push_matrix();
  else if (kind == "dual_arm_grab")
    m = default_grab_matrix();
  else
    throw std::invalid_argument("unknown matrix kind: " + kind);
  if (j.contains("variants")) {
    m.variants.clear();
    for (const auto& v : j["variants"])
      m.variants.push_back(variant_from_string(v.get<std::string>()));
  }
  if (j.contains("objects"))
    m.objects = j["objects"].get<std::vector<std::string>>();
  if (j.contains("inits")) m.inits = j["inits"].get<std::vector<std::string>>();
  if (j.contains("displacements_m"))
    m.displacements = j["displacements_m"].get<std::vector<double>>();
  if (j.contains("seeds")) m.seeds = j["seeds"].get<std::vector<unsigned>>();
  if (j.contains("dataset_path"))
    m.dataset_path = j["dataset_path"].get<std::string>();
  if (j.contains("duration_s")) m.duration = j["duration_s"].get<double>();
  if (m.inits.size() != m.displacements.size())
    throw std::invalid_argument(
        "matrix: inits and displacements_m must pair up");
  return m;
}

void save_matrix(const MatrixConfig& m, const std::string& path) {
  json j;
  j["kind"] = m.kind == ScenarioKind::HitAndPush ? "hit_and_push"
                                                 : "dual_arm_grab";
  json vars = json::array();
  for (auto v : m.variants) vars.push_back(to_string(v));
  j["variants"] = vars;
  j["objects"] = m.objects;
  j["inits"] = m.inits;
  j["displacements_m"] = m.displacements;
  j["seeds"] = m.seeds;
  j["dataset_path"] = m.dataset_path;
  j["duration_s"] = m.duration;
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write matrix file: " + path);
  out << j.dump(2) << "\n";
}

Scenario scenario_for_cell(const MatrixConfig& m, Variant variant,
                           const std::string& object, const std::string& init,
                           double displacement, unsigned seed) {
  Scenario s = m.kind == ScenarioKind::HitAndPush
                   ? make_push_scenario(object, init, displacement, variant,
                                        seed)
                   : make_grab_scenario(object, init, displacement, variant,
                                        seed);
  s.duration = m.duration;
  s.impact_dataset_path = m.dataset_path;
  return s;
}

AblationSummary run_ablation(const MatrixConfig& config, int jobs,
                             const ImpactDataset* dataset) {
  AblationSummary summary;
  summary.config = config;

  ImpactDataset local;
  bool needs_map = false;
  for (auto v : config.variants)
    needs_map = needs_map ||
                v == Variant::Proposed || v == Variant::NoInterim;
  if (needs_map && !dataset) {
    if (config.dataset_path.empty())
      throw std::invalid_argument("ablation matrix needs a dataset path");
    local = load_dataset(config.dataset_path);
    dataset = &local;
  }

  struct Cell {
    Variant variant;
    std::string object, init;
    double displacement;
    unsigned seed;
  };
  std::vector<Cell> cells;
  for (auto v : config.variants)
    for (const auto& obj : config.objects)
      for (size_t d = 0; d < config.displacements.size(); ++d)
        for (unsigned seed : config.seeds)
          cells.push_back({v, obj, config.inits[d], config.displacements[d],
                           seed});

  summary.cells.resize(cells.size());
  std::atomic<size_t> next{0};
  auto worker = [&]() {
    for (;;) {
      const size_t k = next.fetch_add(1);
      if (k >= cells.size()) return;
      const Cell& c = cells[k];
      CellResult r;
      r.index = static_cast<int>(k);
      r.variant = c.variant;
      r.object = c.object;
      r.init = c.init;
      r.displacement = c.displacement;
      r.seed = c.seed;
      try {
        const Scenario s = scenario_for_cell(config, c.variant, c.object,
                                             c.init, c.displacement, c.seed);
        const RolloutLog log = run_rollout(s, dataset);
        r.max_target_accel = log.max_target_accel;
        r.detect_times = log.detect_times;
        r.failed = log.failed;
        r.failure_reason = log.failure_reason;
      } catch (const std::exception& e) {
        r.failed = true;
        r.failure_reason = e.what();
      }
      summary.cells[k] = std::move(r);
    }
  };
  const int n_workers = std::max(1, jobs);
  std::vector<std::thread> pool;
  for (int t = 1; t < n_workers; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  auto group = [&](auto key_fn) {
    std::map<std::pair<int, std::string>, std::vector<double>> acc;
    for (const auto& r : summary.cells) {
      if (r.failed) continue;
      acc[{static_cast<int>(r.variant), key_fn(r)}].push_back(
          r.max_target_accel);
    }
    std::vector<GroupRow> rows;
    for (const auto& [key, vals] : acc) {
      GroupRow g;
      g.variant = static_cast<Variant>(key.first);
      g.group_key = key.second;
      g.n = static_cast<int>(vals.size());
      double mean = 0;
      for (double v : vals) mean += v;
      mean /= g.n;
      double var = 0;
      for (double v : vals) var += (v - mean) * (v - mean);
      g.mean_max_target_accel = mean;
      g.stddev = g.n > 1 ? std::sqrt(var / (g.n - 1)) : 0.0;
      rows.push_back(g);
    }
    return rows;
  };
  summary.by_object = group([](const CellResult& r) { return r.object; });
  summary.by_init = group([](const CellResult& r) { return r.init; });
  summary.by_displacement = group([](const CellResult& r) {
    std::ostringstream ss;
    ss << std::lround(r.displacement * 1000.0) << "mm";
    return ss.str();
  });
  summary.overall =
      group([](const CellResult&) { return std::string("all"); });
  return summary;
}

double overall_mean(const AblationSummary& summary, Variant variant) {
  for (const auto& g : summary.overall)
    if (g.variant == variant) return g.mean_max_target_accel;
  return std::numeric_limits<double>::quiet_NaN();
}

namespace {

void fmt(std::ostream& out, double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  out << buf;
}

void write_groups(const std::vector<GroupRow>& rows, const std::string& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write csv: " + path);
  f << "variant,group_key,mean_max_target_accel,n,std\n";
  for (const auto& g : rows) {
    f << to_string(g.variant) << ',' << g.group_key << ',';
    fmt(f, g.mean_max_target_accel);
    f << ',' << g.n << ',';
    fmt(f, g.stddev);
    f << '\n';
  }
}

}  // namespace

void write_ablation_csvs(const AblationSummary& summary,
                         const std::string& out_dir) {
  namespace fs = std::filesystem;
  fs::create_directories(out_dir);
  {
    std::ofstream f(fs::path(out_dir) / "rollouts.csv", std::ios::binary);
    if (!f) throw std::runtime_error("cannot write rollouts.csv");
    f << "index,variant,object,init,displacement_m,seed,max_target_accel,"
         "detect_time_0,detect_time_1,failed,failure_reason\n";
    for (const auto& r : summary.cells) {
      f << r.index << ',' << to_string(r.variant) << ',' << r.object << ','
        << r.init << ',';
      fmt(f, r.displacement);
      f << ',' << r.seed << ',';
      fmt(f, r.max_target_accel);
      f << ',';
      fmt(f, r.detect_times.empty() ? -1.0 : r.detect_times[0]);
      f << ',';
      fmt(f, r.detect_times.size() > 1 ? r.detect_times[1] : -1.0);
      f << ',' << (r.failed ? 1 : 0) << ',' << r.failure_reason << '\n';
    }
  }
  write_groups(summary.by_object,
               (fs::path(out_dir) / "group_object.csv").string());
  write_groups(summary.by_init, (fs::path(out_dir) / "group_init.csv").string());
  write_groups(summary.by_displacement,
               (fs::path(out_dir) / "group_displacement.csv").string());
  write_groups(summary.overall, (fs::path(out_dir) / "overall.csv").string());
}

}  // namespace rs
