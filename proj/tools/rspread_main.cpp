#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include "CLI11.hpp"
#include "rs/ablation.hpp"
#include "rs/svg_plot.hpp"

namespace fs = std::filesystem;

namespace {

// RSPREAD_OUT_ROOT prefixes default output locations.
std::string out_root() {
  const char* env = std::getenv("RSPREAD_OUT_ROOT");
  return env && *env ? env : ".";
}

std::string default_out(const std::string& leaf) {
  return (fs::path(out_root()) / leaf).string();
}

bool first_line_is(const std::string& path, const std::string& prefix) {
  std::ifstream f(path);
  std::string line;
  std::getline(f, line);
  return line.rfind(prefix, 0) == 0;
}

int check_ordering(const rs::AblationSummary& summary) {
  // proposed must have the lowest mean in every grouping row set, and
  // no_rs must be at least twice the proposed overall mean
  auto lowest_everywhere = [&](const std::vector<rs::GroupRow>& rows) {
    std::map<std::string, std::map<rs::Variant, double>> table;
    for (const auto& g : rows)
      table[g.group_key][g.variant] = g.mean_max_target_accel;
    for (const auto& [key, by_variant] : table) {
      const auto it = by_variant.find(rs::Variant::Proposed);
      if (it == by_variant.end()) return false;
      for (const auto& [v, mean] : by_variant)
        if (v != rs::Variant::Proposed && mean <= it->second) return false;
    }
    return true;
  };
  bool ok = lowest_everywhere(summary.by_object) &&
            lowest_everywhere(summary.by_init) &&
            lowest_everywhere(summary.by_displacement);
  const double proposed = rs::overall_mean(summary, rs::Variant::Proposed);
  const double no_rs = rs::overall_mean(summary, rs::Variant::NoRS);
  if (!(no_rs >= 2.0 * proposed)) ok = false;
  if (!ok) {
    std::cerr << "ablation ordering assertion failed (proposed=" << proposed
              << ", no_rs=" << no_rs << ")\n";
    return 3;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"planar reference-spreading simulation toolkit"};
  app.require_subcommand(1);

  std::string scenario_path, out_path, matrix_path, input_path;
  int samples = 25;
  int jobs = 1;
  bool assert_ordering = false;

  auto* gen = app.add_subcommand("gen-impact-map",
                                 "sample an impact dataset for a scenario");
  gen->add_option("scenario", scenario_path, "scenario JSON file")->required();
  gen->add_option("--samples", samples, "grid sample count");
  gen->add_option("--out", out_path, "output dataset file");

  auto* roll = app.add_subcommand("rollout", "run one rollout");
  roll->add_option("scenario", scenario_path, "scenario JSON file")->required();
  roll->add_option("--out", out_path, "output directory");

  auto* abl = app.add_subcommand("ablation", "run a full ablation matrix");
  abl->add_option("matrix", matrix_path, "matrix JSON file")->required();
  abl->add_option("--jobs", jobs, "worker count");
  abl->add_option("--out", out_path, "output directory");
  abl->add_flag("--assert", assert_ordering,
                "exit 3 unless the proposed variant wins every grouping");

  auto* plot = app.add_subcommand("plot", "render SVG charts");
  plot->add_option("input", input_path, "rollout csv or group csv")
      ->required();
  plot->add_option("--out", out_path, "output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 1;
  }

  try {
    if (gen->parsed()) {
      const rs::Scenario s = rs::load_scenario(scenario_path);
      const double extent = 0.8 * 2.0 * s.face_half_extent(0);
      const rs::ImpactDataset ds = rs::generate_dataset(s, samples, extent);
      if (out_path.empty()) out_path = default_out("impact_map.txt");
      rs::save_dataset(ds, out_path);
      std::cout << "wrote " << ds.samples.size() << " samples to " << out_path
                << "\n";
    } else if (roll->parsed()) {
      const rs::Scenario s = rs::load_scenario(scenario_path);
      const rs::RolloutLog log = rs::run_rollout(s);
      if (out_path.empty()) out_path = default_out("rollout");
      fs::create_directories(out_path);
      rs::write_rollout_csv(log,
                            (fs::path(out_path) / "rollout.csv").string());
      rs::emit_trace_plots(log, out_path);
      std::cout << "max target accel " << log.max_target_accel
                << (log.failed ? " (FAILED: " + log.failure_reason + ")" : "")
                << "\n";
      if (log.failed) return 2;
    } else if (abl->parsed()) {
      const rs::MatrixConfig m = rs::load_matrix(matrix_path);
      const rs::AblationSummary summary = rs::run_ablation(m, jobs);
      if (out_path.empty()) out_path = default_out("ablation");
      rs::write_ablation_csvs(summary, out_path);
      rs::emit_summary_plots(summary, out_path);
      int failed = 0;
      for (const auto& c : summary.cells) failed += c.failed ? 1 : 0;
      std::cout << summary.cells.size() << " rollouts, " << failed
                << " failed\n";
      if (assert_ordering) {
        const int rc = check_ordering(summary);
        if (rc != 0) return rc;
      }
    } else if (plot->parsed()) {
      if (out_path.empty()) out_path = default_out("plots");
      if (first_line_is(input_path, "time_s,")) {
        rs::emit_trace_plots(rs::read_rollout_csv(input_path), out_path);
      } else if (first_line_is(input_path, "variant,group_key,")) {
        // one bar chart from a single aggregate csv
        std::ifstream f(input_path);
        std::string line;
        std::getline(f, line);
        std::vector<rs::GroupRow> rows;
        while (std::getline(f, line)) {
          if (line.empty()) continue;
          std::istringstream ls(line);
          std::string variant, key, mean, n, sd;
          std::getline(ls, variant, ',');
          std::getline(ls, key, ',');
          std::getline(ls, mean, ',');
          std::getline(ls, n, ',');
          std::getline(ls, sd, ',');
          rs::GroupRow g;
          g.variant = rs::variant_from_string(variant);
          g.group_key = key;
          g.mean_max_target_accel = std::stod(mean);
          g.n = std::stoi(n);
          g.stddev = std::stod(sd);
          rows.push_back(g);
        }
        fs::create_directories(out_path);
        std::ofstream svg(fs::path(out_path) / "bars.svg",
                          std::ios::binary);
        svg << rs::render_bar_svg(rows, "mean max target accel");
      } else {
        throw std::invalid_argument("unrecognized input format: " +
                                    input_path);
      }
    }
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
