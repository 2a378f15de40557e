#include "rs/svg_plot.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace rs {

namespace {

constexpr double kW = 800, kH = 400;
constexpr double kL = 60, kR = 20, kT = 30, kB = 40;

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                          "#ff7f0e", "#8c564b", "#e377c2", "#7f7f7f"};

const char* variant_color(Variant v) {
  return kPalette[static_cast<int>(v) % 8];
}

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.3f", v);
  return buf;
}

struct Series {
  std::string label;
  std::string color;
  bool dashed = false;
  std::vector<std::pair<double, double>> pts;
};

std::string render_chart(const std::string& title,
                         const std::vector<Series>& series) {
  double xmin = 1e300, xmax = -1e300, ymin = 1e300, ymax = -1e300;
  for (const auto& s : series)
    for (const auto& [x, y] : s.pts) {
      xmin = std::min(xmin, x);
      xmax = std::max(xmax, x);
      ymin = std::min(ymin, y);
      ymax = std::max(ymax, y);
    }
  if (xmin > xmax) throw std::invalid_argument("render_chart: no data");
  if (xmax - xmin < 1e-12) xmax = xmin + 1.0;
  if (ymax - ymin < 1e-12) {
    ymax += 0.5;
    ymin -= 0.5;
  }
  const double pad = 0.05 * (ymax - ymin);
  ymin -= pad;
  ymax += pad;
  auto px = [&](double x) {
    return kL + (x - xmin) / (xmax - xmin) * (kW - kL - kR);
  };
  auto py = [&](double y) {
    return kH - kB - (y - ymin) / (ymax - ymin) * (kH - kT - kB);
  };

  std::ostringstream out;
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kW
      << "\" height=\"" << kH << "\" viewBox=\"0 0 " << kW << " " << kH
      << "\">\n";
  out << "<rect width=\"" << kW << "\" height=\"" << kH
      << "\" fill=\"white\"/>\n";
  out << "<text x=\"" << kW / 2 << "\" y=\"20\" text-anchor=\"middle\" "
         "font-family=\"sans-serif\" font-size=\"14\">"
      << title << "</text>\n";
  // axes with a few ticks
  out << "<line x1=\"" << kL << "\" y1=\"" << kH - kB << "\" x2=\"" << kW - kR
      << "\" y2=\"" << kH - kB << "\" stroke=\"black\"/>\n";
  out << "<line x1=\"" << kL << "\" y1=\"" << kT << "\" x2=\"" << kL
      << "\" y2=\"" << kH - kB << "\" stroke=\"black\"/>\n";
  for (int k = 0; k <= 4; ++k) {
    const double x = xmin + (xmax - xmin) * k / 4.0;
    const double y = ymin + (ymax - ymin) * k / 4.0;
    out << "<text x=\"" << num(px(x)) << "\" y=\"" << kH - kB + 16
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
           "font-size=\"10\">"
        << num(x) << "</text>\n";
    out << "<text x=\"" << kL - 6 << "\" y=\"" << num(py(y) + 3)
        << "\" text-anchor=\"end\" font-family=\"sans-serif\" "
           "font-size=\"10\">"
        << num(y) << "</text>\n";
  }
  int legend_row = 0;
  for (const auto& s : series) {
    if (s.pts.empty()) continue;
    out << "<polyline fill=\"none\" stroke=\"" << s.color << "\"";
    if (s.dashed) out << " stroke-dasharray=\"6 4\"";
    out << " stroke-width=\"1.2\" points=\"";
    for (const auto& [x, y] : s.pts)
      out << num(px(x)) << ',' << num(py(y)) << ' ';
    out << "\"/>\n";
    const double ly = kT + 14.0 * legend_row++;
    out << "<line x1=\"" << kW - kR - 130 << "\" y1=\"" << num(ly)
        << "\" x2=\"" << kW - kR - 105 << "\" y2=\"" << num(ly)
        << "\" stroke=\"" << s.color << "\"";
    if (s.dashed) out << " stroke-dasharray=\"6 4\"";
    out << "/>\n";
    out << "<text x=\"" << kW - kR - 100 << "\" y=\"" << num(ly + 3)
        << "\" font-family=\"sans-serif\" font-size=\"10\">" << s.label
        << "</text>\n";
  }
  out << "</svg>\n";
  return out.str();
}

}  // namespace

std::string render_velocity_svg(const RolloutLog& log) {
  if (log.steps.empty())
    throw std::invalid_argument("render_velocity_svg: empty log");
  const int arms = log.scenario.arm_count();
  std::vector<Series> series;
  int color = 0;
  for (int i = 0; i < arms; ++i) {
    for (int axis = 0; axis < 2; ++axis) {
      Series meas, ref;
      std::ostringstream lm, lr;
      lm << "ee" << i << (axis == 0 ? " vx" : " vy");
      lr << "ref" << i << (axis == 0 ? " vx" : " vy");
      meas.label = lm.str();
      ref.label = lr.str();
      meas.color = ref.color = kPalette[color++ % 8];
      ref.dashed = true;
      for (const auto& r : log.steps) {
        meas.pts.emplace_back(r.time, r.ee_twist[i][axis]);
        ref.pts.emplace_back(r.time, r.ref_twist[i][axis]);
      }
      series.push_back(std::move(meas));
      series.push_back(std::move(ref));
    }
  }
  return render_chart("end-effector velocity [m/s] vs time [s]", series);
}

std::string render_target_accel_svg(const RolloutLog& log) {
  if (log.steps.empty())
    throw std::invalid_argument("render_target_accel_svg: empty log");
  double t0 = 0.0;
  for (double t : log.detect_times)
    if (t >= 0.0 && (t0 == 0.0 || t < t0)) t0 = t;
  Series s;
  s.label = "||target accel||";
  s.color = kPalette[0];
  for (const auto& r : log.steps)
    s.pts.emplace_back(r.time - t0, r.target_accel_norm);
  return render_chart("target acceleration norm [m/s^2] vs time since "
                      "detection [s]",
                      {s});
}

std::string render_bar_svg(const std::vector<GroupRow>& rows,
                           const std::string& title) {
  if (rows.empty()) throw std::invalid_argument("render_bar_svg: no rows");
  std::vector<std::string> groups;
  std::vector<Variant> variants;
  double vmax = 0;
  for (const auto& r : rows) {
    if (std::find(groups.begin(), groups.end(), r.group_key) == groups.end())
      groups.push_back(r.group_key);
    if (std::find(variants.begin(), variants.end(), r.variant) ==
        variants.end())
      variants.push_back(r.variant);
    vmax = std::max(vmax, r.mean_max_target_accel);
  }
  std::sort(groups.begin(), groups.end());
  std::sort(variants.begin(), variants.end());
  if (vmax <= 0) vmax = 1.0;

  std::ostringstream out;
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kW
      << "\" height=\"" << kH << "\" viewBox=\"0 0 " << kW << " " << kH
      << "\">\n";
  out << "<rect width=\"" << kW << "\" height=\"" << kH
      << "\" fill=\"white\"/>\n";
  out << "<text x=\"" << kW / 2 << "\" y=\"20\" text-anchor=\"middle\" "
         "font-family=\"sans-serif\" font-size=\"14\">"
      << title << "</text>\n";
  out << "<line x1=\"" << kL << "\" y1=\"" << kH - kB << "\" x2=\"" << kW - kR
      << "\" y2=\"" << kH - kB << "\" stroke=\"black\"/>\n";

  const double span = (kW - kL - kR) / groups.size();
  const double bar = 0.8 * span / variants.size();
  for (size_t gi = 0; gi < groups.size(); ++gi) {
    out << "<text x=\"" << num(kL + span * (gi + 0.5)) << "\" y=\""
        << kH - kB + 16
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
           "font-size=\"11\">"
        << groups[gi] << "</text>\n";
    for (size_t vi = 0; vi < variants.size(); ++vi) {
      double val = 0;
      for (const auto& r : rows)
        if (r.group_key == groups[gi] && r.variant == variants[vi])
          val = r.mean_max_target_accel;
      const double h = val / (1.1 * vmax) * (kH - kT - kB);
      const double x = kL + span * gi + 0.1 * span + bar * vi;
      out << "<rect x=\"" << num(x) << "\" y=\"" << num(kH - kB - h)
          << "\" width=\"" << num(bar) << "\" height=\"" << num(h)
          << "\" fill=\"" << variant_color(variants[vi]) << "\"/>\n";
    }
  }
  for (size_t vi = 0; vi < variants.size(); ++vi) {
    const double ly = kT + 14.0 * vi;
    out << "<rect x=\"" << kW - kR - 130 << "\" y=\"" << num(ly - 8)
        << "\" width=\"18\" height=\"10\" fill=\""
        << variant_color(variants[vi]) << "\"/>\n";
    out << "<text x=\"" << kW - kR - 106 << "\" y=\"" << num(ly)
        << "\" font-family=\"sans-serif\" font-size=\"10\">"
        << to_string(variants[vi]) << "</text>\n";
  }
  out << "</svg>\n";
  return out.str();
}

namespace {

void write_file(const std::string& path, const std::string& data) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write: " + path);
  f << data;
}

}  // namespace

void emit_trace_plots(const RolloutLog& log, const std::string& out_dir) {
  namespace fs = std::filesystem;
  fs::create_directories(out_dir);
  write_file((fs::path(out_dir) / "velocity.svg").string(),
             render_velocity_svg(log));
  write_file((fs::path(out_dir) / "target_accel.svg").string(),
             render_target_accel_svg(log));
}

void emit_summary_plots(const AblationSummary& summary,
                        const std::string& out_dir) {
  namespace fs = std::filesystem;
  fs::create_directories(out_dir);
  write_file((fs::path(out_dir) / "bars_object.svg").string(),
             render_bar_svg(summary.by_object,
                            "mean max target accel by object"));
  write_file((fs::path(out_dir) / "bars_init.svg").string(),
             render_bar_svg(summary.by_init,
                            "mean max target accel by initial config"));
  write_file(
      (fs::path(out_dir) / "bars_displacement.svg").string(),
      render_bar_svg(summary.by_displacement,
                     "mean max target accel by displacement"));
}

}  // namespace rs
