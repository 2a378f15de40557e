#pragma once

#include "rs/ablation.hpp"

namespace rs {

// All renderers are pure: the same input yields the same bytes.

// End-effector velocity traces with the reference overlaid dashed.
std::string render_velocity_svg(const RolloutLog& log);

// ||TargetAccel|| vs time, shifted so the first detection sits at t = 0.
std::string render_target_accel_svg(const RolloutLog& log);

// Grouped bars, one color per variant.
std::string render_bar_svg(const std::vector<GroupRow>& rows,
                           const std::string& title);

// velocity.svg + target_accel.svg. Throws on an empty log.
void emit_trace_plots(const RolloutLog& log, const std::string& out_dir);

// bars_object.svg / bars_init.svg / bars_displacement.svg.
void emit_summary_plots(const AblationSummary& summary,
                        const std::string& out_dir);

}  // namespace rs
