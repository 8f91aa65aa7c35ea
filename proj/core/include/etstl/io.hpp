#pragma once

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "etstl/episode.hpp"

namespace etstl {

using KeyValues = std::vector<std::pair<std::string, std::string>>;

/// Columns: t, x0..x{n-1}, u0..u{m-1}, rho_active, gamma, mode.
void write_trajectory_csv(const std::filesystem::path& path, const Trajectory& traj);

/// Columns: i, t_i, cause, delta_i, x0.., u0...
void write_events_csv(const std::filesystem::path& path,
                      const std::vector<TriggerEvent>& events);

/// Columns: t, mode, rho, lower, upper, u0.. (funnel bounds against the
/// active robustness, plus the applied inputs).
void write_plot_data_csv(const std::filesystem::path& path, const Trajectory& traj);

/// Run metrics, per-task funnel parameters and jump times as key/value pairs.
/// Wall time is left out unless asked for, so the output is byte-stable.
KeyValues metrics_entries(const EpisodeResult& result, bool include_timing = false);

/// One `key=value` line per entry.
void write_key_values(const std::filesystem::path& path, const KeyValues& kv);

/// Reads a file written by write_trajectory_csv (extra columns ignored).
Trajectory read_trajectory_csv(const std::filesystem::path& path);

/// Shortest decimal text that round-trips the double.
std::string format_double(double v);

}  // namespace etstl
