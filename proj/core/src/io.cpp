#include "etstl/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "etstl/error.hpp"

namespace etstl {

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  if (ec != std::errc()) return std::to_string(v);
  return std::string(buf, ptr);
}

namespace {

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  return out;
}

void write_vector(std::ostream& os, const Eigen::Ref<const Vector>& v) {
  for (Eigen::Index j = 0; j < v.size(); ++j) os << ',' << format_double(v[j]);
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> cells;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

double parse_cell(const std::string& s, std::size_t line) {
  double v = 0.0;
  const char* b = s.data();
  const char* e = s.data() + s.size();
  while (b < e && *b == ' ') ++b;
  auto [ptr, ec] = std::from_chars(b, e, v);
  if (ec != std::errc() || ptr != e) {
    if (s == "nan") return std::nan("");
    throw Error("bad number '" + s + "' on line " + std::to_string(line));
  }
  return v;
}

}  // namespace

void write_trajectory_csv(const std::filesystem::path& path, const Trajectory& traj) {
  auto out = open_out(path);
  const auto n = traj.states.rows();
  const auto m = traj.inputs.rows();
  out << 't';
  for (Eigen::Index j = 0; j < n; ++j) out << ",x" << j;
  for (Eigen::Index j = 0; j < m; ++j) out << ",u" << j;
  out << ",rho_active,gamma,mode\n";
  for (std::size_t k = 0; k < traj.size(); ++k) {
    auto col = static_cast<Eigen::Index>(k);
    out << format_double(traj.times[k]);
    write_vector(out, traj.states.col(col));
    write_vector(out, traj.inputs.col(col));
    out << ',' << format_double(traj.rho_active[k]) << ',' << format_double(traj.gamma[k])
        << ',' << traj.mode[k] << '\n';
  }
}

void write_events_csv(const std::filesystem::path& path,
                      const std::vector<TriggerEvent>& events) {
  auto out = open_out(path);
  Eigen::Index n = events.empty() ? 0 : events.front().state.size();
  Eigen::Index m = events.empty() ? 0 : events.front().input.size();
  out << "i,t_i,cause,delta_i";
  for (Eigen::Index j = 0; j < n; ++j) out << ",x" << j;
  for (Eigen::Index j = 0; j < m; ++j) out << ",u" << j;
  out << '\n';
  for (const auto& e : events) {
    out << e.index << ',' << format_double(e.time) << ',' << to_string(e.cause) << ','
        << format_double(e.delta);
    write_vector(out, e.state);
    write_vector(out, e.input);
    out << '\n';
  }
}

void write_plot_data_csv(const std::filesystem::path& path, const Trajectory& traj) {
  auto out = open_out(path);
  const auto m = traj.inputs.rows();
  out << "t,mode,rho,lower,upper";
  for (Eigen::Index j = 0; j < m; ++j) out << ",u" << j;
  out << '\n';
  for (std::size_t k = 0; k < traj.size(); ++k) {
    out << format_double(traj.times[k]) << ',' << traj.mode[k] << ','
        << format_double(traj.rho_active[k]) << ','
        << format_double(traj.rho_max[k] - traj.gamma[k]) << ','
        << format_double(traj.rho_max[k]);
    write_vector(out, traj.inputs.col(static_cast<Eigen::Index>(k)));
    out << '\n';
  }
}

KeyValues metrics_entries(const EpisodeResult& r, bool include_timing) {
  const RunMetrics& m = r.metrics;
  KeyValues kv;
  auto put = [&kv](std::string k, std::string v) { kv.emplace_back(std::move(k), std::move(v)); };
  auto num = [&put](std::string k, double v) { put(std::move(k), format_double(v)); };
  put("status", std::string(to_string(m.status)));
  put("satisfied", m.satisfied ? "true" : "false");
  if (!m.failure.empty()) {
    put("failure", m.failure);
    num("failure_time", m.failure_time);
  }
  num("rho_theta", m.rho_theta);
  put("monitor_covered", m.monitor_covered ? "true" : "false");
  put("samples", std::to_string(m.samples));
  put("triggers", std::to_string(m.triggers));
  num("reduction", m.reduction);
  put("samples_to_satisfaction", std::to_string(m.samples_to_satisfaction));
  put("triggers_to_satisfaction", std::to_string(m.triggers_to_satisfaction));
  num("reduction_to_satisfaction", m.reduction_to_satisfaction);
  num("min_margin", m.min_margin);
  put("funnel_violations", std::to_string(m.funnel_violations));
  num("max_deviation", m.max_deviation);
  put("deviation_violations", std::to_string(m.deviation_violations));
  num("min_inter_event", m.min_inter_event);
  num("min_delta", m.min_delta);
  num("max_abs_eps", m.max_abs_eps);
  num("end_time", m.end_time);
  if (include_timing) num("wall_time_s", m.wall_time);
  for (std::size_t i = 0; i < r.funnels.size(); ++i) {
    const auto& f = r.funnels[i];
    std::string p = "task" + std::to_string(i + 1) + ".";
    num(p + "t_star", f.t_star);
    num(p + "r", f.r);
    num(p + "rho_max", f.rho_max);
    num(p + "gamma0", f.perf.gamma0);
    num(p + "gamma_inf", f.perf.gamma_inf);
    num(p + "l", f.perf.l);
  }
  for (std::size_t i = 0; i < r.jumps.size(); ++i) {
    const auto& j = r.jumps[i];
    std::string p = "jump" + std::to_string(i + 1) + ".";
    num(p + "time", j.time);
    num(p + "rho", j.rho);
    num(p + "delta", j.delta_after);
  }
  return kv;
}

void write_key_values(const std::filesystem::path& path, const KeyValues& kv) {
  auto out = open_out(path);
  for (const auto& [k, v] : kv) out << k << '=' << v << '\n';
}

Trajectory read_trajectory_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw Error(path.string() + " is empty");
  auto header = split_csv(line);
  if (header.empty() || header[0] != "t") throw Error(path.string() + ": first column must be t");
  std::vector<std::size_t> xs, us;
  std::size_t rho_col = 0, gamma_col = 0, mode_col = 0;
  for (std::size_t c = 1; c < header.size(); ++c) {
    const auto& h = header[c];
    if (h.size() > 1 && h[0] == 'x') xs.push_back(c);
    else if (h.size() > 1 && h[0] == 'u') us.push_back(c);
    else if (h == "rho_active") rho_col = c;
    else if (h == "gamma") gamma_col = c;
    else if (h == "mode") mode_col = c;
  }
  if (xs.empty()) throw Error(path.string() + ": no state columns");

  std::vector<std::vector<double>> rows;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    auto cells = split_csv(line);
    if (cells.size() != header.size()) {
      throw Error(path.string() + ": line " + std::to_string(lineno) + " has " +
                  std::to_string(cells.size()) + " cells, expected " +
                  std::to_string(header.size()));
    }
    std::vector<double> row(cells.size());
    for (std::size_t c = 0; c < cells.size(); ++c) row[c] = parse_cell(cells[c], lineno);
    rows.push_back(std::move(row));
  }

  Trajectory traj;
  const auto count = static_cast<Eigen::Index>(rows.size());
  traj.states.resize(static_cast<Eigen::Index>(xs.size()), count);
  traj.inputs.resize(static_cast<Eigen::Index>(us.size()), count);
  for (Eigen::Index k = 0; k < count; ++k) {
    const auto& row = rows[static_cast<std::size_t>(k)];
    if (k > 0 && !(row[0] > traj.times.back())) {
      throw Error(path.string() + ": times must be strictly increasing");
    }
    traj.times.push_back(row[0]);
    for (std::size_t j = 0; j < xs.size(); ++j) traj.states(static_cast<Eigen::Index>(j), k) = row[xs[j]];
    for (std::size_t j = 0; j < us.size(); ++j) traj.inputs(static_cast<Eigen::Index>(j), k) = row[us[j]];
    traj.rho_active.push_back(rho_col ? row[rho_col] : std::nan(""));
    traj.gamma.push_back(gamma_col ? row[gamma_col] : std::nan(""));
    traj.mode.push_back(mode_col ? static_cast<int>(row[mode_col]) : 0);
  }
  if (traj.times.size() > 1) traj.dt = traj.times[1] - traj.times[0];
  return traj;
}

}  // namespace etstl
