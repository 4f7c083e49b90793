#include "crystal_flow/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "crystal_flow/error.hpp"

namespace crystal_flow {

std::string format_double(double x) {
  if (std::isnan(x)) return "";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"') out += '"';
    out += ch;
  }
  return out + "\"";
}

std::string series_csv(const Trajectory& traj) {
  int width = 0;
  for (const auto& e : traj.epochs) width = std::max(width, e.size());
  std::ostringstream os;
  os << "t,epoch";
  for (int i = 1; i <= width; ++i) os << ",h_" << i;
  for (int i = 1; i <= width; ++i) os << ",L_" << i;
  os << ",F_alpha,max_abs_rate\r\n";
  for (const Sample& s : traj.samples) {
    const AdmissibleCurve& ref = traj.epochs[s.epoch];
    os << format_double(s.t) << ',' << s.epoch;
    for (int i = 0; i < width; ++i) os << ',' << (i < s.h.size() ? format_double(s.h[i]) : "");
    for (int i = 0; i < width; ++i)
      os << ',' << (i < s.lengths.size() && !ref.is_half_line(i) ? format_double(s.lengths[i]) : "");
    os << ',' << format_double(s.energy) << ',' << format_double(s.rates.size() ? s.rates.cwiseAbs().maxCoeff() : 0.0)
       << "\r\n";
  }
  return os.str();
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::error_code ec;
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error(ErrorKind::IOFailure, "cannot open " + path.string());
  f << text;
  if (!f) throw Error(ErrorKind::IOFailure, "cannot write " + path.string());
}

void write_json(const std::filesystem::path& path, const nlohmann::json& j) { write_text(path, j.dump(2) + "\n"); }

void emit_series(const Trajectory& traj, const std::filesystem::path& path) {
  if (traj.samples.empty()) throw Error(ErrorKind::IOFailure, "empty trajectory");
  write_text(path, series_csv(traj));
}

nlohmann::json curve_json(const AdmissibleCurve& c, double window_radius) {
  nlohmann::json j;
  j["closed"] = c.closed();
  j["vertices"] = nlohmann::json::array();
  for (const Vec2& v : polyline(c, window_radius)) j["vertices"].push_back({v.x(), v.y()});
  j["segments"] = nlohmann::json::array();
  for (int i = 0; i < c.size(); ++i) {
    nlohmann::json s;
    s["facet"] = c.facet(i);
    s["c"] = c.transition(i);
    s["half_line"] = c.is_half_line(i);
    if (!c.is_half_line(i)) {
      s["length"] = c.length(i);
      s["kappa"] = crystalline_curvature(c, i);
    }
    j["segments"].push_back(s);
  }
  return j;
}

nlohmann::json epochs_manifest(const Trajectory& traj) {
  nlohmann::json j = nlohmann::json::array();
  for (std::size_t e = 0; e < traj.epochs.size(); ++e) {
    const AdmissibleCurve& ref = traj.epochs[e];
    nlohmann::json entry;
    entry["epoch"] = e;
    entry["t_start"] = e == 0 ? 0.0 : traj.restarts[e - 1].t;
    entry["segments"] = ref.size();
    entry["facets"] = nlohmann::json::array();
    entry["c"] = nlohmann::json::array();
    for (int i = 0; i < ref.size(); ++i) {
      entry["facets"].push_back(ref.facet(i));
      entry["c"].push_back(ref.transition(i));
    }
    if (e > 0) {
      const RestartRecord& r = traj.restarts[e - 1];
      entry["vanished"] = r.vanished;
      entry["merge_map"] = r.merge_map;
      if (r.index_before) entry["index_before"] = *r.index_before;
      if (r.index_after) entry["index_after"] = *r.index_after;
    }
    j.push_back(entry);
  }
  return j;
}

nlohmann::json snapshots_json(const Trajectory& traj, const std::vector<double>& times) {
  if (traj.samples.empty()) throw Error(ErrorKind::TimeOutOfRange, "empty trajectory");
  const double t_end = traj.samples.back().t;
  nlohmann::json out = nlohmann::json::array();
  for (double t : times) {
    const double slack = 1e-12 * std::max(1.0, std::abs(t));
    if (t < -slack || t > t_end + slack) throw Error(ErrorKind::TimeOutOfRange, "snapshot time " + format_double(t));
    std::size_t k = 0;
    for (std::size_t i = 0; i < traj.samples.size(); ++i)
      if (traj.samples[i].t <= t + slack) k = i;
    nlohmann::json snap = curve_json(traj.curve_at(k), traj.params.window_radius);
    snap["t"] = traj.samples[k].t;
    snap["requested_t"] = t;
    snap["epoch"] = traj.samples[k].epoch;
    out.push_back(snap);
  }
  return out;
}

void emit_snapshots(const Trajectory& traj, const std::vector<double>& times, const std::filesystem::path& path) {
  write_json(path, snapshots_json(traj, times));
}

}  // namespace crystal_flow
