#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "crystal_flow/flow.hpp"

namespace crystal_flow {

// %.17g, empty for NaN, "inf"/"-inf" for infinities.
std::string format_double(double x);
// RFC 4180 quoting when the field needs it.
std::string csv_field(const std::string& s);

// Header: t, epoch, h_1..h_N, L_1..L_N, F_alpha, max_abs_rate with N the widest epoch.
std::string series_csv(const Trajectory& traj);
void emit_series(const Trajectory& traj, const std::filesystem::path& path);

nlohmann::json curve_json(const AdmissibleCurve& c, double window_radius);
nlohmann::json epochs_manifest(const Trajectory& traj);
nlohmann::json snapshots_json(const Trajectory& traj, const std::vector<double>& times);
void emit_snapshots(const Trajectory& traj, const std::vector<double>& times, const std::filesystem::path& path);

void write_text(const std::filesystem::path& path, const std::string& text);
void write_json(const std::filesystem::path& path, const nlohmann::json& j);

}  // namespace crystal_flow
