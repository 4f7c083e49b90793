#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "crystal_flow/analysis.hpp"

namespace crystal_flow {

inline constexpr const char* kScenarioSchema = "crystal-flow/1";

enum class Action { Simulate, Catalog, Classify, TranslatingCheck, VerifyIdentity, Audit };
const char* to_string(Action a);
std::optional<Action> parse_action(std::string_view name);

struct RunOptions {
  std::filesystem::path out_dir = "out";
  bool check = false;
  std::optional<double> max_time;
  std::optional<std::uint64_t> seed;
};

struct CheckResult {
  std::string metric;
  bool passed = false;
  std::string detail;
};

struct ScenarioOutcome {
  int exit_code = 0;  // 0 ok, 1 check failure, 2 input error
  std::string name;
  std::string message;
  nlohmann::json metrics = nlohmann::json::object();
  std::vector<CheckResult> checks;
  std::vector<std::filesystem::path> written;
};

// Pieces of the scenario schema, exposed for tests. All raise SchemaError or BuildError.
std::shared_ptr<const Anisotropy> parse_anisotropy(const nlohmann::json& spec);
FlowParams parse_params(const nlohmann::json& spec);
IntegratorOptions parse_integrator(const nlohmann::json& spec);
StationaryParams parse_stationary(const nlohmann::json& spec);
AdmissibleCurve parse_curve(const nlohmann::json& spec, const std::shared_ptr<const Anisotropy>& a,
                            const FlowParams& p, std::optional<std::uint64_t> seed_override = std::nullopt);

std::vector<CheckResult> evaluate_checks(const nlohmann::json& checks, const nlohmann::json& metrics);

// Never throws; errors are reported through exit_code and message.
ScenarioOutcome run_scenario(const nlohmann::json& scenario, Action action, const RunOptions& opts);
ScenarioOutcome run_scenario(const std::filesystem::path& path, Action action, const RunOptions& opts);

}  // namespace crystal_flow
