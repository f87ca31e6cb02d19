#pragma once

#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "sflow/rollout.hpp"

namespace sflow {

inline constexpr const char* kEngineVersion = "0.3.0";

/// Exit codes shared by every subcommand.
enum ExitCode : int { kExitOk = 0, kExitConfig = 1, kExitRuntime = 2 };

/// Policy description as written in a run configuration.
struct PolicySpec {
  std::string text = "idm";  // "idm" | "constant:V,S" | "neural:PATH"
};

struct FlowSpec {
  PolicySpec policy;
  std::string comm_mode = "fully_visible";  // fully_visible | self_visible | constant:C | adversarial
  std::optional<std::filesystem::path> adversary_weights;
};

struct CaseSource {
  std::optional<std::filesystem::path> file;
  int n = 200;
  std::uint64_t seed = 7;
  std::string svo = "uniform";
  std::optional<int> agents;
};

struct RunConfig {
  std::string scenario = "intersection";
  CaseSource cases;
  int repeats = 10;
  std::uint64_t master_seed = 1;
  EnvMode mode = EnvMode::flow;
  FlowSpec flow;
  std::map<std::string, FlowSpec> flows;  // named flows for evaluate
  std::optional<PolicySpec> ego;
  EpisodeConfig episode;
  MetricScope scope = MetricScope::flow;
  EfficiencyMode efficiency = EfficiencyMode::normalized_speed;
  bool log_steps = false;
  bool log_gzip = true;
  std::optional<std::filesystem::path> output_dir;
  std::optional<int> workers;
};

/// Parses a run configuration; unknown keys throw ParseError naming the field.
/// Relative paths are resolved against `base_dir`.
RunConfig parse_run_config(const nlohmann::json& j, const std::filesystem::path& base_dir = {});
RunConfig load_run_config(const std::filesystem::path& path);
nlohmann::json run_config_to_json(const RunConfig& c);

PolicyHandle make_policy(const PolicySpec& spec);
/// Builds the comm mode; adversarial mode loads the adversary weights.
CommMode make_comm_mode(const FlowSpec& flow);

/// Entry point behind the `sflow` executable.
int dispatch(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace sflow
