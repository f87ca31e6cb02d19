#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"
#include "sflow/communication.hpp"
#include "sflow/env.hpp"
#include "sflow/policy.hpp"

namespace sflow {

/// Everything except the case and seed that an episode depends on.
struct RolloutSpec {
  std::shared_ptr<const ScenarioSpec> scenario;
  EpisodeConfig config;
  EnvMode mode = EnvMode::flow;
  PolicyHandle flow_policy;
  CommMode comm_mode = CommFullyVisible{};
  std::string comm_label = "fully_visible";
  std::optional<PolicyHandle> ego_policy;  // present iff ego_vs_flow
  bool record_steps = false;
  Execution execution = Execution::serial;
};

struct AgentStepRecord {
  int id = 0;
  Action action;
  Pose2D pose;  // post-step
  double speed = 0.0;
  double delivered_svo = kInvisibleSvo;  // receiver's own entry
  std::optional<double> delivered_ego_svo;
  RewardBreakdown reward;
  TerminationStatus status = TerminationStatus::alive;

  friend bool operator==(const AgentStepRecord&, const AgentStepRecord&) = default;
};

struct StepRecord {
  int step = 0;  // 1-based index of the step that produced this record
  std::vector<AgentStepRecord> agents;  // agents alive before the step

  friend bool operator==(const StepRecord&, const StepRecord&) = default;
};

struct AgentSummary {
  int id = 0;
  int path_id = 0;
  int vehicle_id = 0;
  double genuine_svo = 0.0;
  bool ego = false;
  CaseAgent initial;
  TerminationStatus status = TerminationStatus::alive;
  int termination_step = -1;
  double speed_sum = 0.0;
  int alive_steps = 0;
  double v_max = 10.0;

  friend bool operator==(const AgentSummary&, const AgentSummary&) = default;
};

struct EpisodeLog {
  static constexpr int kSchemaVersion = 1;

  std::string scenario;
  std::uint64_t scenario_hash = 0;
  int case_id = 0;
  int repeat = 0;
  std::uint64_t case_seed = 0;
  std::uint64_t seed = 0;
  EnvMode mode = EnvMode::flow;
  std::string comm;
  std::string flow_policy;
  std::string ego_policy;
  EpisodeConfig config;
  std::vector<AgentSummary> agents;
  std::vector<StepRecord> steps;  // empty unless recorded
  int step_count = 0;
  double wall_time_s = 0.0;  // informational; excluded from determinism checks
  std::uint64_t fingerprint = 0;  // world fingerprint after the last step
};

class EmptyBatch : public std::invalid_argument {
 public:
  EmptyBatch() : std::invalid_argument("no episodes to aggregate") {}
};

/// Field-by-field equality ignoring wall time.
bool same_episode(const EpisodeLog& a, const EpisodeLog& b);

nlohmann::json episode_config_to_json(const EpisodeConfig& c);
/// Overrides fields of `base` present in `j`; unknown keys throw ParseError.
EpisodeConfig episode_config_from_json(const nlohmann::json& j, EpisodeConfig base = {});

EpisodeLog run_episode(const CaseSpec& c, const RolloutSpec& spec, std::uint64_t seed, int repeat = 0);

/// Seed of repeat `r` of case `case_id` under `master_seed`.
std::uint64_t episode_seed(std::uint64_t master_seed, int case_id, int repeat);

/// Receives each finished episode (possibly from a worker thread) before its
/// step records are released.
using EpisodeSink = std::function<void(const EpisodeLog&)>;

/// |cases| * repeats episodes, returned in (case_id, repeat) order regardless of `workers`.
/// With a sink, returned logs keep their summaries but drop step records.
std::vector<EpisodeLog> run_batch(const std::vector<CaseSpec>& cases, const RolloutSpec& spec, int repeats,
                                  std::uint64_t master_seed, int workers, const EpisodeSink& sink = {});

enum class MetricScope { flow, ego_only };
enum class EfficiencyMode { normalized_speed, raw_speed };

struct Metric {
  double value = 0.0;
  double ci95 = 0.0;
};

struct MetricsReport {
  Metric success, collision, off_road, off_route, wrong_lane, timeout, safety, efficiency;
  Metric mean_speed;
  int episode_count = 0;
  int agent_count = 0;
  EfficiencyMode efficiency_mode = EfficiencyMode::normalized_speed;
};

MetricsReport aggregate_metrics(const std::vector<EpisodeLog>& logs, MetricScope scope,
                                EfficiencyMode efficiency = EfficiencyMode::normalized_speed);

/// Comma-separated single-row table and an aligned text table in the column order
/// Success, Collision, Off Road, Off Route, Wrong Lane, Efficiency.
std::string metrics_csv_header();
std::string metrics_csv_row(const std::string& label, const MetricsReport& r);
std::string metrics_table(const std::vector<std::pair<std::string, MetricsReport>>& rows);

/// One row per episode with per-scope counts; used for paired comparisons.
void write_episode_csv(std::ostream& out, const std::vector<EpisodeLog>& logs, MetricScope scope);

struct EpisodeRow {
  int case_id = 0;
  int repeat = 0;
  double success = 0.0;  // percent of in-scope agents
  double safety = 0.0;
  double mean_speed = 0.0;
};

std::vector<EpisodeRow> read_episode_csv(std::istream& in);

struct PairedDifference {
  std::string metric;
  double mean_diff = 0.0;  // b - a
  double ci95 = 0.0;       // normal approximation
  int pairs = 0;
};

/// Pairs episodes by (case_id, repeat). Throws if no keys match.
std::vector<PairedDifference> paired_compare(const std::vector<EpisodeRow>& a, const std::vector<EpisodeRow>& b);

// ------------------------------------------------------------------ log files

/// Newline-delimited JSON: one header, one record per step, one footer.
void write_episode_log(std::ostream& out, const EpisodeLog& log);
EpisodeLog read_episode_log(std::istream& in);

/// Gzip-compressed when the file name ends in ".gz".
void save_episode_log(const std::filesystem::path& path, const EpisodeLog& log);
EpisodeLog load_episode_log(const std::filesystem::path& path);

struct ReplayReport {
  int steps = 0;
  int mismatches = 0;
  std::optional<int> first_mismatch_step;
  bool final_fingerprint_matches = false;
};

/// Re-executes the recorded actions from reset and compares every recorded pose bitwise.
ReplayReport replay_episode(const EpisodeLog& log, std::shared_ptr<const ScenarioSpec> scenario);

/// Rebuilds the case the log was started from.
CaseSpec case_from_log(const EpisodeLog& log, ScenarioName scenario);

}  // namespace sflow
