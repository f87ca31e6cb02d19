#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <string_view>
#include <vector>

#include "sflow/dynamics.hpp"
#include "sflow/reward.hpp"
#include "sflow/scenario.hpp"

namespace sflow {

enum class TerminationStatus { alive, success, collision, off_road, off_route, wrong_lane, timeout };

std::string_view to_string(TerminationStatus s);
TerminationStatus termination_status_from_string(std::string_view s);

inline bool is_failure(TerminationStatus s) {
  return s == TerminationStatus::collision || s == TerminationStatus::off_road ||
         s == TerminationStatus::off_route || s == TerminationStatus::wrong_lane;
}

enum class EnvMode { flow, ego_vs_flow };

std::string_view to_string(EnvMode m);

struct EpisodeConfig {
  double dt = 0.1;
  int max_steps = 500;
  double clip_radius = 30.0;
  int history = 10;
  double off_route_threshold = 4.0;
  double wrong_lane_heading_deg = 120.0;
  int wrong_lane_steps = 10;
  double ego_constant_svo = 0.0;
  PidParams pid;
  RewardWeights reward;

  void validate() const;
  friend bool operator==(const EpisodeConfig&, const EpisodeConfig&) = default;
};

class CaseMismatch : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class MissingAction : public std::invalid_argument {
 public:
  explicit MissingAction(int id);
  int agent_id;
};

class AlreadyDone : public std::logic_error {
 public:
  AlreadyDone() : std::logic_error("step called after the episode finished") {}
};

struct AgentRecord {
  int id = 1;  // 1-based; agent 1 is the ego in ego_vs_flow mode
  int vehicle_id = 0;
  int path_id = 0;
  VehicleState state;
  PidMemory pid;
  double genuine_svo = 0.0;
  TerminationStatus status = TerminationStatus::alive;
  int termination_step = -1;
  std::vector<VehicleState> history;  // most recent first, size H
  int wrong_lane_streak = 0;
  double progress = 0.0;  // arclength along the global path
  bool ego = false;

  bool alive() const { return status == TerminationStatus::alive; }
  friend bool operator==(const AgentRecord&, const AgentRecord&) = default;
};

struct WorldState {
  std::shared_ptr<const ScenarioSpec> scenario;
  int case_id = 0;
  EnvMode mode = EnvMode::flow;
  EpisodeConfig config;
  std::vector<AgentRecord> agents;
  int step_count = 0;
  std::uint64_t rng_state = 0;
  bool done = false;

  const VehicleParams& params(const AgentRecord& a) const { return scenario->vehicle_params[a.vehicle_id]; }
  const CandidatePath& path(const AgentRecord& a) const { return scenario->candidate_paths[a.path_id]; }
  const AgentRecord& agent(int id) const { return agents.at(static_cast<std::size_t>(id - 1)); }
};

/// One entry per agent, indexed by id - 1. Terminated agents may be left empty.
using JointAction = std::vector<std::optional<Action>>;

struct AgentOutcome {
  RewardBreakdown reward;
  TerminationStatus status = TerminationStatus::alive;
  bool terminated_now = false;
};

struct StepOutcome {
  std::vector<AgentOutcome> agents;
  bool episode_done = false;
};

enum class Execution { serial, parallel };

WorldState reset(std::shared_ptr<const ScenarioSpec> scenario, const CaseSpec& c, EnvMode mode,
                 const EpisodeConfig& config = {});

/// Advances every alive agent from the pre-step snapshot. The parallel kernel
/// splits per-agent work across OpenMP threads.
StepOutcome step(WorldState& world, const JointAction& actions, Execution exec = Execution::parallel);

/// Serial kernel that visits agents in `order` (a permutation of indices).
StepOutcome step_reference(WorldState& world, const JointAction& actions, std::span<const int> order);

/// Status an alive agent would receive given the current (post-advance) world.
/// Collision checks consider every other agent still marked alive.
TerminationStatus classify_termination(const AgentRecord& agent, const WorldState& world);

/// True when the agent center sits in an oncoming centerline corridor this step.
bool in_wrong_lane(const AgentRecord& agent, const WorldState& world);

/// Order-sensitive FNV-1a over every numeric field of the world.
std::uint64_t world_fingerprint(const WorldState& world);

}  // namespace sflow
