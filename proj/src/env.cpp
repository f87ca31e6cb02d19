#include "sflow/env.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstring>
#include <numeric>
#include <string>

#include <omp.h>

#include "sflow/parallel.hpp"
#include "sflow/random.hpp"

namespace sflow {

namespace {

constexpr std::array<std::string_view, 7> kStatusNames = {"alive",     "success",    "collision", "off_road",
                                                          "off_route", "wrong_lane", "timeout"};

// Per-agent result of the advance phase, computed from the pre-step snapshot.
struct Advance {
  VehicleState state;
  PidMemory pid;
  double progress = 0.0;
  int wrong_lane_streak = 0;
};

bool against_traffic(const Pose2D& pose, const WorldState& world) {
  const Vec2 p = pose.position();
  const double limit = deg2rad(world.config.wrong_lane_heading_deg);
  for (const Lane& lane : world.scenario->centerlines) {
    if (!lane.corridor_bounds.contains(p)) continue;
    const PathProjection proj = lane.geometry.project(p);
    if (proj.distance > 0.5 * lane.lane_width) continue;
    if (std::abs(normalize_angle(pose.theta - proj.segment_heading)) > limit) return true;
  }
  return false;
}

Advance advance_agent(const AgentRecord& a, const Action& action, const WorldState& world) {
  const VehicleParams& vp = world.params(a);
  const Action clamped = clamp_action(action, vp);
  Advance out;
  out.pid = a.pid;
  const double accel = pid_speed_control(a.state, clamped.v_ref, world.config.pid, out.pid, world.config.dt);
  out.state = bicycle_step(a.state, accel, clamped.sigma, world.config.dt, vp);

  out.progress = world.path(a).geometry.project(out.state.pose.position()).arclength;
  out.wrong_lane_streak = against_traffic(out.state.pose, world) ? a.wrong_lane_streak + 1 : 0;
  return out;
}

void commit(AgentRecord& a, const Advance& adv) {
  a.state = adv.state;
  a.pid = adv.pid;
  a.progress = adv.progress;
  a.wrong_lane_streak = adv.wrong_lane_streak;
  std::rotate(a.history.rbegin(), a.history.rbegin() + 1, a.history.rend());
  a.history.front() = adv.state;
}

void check_actions(const WorldState& world, const JointAction& actions) {
  if (world.done) throw AlreadyDone();
  for (const AgentRecord& a : world.agents) {
    if (!a.alive()) continue;
    const auto idx = static_cast<std::size_t>(a.id - 1);
    if (idx >= actions.size() || !actions[idx]) throw MissingAction(a.id);
  }
}

StepOutcome finish_step(WorldState& world, const std::vector<TerminationStatus>& verdict) {
  const std::size_t n = world.agents.size();
  const RewardWeights& w = world.config.reward;
  StepOutcome out;
  out.agents.resize(n);

  std::vector<double> individual(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const AgentRecord& a = world.agents[i];
    if (!a.alive()) {
      out.agents[i].status = a.status;
      continue;
    }
    const double v_max = world.params(a).v_max;
    out.agents[i].reward = individual_reward(a.state.speed, v_max, is_failure(verdict[i]), w);
    out.agents[i].status = verdict[i];
    out.agents[i].terminated_now = verdict[i] != TerminationStatus::alive;
    individual[i] = out.agents[i].reward.individual;
  }

  const bool ego_mode = world.mode == EnvMode::ego_vs_flow;
  const double ego_individual = ego_mode ? individual[0] : 0.0;
  std::vector<double> others;
  others.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (!world.agents[i].alive()) continue;
    RewardBreakdown& r = out.agents[i].reward;
    if (n > 1) {
      others.clear();
      for (std::size_t j = 0; j < n; ++j) {
        if (j != i) others.push_back(individual[j]);
      }
      const double c = world.agents[i].ego ? world.config.ego_constant_svo : world.agents[i].genuine_svo;
      r.composed = socially_composed_reward(r.individual, others, c);
    }
    if (ego_mode) r.adversary_signal = adversary_reward(ego_individual);
  }

  bool all_done = true;
  for (std::size_t i = 0; i < n; ++i) {
    AgentRecord& a = world.agents[i];
    if (a.alive() && verdict[i] != TerminationStatus::alive) {
      a.status = verdict[i];
      a.termination_step = world.step_count;
    }
    all_done = all_done && !a.alive();
  }
  world.done = all_done;
  out.episode_done = all_done;
  return out;
}

template <typename Visit>
StepOutcome step_with(WorldState& world, const JointAction& actions, Visit&& visit) {
  check_actions(world, actions);
  const std::size_t n = world.agents.size();
  std::vector<Advance> next(n);
  visit([&](std::size_t i) {
    const AgentRecord& a = world.agents[i];
    if (a.alive()) next[i] = advance_agent(a, *actions[i], world);
  });
  for (std::size_t i = 0; i < n; ++i) {
    if (world.agents[i].alive()) commit(world.agents[i], next[i]);
  }
  ++world.step_count;
  world.rng_state = splitmix64(world.rng_state);

  std::vector<TerminationStatus> verdict(n, TerminationStatus::alive);
  visit([&](std::size_t i) {
    if (world.agents[i].alive()) verdict[i] = classify_termination(world.agents[i], world);
  });
  return finish_step(world, verdict);
}

bool outside_drivable(const AgentRecord& a, const WorldState& world) {
  const OrientedBox box = footprint(a.state.pose, world.params(a));
  for (const Vec2& corner : box.corners()) {
    if (!world.scenario->drivable(corner)) return true;
  }
  return false;
}

bool collides(const AgentRecord& a, const WorldState& world) {
  const OrientedBox mine = footprint(a.state.pose, world.params(a));
  const double r = mine.circumradius();
  for (const AgentRecord& other : world.agents) {
    if (other.id == a.id || !other.alive()) continue;
    const OrientedBox theirs = footprint(other.state.pose, world.params(other));
    const double reach = r + theirs.circumradius();
    const Vec2 d = mine.center.position() - theirs.center.position();
    if (dot(d, d) > reach * reach) continue;
    if (boxes_overlap(mine, theirs)) return true;
  }
  return false;
}

template <typename T>
std::uint64_t mix(std::uint64_t h, const T& v) {
  unsigned char bytes[sizeof(T)];
  std::memcpy(bytes, &v, sizeof(T));
  return fnv1a(std::span<const unsigned char>(bytes, sizeof(T)), h);
}

std::uint64_t mix_state(std::uint64_t h, const VehicleState& s) {
  h = mix(h, s.pose.x);
  h = mix(h, s.pose.y);
  h = mix(h, s.pose.theta);
  return mix(h, s.speed);
}

}  // namespace

std::string_view to_string(TerminationStatus s) { return kStatusNames[static_cast<std::size_t>(s)]; }

TerminationStatus termination_status_from_string(std::string_view s) {
  for (std::size_t i = 0; i < kStatusNames.size(); ++i) {
    if (kStatusNames[i] == s) return static_cast<TerminationStatus>(i);
  }
  throw std::invalid_argument("unknown termination status '" + std::string(s) + "'");
}

std::string_view to_string(EnvMode m) { return m == EnvMode::flow ? "flow" : "ego_vs_flow"; }

void EpisodeConfig::validate() const {
  if (!(dt > 0.0)) throw std::invalid_argument("dt must be positive");
  if (max_steps < 1) throw std::invalid_argument("max_steps must be >= 1");
  if (!(clip_radius > 0.0)) throw std::invalid_argument("clip_radius must be positive");
  if (history < 1) throw std::invalid_argument("history must be >= 1");
  if (!(off_route_threshold > 0.0)) throw std::invalid_argument("off_route_threshold must be positive");
  if (!(wrong_lane_heading_deg > 0.0 && wrong_lane_heading_deg <= 180.0)) {
    throw std::invalid_argument("wrong_lane_heading_deg must lie in (0, 180]");
  }
  if (wrong_lane_steps < 1) throw std::invalid_argument("wrong_lane_steps must be >= 1");
  if (!(ego_constant_svo >= 0.0 && ego_constant_svo <= 90.0)) {
    throw std::invalid_argument("ego_constant_svo must lie in [0, 90]");
  }
  pid.validate();
}

MissingAction::MissingAction(int id)
    : std::invalid_argument("missing action for agent " + std::to_string(id)), agent_id(id) {}

WorldState reset(std::shared_ptr<const ScenarioSpec> scenario, const CaseSpec& c, EnvMode mode,
                 const EpisodeConfig& config) {
  if (!scenario) throw std::invalid_argument("reset needs a scenario");
  if (c.scenario != scenario->name) {
    throw CaseMismatch("case is for " + std::string(to_string(c.scenario)) + " but scenario is " +
                       std::string(to_string(scenario->name)));
  }
  config.validate();
  validate_case(c, *scenario);

  WorldState w;
  w.scenario = std::move(scenario);
  w.case_id = c.case_id;
  w.mode = mode;
  w.config = config;
  w.rng_state = c.seed;
  w.agents.reserve(c.agents.size());
  for (std::size_t i = 0; i < c.agents.size(); ++i) {
    const CaseAgent& ca = c.agents[i];
    AgentRecord a;
    a.id = static_cast<int>(i) + 1;
    a.vehicle_id = ca.vehicle_id;
    a.path_id = ca.path_id;
    a.state = {ca.pose, ca.speed};
    a.genuine_svo = ca.svo_deg;
    a.history.assign(static_cast<std::size_t>(config.history), a.state);
    a.progress = w.path(a).geometry.project(ca.pose.position()).arclength;
    a.ego = mode == EnvMode::ego_vs_flow && i == 0;
    w.agents.push_back(std::move(a));
  }
  return w;
}

StepOutcome step(WorldState& world, const JointAction& actions, Execution exec) {
  const bool par = exec == Execution::parallel;
  return step_with(world, actions, [&](auto&& body) {
    parallel_for(world.agents.size(), par, omp_get_max_threads(), body);
  });
}

StepOutcome step_reference(WorldState& world, const JointAction& actions, std::span<const int> order) {
  std::vector<int> sorted(order.begin(), order.end());
  std::sort(sorted.begin(), sorted.end());
  std::vector<int> expected(world.agents.size());
  std::iota(expected.begin(), expected.end(), 0);
  if (sorted != expected) throw std::invalid_argument("order must be a permutation of agent indices");
  return step_with(world, actions, [&](auto&& body) {
    for (int i : order) body(static_cast<std::size_t>(i));
  });
}

bool in_wrong_lane(const AgentRecord& agent, const WorldState& world) {
  return against_traffic(agent.state.pose, world);
}

TerminationStatus classify_termination(const AgentRecord& agent, const WorldState& world) {
  if (collides(agent, world)) return TerminationStatus::collision;
  if (outside_drivable(agent, world)) return TerminationStatus::off_road;
  const CandidatePath& path = world.path(agent);
  const PathProjection proj = path.geometry.project(agent.state.pose.position());
  if (proj.distance > world.config.off_route_threshold) return TerminationStatus::off_route;
  if (agent.wrong_lane_streak >= world.config.wrong_lane_steps) return TerminationStatus::wrong_lane;
  if (agent.progress >= path.zone_exit_arclength) return TerminationStatus::success;
  if (world.step_count >= world.config.max_steps) return TerminationStatus::timeout;
  return TerminationStatus::alive;
}

std::uint64_t world_fingerprint(const WorldState& world) {
  std::uint64_t h = 0xCBF29CE484222325ull;
  h = mix(h, world.case_id);
  h = mix(h, world.step_count);
  h = mix(h, world.rng_state);
  h = mix(h, world.done);
  for (const AgentRecord& a : world.agents) {
    h = mix(h, a.id);
    h = mix(h, static_cast<int>(a.status));
    h = mix(h, a.termination_step);
    h = mix_state(h, a.state);
    h = mix(h, a.pid.integral);
    h = mix(h, a.pid.previous_error);
    h = mix(h, a.progress);
    h = mix(h, a.wrong_lane_streak);
    for (const VehicleState& s : a.history) h = mix_state(h, s);
  }
  return h;
}

}  // namespace sflow
