#include "sflow/rollout.hpp"

#include <omp.h>
#include <zlib.h>

#include <algorithm>
#include <array>
#include <bit>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <map>
#include <sstream>
#include <tuple>

#include "sflow/observation.hpp"
#include "sflow/parallel.hpp"
#include "sflow/random.hpp"

namespace sflow {

using nlohmann::json;

namespace {

double ego_distance_to(const WorldState& w, const AgentRecord& a) {
  const AgentRecord& ego = w.agents.front();
  if (!ego.alive()) return std::numeric_limits<double>::infinity();
  return distance(ego.state.pose.position(), a.state.pose.position());
}

struct Decision {
  Action action;
  DeliveredContext delivered;
};

Decision decide(const RolloutSpec& spec, const WorldState& w, const SvoContext& genuine, const AgentRecord& a) {
  Decision d;
  const PolicyHandle& policy = a.ego ? *spec.ego_policy : spec.flow_policy;
  const double clip = w.config.clip_radius;
  if (a.ego) {
    d.delivered = communicate(CommConstant{w.config.ego_constant_svo}, a.id, genuine, nullptr, 0.0, clip);
  } else if (std::holds_alternative<CommAdversarial>(spec.comm_mode)) {
    const double dist = ego_distance_to(w, a);
    std::optional<ObservationFrame> adv;
    if (dist <= clip) adv = build_adversary_observation(a.id, w);
    d.delivered = communicate(spec.comm_mode, a.id, genuine, adv ? &*adv : nullptr, dist, clip);
  } else {
    d.delivered = communicate(spec.comm_mode, a.id, genuine, nullptr, 0.0, clip);
  }
  if (policy.needs_observation()) {
    const ObservationFrame obs = attach_context(build_observation(a.id, w), d.delivered);
    d.action = act(policy, a.id, w, &obs);
  } else {
    d.action = act(policy, a.id, w, nullptr);
  }
  return d;
}

void check_spec(const RolloutSpec& spec) {
  if (!spec.scenario) throw std::invalid_argument("rollout needs a scenario");
  const bool ego_mode = spec.mode == EnvMode::ego_vs_flow;
  if (ego_mode != spec.ego_policy.has_value()) {
    throw std::invalid_argument(ego_mode ? "ego_vs_flow mode needs an ego policy"
                                         : "an ego policy is only valid in ego_vs_flow mode");
  }
  if (std::holds_alternative<CommAdversarial>(spec.comm_mode) && !ego_mode) {
    throw std::invalid_argument("adversarial communication requires ego_vs_flow mode");
  }
}

// ------------------------------------------------------------------ json bits

json pose_json(const Pose2D& p) { return json::array({p.x, p.y, p.theta}); }
Pose2D pose_from(const json& j) { return {j.at(0).get<double>(), j.at(1).get<double>(), j.at(2).get<double>()}; }

json header_json(const EpisodeLog& log) {
  json agents = json::array();
  for (const AgentSummary& a : log.agents) {
    agents.push_back({{"id", a.id},
                      {"path", a.path_id},
                      {"vehicle", a.vehicle_id},
                      {"svo", a.genuine_svo},
                      {"ego", a.ego},
                      {"pose", pose_json(a.initial.pose)},
                      {"speed", a.initial.speed}});
  }
  return {{"type", "header"},
          {"schema", EpisodeLog::kSchemaVersion},
          {"scenario", log.scenario},
          {"scenario_hash", log.scenario_hash},
          {"case_id", log.case_id},
          {"repeat", log.repeat},
          {"case_seed", log.case_seed},
          {"seed", log.seed},
          {"mode", to_string(log.mode)},
          {"comm", log.comm},
          {"flow_policy", log.flow_policy},
          {"ego_policy", log.ego_policy},
          {"config", episode_config_to_json(log.config)},
          {"agents", agents}};
}

json step_json(const StepRecord& s) {
  json agents = json::array();
  for (const AgentStepRecord& a : s.agents) {
    json r = {{"id", a.id},
              {"action", json::array({a.action.v_ref, a.action.sigma})},
              {"pose", pose_json(a.pose)},
              {"speed", a.speed},
              {"svo", a.delivered_svo},
              {"reward", json::array({a.reward.r_speed, a.reward.r_fail, a.reward.individual, a.reward.composed,
                                      a.reward.adversary_signal})},
              {"status", to_string(a.status)}};
    if (a.delivered_ego_svo) r["ego_svo"] = *a.delivered_ego_svo;
    agents.push_back(std::move(r));
  }
  return {{"type", "step"}, {"step", s.step}, {"agents", agents}};
}

json footer_json(const EpisodeLog& log) {
  json agents = json::array();
  for (const AgentSummary& a : log.agents) {
    agents.push_back({{"id", a.id},
                      {"status", to_string(a.status)},
                      {"termination_step", a.termination_step},
                      {"speed_sum", a.speed_sum},
                      {"alive_steps", a.alive_steps},
                      {"v_max", a.v_max}});
  }
  return {{"type", "footer"},
          {"steps", log.step_count},
          {"wall_time_s", log.wall_time_s},
          {"fingerprint", log.fingerprint},
          {"agents", agents}};
}

EnvMode mode_from(const std::string& s) {
  if (s == "flow") return EnvMode::flow;
  if (s == "ego_vs_flow") return EnvMode::ego_vs_flow;
  throw ParseError("unknown mode '" + s + "'");
}

struct Stats {
  double sum = 0.0;
  double sum_sq = 0.0;
  int n = 0;

  void add(double x) {
    sum += x;
    sum_sq += x * x;
    ++n;
  }
  double mean() const { return n ? sum / n : 0.0; }
  double ci95() const {
    if (n < 2) return 0.0;
    const double var = std::max(0.0, (sum_sq - sum * sum / n) / (n - 1));
    return 1.96 * std::sqrt(var / n);
  }
};

std::vector<const AgentSummary*> in_scope(const EpisodeLog& log, MetricScope scope) {
  std::vector<const AgentSummary*> out;
  for (const AgentSummary& a : log.agents) {
    if (scope == MetricScope::flow || a.ego) out.push_back(&a);
  }
  if (scope == MetricScope::ego_only && out.empty()) {
    throw std::invalid_argument("ego_only metrics need an ego agent in every episode");
  }
  return out;
}

double agent_mean_speed(const AgentSummary& a) { return a.alive_steps ? a.speed_sum / a.alive_steps : 0.0; }

std::string pct(const Metric& m) {
  std::ostringstream s;
  s << std::fixed << std::setprecision(1) << m.value << " ± " << m.ci95;
  return s.str();
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  return out;
}

bool bit_equal(double a, double b) { return std::bit_cast<std::uint64_t>(a) == std::bit_cast<std::uint64_t>(b); }

}  // namespace

// ------------------------------------------------------------------ episodes

bool same_episode(const EpisodeLog& a, const EpisodeLog& b) {
  return a.scenario == b.scenario && a.scenario_hash == b.scenario_hash && a.case_id == b.case_id &&
         a.repeat == b.repeat && a.case_seed == b.case_seed && a.seed == b.seed && a.mode == b.mode &&
         a.comm == b.comm && a.flow_policy == b.flow_policy && a.ego_policy == b.ego_policy &&
         a.config == b.config && a.agents == b.agents && a.steps == b.steps && a.step_count == b.step_count &&
         a.fingerprint == b.fingerprint;
}

std::uint64_t episode_seed(std::uint64_t master_seed, int case_id, int repeat) {
  return derive_seed(derive_seed(master_seed, static_cast<std::uint64_t>(case_id)),
                     static_cast<std::uint64_t>(repeat));
}

EpisodeLog run_episode(const CaseSpec& c, const RolloutSpec& spec, std::uint64_t seed, int repeat) {
  check_spec(spec);
  const auto started = std::chrono::steady_clock::now();
  WorldState w = reset(spec.scenario, c, spec.mode, spec.config);
  w.rng_state = derive_seed(c.seed, seed);

  EpisodeLog log;
  log.scenario = std::string(to_string(spec.scenario->name));
  log.scenario_hash = spec.scenario->content_hash;
  log.case_id = c.case_id;
  log.repeat = repeat;
  log.case_seed = c.seed;
  log.seed = seed;
  log.mode = spec.mode;
  log.comm = spec.comm_label;
  log.flow_policy = std::string(to_string(spec.flow_policy.kind));
  log.ego_policy = spec.ego_policy ? std::string(to_string(spec.ego_policy->kind)) : "";
  log.config = spec.config;
  for (std::size_t i = 0; i < w.agents.size(); ++i) {
    const AgentRecord& a = w.agents[i];
    AgentSummary s;
    s.id = a.id;
    s.path_id = a.path_id;
    s.vehicle_id = a.vehicle_id;
    s.genuine_svo = a.genuine_svo;
    s.ego = a.ego;
    s.initial = c.agents[i];
    s.v_max = w.params(a).v_max;
    log.agents.push_back(s);
  }

  SvoContext genuine;
  for (const AgentRecord& a : w.agents) genuine.genuine.push_back(a.genuine_svo);
  const std::size_t n = w.agents.size();
  const bool parallel = spec.execution == Execution::parallel;
  std::vector<Decision> decisions(n);
  JointAction actions(n);

  while (!w.done) {
    parallel_for(n, parallel, omp_get_max_threads(), [&](std::size_t i) {
      if (w.agents[i].alive()) decisions[i] = decide(spec, w, genuine, w.agents[i]);
    });
    std::vector<int> movers;
    for (std::size_t i = 0; i < n; ++i) {
      actions[i].reset();
      if (w.agents[i].alive()) {
        actions[i] = decisions[i].action;
        movers.push_back(static_cast<int>(i));
      }
    }
    const StepOutcome out = step(w, actions, spec.execution);

    StepRecord rec;
    rec.step = w.step_count;
    for (int i : movers) {
      const AgentRecord& a = w.agents[static_cast<std::size_t>(i)];
      AgentSummary& s = log.agents[static_cast<std::size_t>(i)];
      s.speed_sum += a.state.speed;
      ++s.alive_steps;
      if (!spec.record_steps) continue;
      AgentStepRecord r;
      r.id = a.id;
      r.action = *actions[static_cast<std::size_t>(i)];
      r.pose = a.state.pose;
      r.speed = a.state.speed;
      const DeliveredContext& dc = decisions[static_cast<std::size_t>(i)].delivered;
      r.delivered_svo = dc.value(a.id);
      if (spec.mode == EnvMode::ego_vs_flow) r.delivered_ego_svo = dc.value(1);
      r.reward = out.agents[static_cast<std::size_t>(i)].reward;
      r.status = out.agents[static_cast<std::size_t>(i)].status;
      rec.agents.push_back(r);
    }
    if (spec.record_steps) log.steps.push_back(std::move(rec));
  }

  for (std::size_t i = 0; i < n; ++i) {
    log.agents[i].status = w.agents[i].status;
    log.agents[i].termination_step = w.agents[i].termination_step;
  }
  log.step_count = w.step_count;
  log.fingerprint = world_fingerprint(w);
  log.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  return log;
}

std::vector<EpisodeLog> run_batch(const std::vector<CaseSpec>& cases, const RolloutSpec& spec, int repeats,
                                  std::uint64_t master_seed, int workers, const EpisodeSink& sink) {
  if (repeats < 1) throw std::invalid_argument("repeats must be >= 1");
  if (workers < 1) throw std::invalid_argument("workers must be >= 1");
  check_spec(spec);
  std::vector<const CaseSpec*> ordered;
  for (const CaseSpec& c : cases) ordered.push_back(&c);
  std::stable_sort(ordered.begin(), ordered.end(),
                   [](const CaseSpec* a, const CaseSpec* b) { return a->case_id < b->case_id; });

  RolloutSpec inner = spec;
  if (workers > 1) inner.execution = Execution::serial;
  const std::size_t total = ordered.size() * static_cast<std::size_t>(repeats);
  std::vector<EpisodeLog> logs(total);
  parallel_for(total, workers > 1, workers, [&](std::size_t k) {
    const CaseSpec& c = *ordered[k / static_cast<std::size_t>(repeats)];
    const int r = static_cast<int>(k % static_cast<std::size_t>(repeats));
    logs[k] = run_episode(c, inner, episode_seed(master_seed, c.case_id, r), r);
    if (sink) {
      sink(logs[k]);
      logs[k].steps = {};
    }
  });
  return logs;
}

// ------------------------------------------------------------------- metrics

MetricsReport aggregate_metrics(const std::vector<EpisodeLog>& logs, MetricScope scope, EfficiencyMode efficiency) {
  if (logs.empty()) throw EmptyBatch();
  std::vector<const EpisodeLog*> ordered;
  for (const EpisodeLog& l : logs) ordered.push_back(&l);
  std::sort(ordered.begin(), ordered.end(), [](const EpisodeLog* a, const EpisodeLog* b) {
    return std::tie(a->case_id, a->repeat, a->seed) < std::tie(b->case_id, b->repeat, b->seed);
  });

  std::array<long, 7> counts{};
  long agents = 0;
  double eff_sum = 0.0, speed_sum = 0.0;
  std::array<Stats, 7> per_status;
  Stats safety_ep, eff_ep, speed_ep;
  for (const EpisodeLog* log : ordered) {
    const auto scoped = in_scope(*log, scope);
    std::array<int, 7> ep{};
    double ep_eff = 0.0, ep_speed = 0.0;
    for (const AgentSummary* a : scoped) {
      ++ep[static_cast<std::size_t>(a->status)];
      const double v = agent_mean_speed(*a);
      const double e = efficiency == EfficiencyMode::normalized_speed ? 100.0 * v / a->v_max : v;
      ep_eff += e;
      ep_speed += v;
    }
    const auto m = static_cast<double>(scoped.size());
    for (std::size_t s = 0; s < ep.size(); ++s) {
      counts[s] += ep[s];
      per_status[s].add(100.0 * ep[s] / m);
    }
    const int failures = ep[2] + ep[3] + ep[4] + ep[5];
    safety_ep.add(100.0 - 100.0 * failures / m);
    eff_ep.add(ep_eff / m);
    speed_ep.add(ep_speed / m);
    eff_sum += ep_eff;
    speed_sum += ep_speed;
    agents += static_cast<long>(scoped.size());
  }
  if (counts[static_cast<std::size_t>(TerminationStatus::alive)] != 0) {
    throw std::logic_error("aggregate_metrics received an unfinished episode");
  }

  auto pct_of = [&](TerminationStatus s) {
    const auto i = static_cast<std::size_t>(s);
    return Metric{100.0 * static_cast<double>(counts[i]) / static_cast<double>(agents), per_status[i].ci95()};
  };
  MetricsReport r;
  r.success = pct_of(TerminationStatus::success);
  r.collision = pct_of(TerminationStatus::collision);
  r.off_road = pct_of(TerminationStatus::off_road);
  r.off_route = pct_of(TerminationStatus::off_route);
  r.wrong_lane = pct_of(TerminationStatus::wrong_lane);
  r.timeout = pct_of(TerminationStatus::timeout);
  r.safety = {100.0 - (r.collision.value + r.off_road.value + r.off_route.value + r.wrong_lane.value),
              safety_ep.ci95()};
  r.efficiency = {eff_sum / static_cast<double>(agents), eff_ep.ci95()};
  r.mean_speed = {speed_sum / static_cast<double>(agents), speed_ep.ci95()};
  r.episode_count = static_cast<int>(logs.size());
  r.agent_count = static_cast<int>(agents);
  r.efficiency_mode = efficiency;
  return r;
}

std::string metrics_csv_header() {
  return "label,success,success_ci95,collision,collision_ci95,off_road,off_road_ci95,off_route,off_route_ci95,"
         "wrong_lane,wrong_lane_ci95,efficiency,efficiency_ci95,timeout,safety,mean_speed,episodes,agents";
}

std::string metrics_csv_row(const std::string& label, const MetricsReport& r) {
  std::ostringstream s;
  s << std::setprecision(17) << label;
  for (const Metric* m : {&r.success, &r.collision, &r.off_road, &r.off_route, &r.wrong_lane, &r.efficiency}) {
    s << ',' << m->value << ',' << m->ci95;
  }
  s << ',' << r.timeout.value << ',' << r.safety.value << ',' << r.mean_speed.value << ',' << r.episode_count << ','
    << r.agent_count;
  return s.str();
}

std::string metrics_table(const std::vector<std::pair<std::string, MetricsReport>>& rows) {
  const std::vector<std::string> heads = {"", "Success", "Collision", "Off Road", "Off Route", "Wrong Lane",
                                          "Efficiency"};
  std::vector<std::vector<std::string>> cells = {heads};
  for (const auto& [label, r] : rows) {
    cells.push_back({label, pct(r.success), pct(r.collision), pct(r.off_road), pct(r.off_route), pct(r.wrong_lane),
                     pct(r.efficiency)});
  }
  std::vector<std::size_t> width(heads.size(), 0);
  for (const auto& row : cells) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      // "±" is two bytes but one column
      const std::size_t len = row[i].size() - (row[i].find("±") != std::string::npos ? 1 : 0);
      width[i] = std::max(width[i], len);
    }
  }
  std::ostringstream out;
  for (const auto& row : cells) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      const std::size_t len = row[i].size() - (row[i].find("±") != std::string::npos ? 1 : 0);
      if (i) out << "  ";
      if (i == 0) {
        out << row[i] << std::string(width[i] - len, ' ');
      } else {
        out << std::string(width[i] - len, ' ') << row[i];
      }
    }
    out << '\n';
  }
  return out.str();
}

void write_episode_csv(std::ostream& out, const std::vector<EpisodeLog>& logs, MetricScope scope) {
  out << "case_id,repeat,seed,agents,success,collision,off_road,off_route,wrong_lane,timeout,success_pct,"
         "safety_pct,mean_speed,steps\n";
  out << std::setprecision(17);
  for (const EpisodeLog& log : logs) {
    const auto scoped = in_scope(log, scope);
    std::array<int, 7> ep{};
    double speed = 0.0;
    for (const AgentSummary* a : scoped) {
      ++ep[static_cast<std::size_t>(a->status)];
      speed += agent_mean_speed(*a);
    }
    const auto m = static_cast<double>(scoped.size());
    const int failures = ep[2] + ep[3] + ep[4] + ep[5];
    out << log.case_id << ',' << log.repeat << ',' << log.seed << ',' << scoped.size();
    for (std::size_t s = 1; s < ep.size(); ++s) out << ',' << ep[s];
    out << ',' << 100.0 * ep[1] / m << ',' << 100.0 - 100.0 * failures / m << ',' << speed / m << ','
        << log.step_count << '\n';
  }
}

std::vector<EpisodeRow> read_episode_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw ParseError("episode table is empty");
  const auto head = split_csv(line);
  auto column = [&](const char* name) {
    auto it = std::find(head.begin(), head.end(), name);
    if (it == head.end()) throw ParseError(std::string("episode table lacks column '") + name + "'");
    return static_cast<std::size_t>(it - head.begin());
  };
  const std::size_t c_case = column("case_id"), c_rep = column("repeat"), c_succ = column("success_pct"),
                    c_safe = column("safety_pct"), c_speed = column("mean_speed");
  std::vector<EpisodeRow> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto cells = split_csv(line);
    if (cells.size() != head.size()) throw ParseError("episode table row has the wrong number of cells");
    try {
      rows.push_back({std::stoi(cells[c_case]), std::stoi(cells[c_rep]), std::stod(cells[c_succ]),
                      std::stod(cells[c_safe]), std::stod(cells[c_speed])});
    } catch (const std::logic_error&) {
      throw ParseError("episode table has a non-numeric cell: " + line);
    }
  }
  return rows;
}

std::vector<PairedDifference> paired_compare(const std::vector<EpisodeRow>& a, const std::vector<EpisodeRow>& b) {
  std::map<std::pair<int, int>, const EpisodeRow*> index;
  for (const EpisodeRow& r : a) index[{r.case_id, r.repeat}] = &r;
  std::vector<std::pair<const EpisodeRow*, const EpisodeRow*>> pairs;
  std::vector<const EpisodeRow*> bs;
  for (const EpisodeRow& r : b) bs.push_back(&r);
  std::sort(bs.begin(), bs.end(), [](const EpisodeRow* x, const EpisodeRow* y) {
    return std::tie(x->case_id, x->repeat) < std::tie(y->case_id, y->repeat);
  });
  for (const EpisodeRow* r : bs) {
    auto it = index.find({r->case_id, r->repeat});
    if (it != index.end()) pairs.emplace_back(it->second, r);
  }
  if (pairs.empty()) throw std::invalid_argument("no episodes share a (case_id, repeat) key");
  std::vector<PairedDifference> out;
  for (auto [name, field] : {std::pair{"success", &EpisodeRow::success}, std::pair{"safety", &EpisodeRow::safety},
                             std::pair{"mean_speed", &EpisodeRow::mean_speed}}) {
    Stats s;
    for (const auto& [x, y] : pairs) s.add(y->*field - x->*field);
    out.push_back({name, s.mean(), s.ci95(), s.n});
  }
  return out;
}

// -------------------------------------------------------------------- config

json episode_config_to_json(const EpisodeConfig& c) {
  return {{"dt", c.dt},
          {"max_steps", c.max_steps},
          {"clip_radius", c.clip_radius},
          {"history", c.history},
          {"off_route_threshold", c.off_route_threshold},
          {"wrong_lane_heading_deg", c.wrong_lane_heading_deg},
          {"wrong_lane_steps", c.wrong_lane_steps},
          {"ego_constant_svo", c.ego_constant_svo},
          {"pid", {{"kp", c.pid.kp}, {"ki", c.pid.ki}, {"kd", c.pid.kd}, {"accel_max", c.pid.accel_max}}},
          {"reward", {{"omega1", c.reward.omega1()}, {"omega2", c.reward.omega2()}}}};
}

EpisodeConfig episode_config_from_json(const json& j, EpisodeConfig c) {
  if (!j.is_object()) throw ParseError("episode config must be an object");
  auto num = [](const json& v, const std::string& key) {
    if (!v.is_number()) throw ParseError("field '" + key + "' must be a number");
    return v.get<double>();
  };
  auto integer = [](const json& v, const std::string& key) {
    if (!v.is_number_integer()) throw ParseError("field '" + key + "' must be an integer");
    return v.get<int>();
  };
  for (const auto& [key, v] : j.items()) {
    if (key == "dt") c.dt = num(v, key);
    else if (key == "max_steps") c.max_steps = integer(v, key);
    else if (key == "clip_radius") c.clip_radius = num(v, key);
    else if (key == "history") c.history = integer(v, key);
    else if (key == "off_route_threshold") c.off_route_threshold = num(v, key);
    else if (key == "wrong_lane_heading_deg") c.wrong_lane_heading_deg = num(v, key);
    else if (key == "wrong_lane_steps") c.wrong_lane_steps = integer(v, key);
    else if (key == "ego_constant_svo") c.ego_constant_svo = num(v, key);
    else if (key == "pid") {
      if (!v.is_object()) throw ParseError("field 'pid' must be an object");
      for (const auto& [k, x] : v.items()) {
        if (k == "kp") c.pid.kp = num(x, "pid.kp");
        else if (k == "ki") c.pid.ki = num(x, "pid.ki");
        else if (k == "kd") c.pid.kd = num(x, "pid.kd");
        else if (k == "accel_max") c.pid.accel_max = num(x, "pid.accel_max");
        else throw ParseError("unknown key 'pid." + k + "'");
      }
    } else if (key == "reward") {
      if (!v.is_object()) throw ParseError("field 'reward' must be an object");
      double w1 = c.reward.omega1(), w2 = c.reward.omega2();
      for (const auto& [k, x] : v.items()) {
        if (k == "omega1") w1 = num(x, "reward.omega1");
        else if (k == "omega2") w2 = num(x, "reward.omega2");
        else throw ParseError("unknown key 'reward." + k + "'");
      }
      try {
        c.reward = RewardWeights(w1, w2);
      } catch (const std::invalid_argument& e) {
        throw ParseError(std::string("reward: ") + e.what());
      }
    } else {
      throw ParseError("unknown key '" + key + "'");
    }
  }
  try {
    c.validate();
  } catch (const std::invalid_argument& e) {
    throw ParseError(e.what());
  }
  return c;
}

// ------------------------------------------------------------------ log files

void write_episode_log(std::ostream& out, const EpisodeLog& log) {
  out << header_json(log).dump() << '\n';
  for (const StepRecord& s : log.steps) out << step_json(s).dump() << '\n';
  out << footer_json(log).dump() << '\n';
}

EpisodeLog read_episode_log(std::istream& in) {
  EpisodeLog log;
  std::string line;
  bool have_header = false, have_footer = false;
  std::map<int, std::size_t> slot;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    json j;
    try {
      j = json::parse(line);
      const std::string type = j.at("type").get<std::string>();
      if (type == "header") {
        if (j.at("schema").get<int>() != EpisodeLog::kSchemaVersion) throw ParseError("unsupported log schema");
        log.scenario = j.at("scenario").get<std::string>();
        log.scenario_hash = j.at("scenario_hash").get<std::uint64_t>();
        log.case_id = j.at("case_id").get<int>();
        log.repeat = j.at("repeat").get<int>();
        log.case_seed = j.at("case_seed").get<std::uint64_t>();
        log.seed = j.at("seed").get<std::uint64_t>();
        log.mode = mode_from(j.at("mode").get<std::string>());
        log.comm = j.at("comm").get<std::string>();
        log.flow_policy = j.at("flow_policy").get<std::string>();
        log.ego_policy = j.at("ego_policy").get<std::string>();
        log.config = episode_config_from_json(j.at("config"));
        for (const json& a : j.at("agents")) {
          AgentSummary s;
          s.id = a.at("id").get<int>();
          s.path_id = a.at("path").get<int>();
          s.vehicle_id = a.at("vehicle").get<int>();
          s.genuine_svo = a.at("svo").get<double>();
          s.ego = a.at("ego").get<bool>();
          s.initial = {s.path_id, pose_from(a.at("pose")), a.at("speed").get<double>(), s.genuine_svo, s.vehicle_id};
          slot[s.id] = log.agents.size();
          log.agents.push_back(s);
        }
        have_header = true;
      } else if (type == "step") {
        if (!have_header) throw ParseError("step record before header");
        StepRecord s;
        s.step = j.at("step").get<int>();
        for (const json& a : j.at("agents")) {
          AgentStepRecord r;
          r.id = a.at("id").get<int>();
          r.action = {a.at("action").at(0).get<double>(), a.at("action").at(1).get<double>()};
          r.pose = pose_from(a.at("pose"));
          r.speed = a.at("speed").get<double>();
          r.delivered_svo = a.at("svo").get<double>();
          if (a.contains("ego_svo")) r.delivered_ego_svo = a.at("ego_svo").get<double>();
          const json& rw = a.at("reward");
          r.reward = {rw.at(0).get<double>(), rw.at(1).get<double>(), rw.at(2).get<double>(), rw.at(3).get<double>(),
                      rw.at(4).get<double>()};
          r.status = termination_status_from_string(a.at("status").get<std::string>());
          s.agents.push_back(r);
        }
        log.steps.push_back(std::move(s));
      } else if (type == "footer") {
        if (!have_header) throw ParseError("footer before header");
        log.step_count = j.at("steps").get<int>();
        log.wall_time_s = j.at("wall_time_s").get<double>();
        log.fingerprint = j.at("fingerprint").get<std::uint64_t>();
        for (const json& a : j.at("agents")) {
          auto it = slot.find(a.at("id").get<int>());
          if (it == slot.end()) throw ParseError("footer names an unknown agent");
          AgentSummary& s = log.agents[it->second];
          s.status = termination_status_from_string(a.at("status").get<std::string>());
          s.termination_step = a.at("termination_step").get<int>();
          s.speed_sum = a.at("speed_sum").get<double>();
          s.alive_steps = a.at("alive_steps").get<int>();
          s.v_max = a.at("v_max").get<double>();
        }
        have_footer = true;
        break;
      } else {
        throw ParseError("unknown record type '" + type + "'");
      }
    } catch (const json::exception& e) {
      throw ParseError(std::string("malformed log record: ") + e.what());
    } catch (const std::invalid_argument& e) {
      throw ParseError(std::string("malformed log record: ") + e.what());
    }
  }
  if (!have_header || !have_footer) throw ParseError("episode log lacks a header or footer");
  return log;
}

void save_episode_log(const std::filesystem::path& path, const EpisodeLog& log) {
  std::ostringstream buffer;
  write_episode_log(buffer, log);
  const std::string text = buffer.str();
  if (path.extension() == ".gz") {
    gzFile f = gzopen(path.string().c_str(), "wb");
    if (!f) throw std::runtime_error("cannot write " + path.string());
    const int written = gzwrite(f, text.data(), static_cast<unsigned>(text.size()));
    gzclose(f);
    if (written != static_cast<int>(text.size())) throw std::runtime_error("short write to " + path.string());
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
}

EpisodeLog load_episode_log(const std::filesystem::path& path) {
  // gzread passes uncompressed files through unchanged
  gzFile f = gzopen(path.string().c_str(), "rb");
  if (!f) throw std::runtime_error("cannot open " + path.string());
  std::string text;
  char chunk[1 << 16];
  int got;
  while ((got = gzread(f, chunk, sizeof(chunk))) > 0) text.append(chunk, static_cast<std::size_t>(got));
  gzclose(f);
  if (got < 0) throw std::runtime_error("cannot decompress " + path.string());
  std::istringstream in(text);
  return read_episode_log(in);
}

CaseSpec case_from_log(const EpisodeLog& log, ScenarioName scenario) {
  CaseSpec c;
  c.case_id = log.case_id;
  c.scenario = scenario;
  c.seed = log.case_seed;
  for (const AgentSummary& a : log.agents) c.agents.push_back(a.initial);
  return c;
}

ReplayReport replay_episode(const EpisodeLog& log, std::shared_ptr<const ScenarioSpec> scenario) {
  if (!scenario) throw std::invalid_argument("replay needs a scenario");
  if (scenario->content_hash != log.scenario_hash) {
    throw std::invalid_argument("scenario content differs from the one the log was recorded on");
  }
  if (log.steps.empty() && log.step_count > 0) {
    throw std::invalid_argument("log has no step records; rerun with step recording enabled");
  }
  WorldState w = reset(scenario, case_from_log(log, scenario->name), log.mode, log.config);
  w.rng_state = derive_seed(log.case_seed, log.seed);
  ReplayReport report;
  JointAction actions(w.agents.size());
  for (const StepRecord& rec : log.steps) {
    std::fill(actions.begin(), actions.end(), std::nullopt);
    for (const AgentStepRecord& a : rec.agents) actions.at(static_cast<std::size_t>(a.id - 1)) = a.action;
    step(w, actions, Execution::serial);
    ++report.steps;
    bool ok = w.step_count == rec.step;
    for (const AgentStepRecord& a : rec.agents) {
      const VehicleState& s = w.agent(a.id).state;
      ok = ok && bit_equal(s.pose.x, a.pose.x) && bit_equal(s.pose.y, a.pose.y) &&
           bit_equal(s.pose.theta, a.pose.theta) && bit_equal(s.speed, a.speed) && w.agent(a.id).status == a.status;
    }
    if (!ok) {
      ++report.mismatches;
      if (!report.first_mismatch_step) report.first_mismatch_step = rec.step;
    }
  }
  report.final_fingerprint_matches = world_fingerprint(w) == log.fingerprint;
  return report;
}

}  // namespace sflow
