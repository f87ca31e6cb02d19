// Acceptance runner: one PASS/FAIL line per criterion, exit status 1 if any fail.
// Usage: acceptance [--cases N] [--seeds N] [--only P1,P3]

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <numbers>
#include <set>
#include <sstream>
#include <string>

#include <omp.h>

#include "CLI11.hpp"
#include "oracles.hpp"
#include "sflow/dynamics.hpp"
#include "sflow/idm.hpp"
#include "sflow/reward.hpp"
#include "sflow/rollout.hpp"
#include "support.hpp"

namespace sflow {
namespace {

using testing::draw;
using testing::draw_int;

// Every tolerance used below.
constexpr double kAccountingTol = 1e-9;
constexpr double kRuntimeBudgetS = 600.0;
constexpr double kSvoWeightTol = 1e-12;
constexpr double kAlphaTol = 1e-12;
constexpr double kIdmRelTol = 1e-12;
constexpr double kCircleRelTol = 0.01;
constexpr double kCircleDt = 0.001;
constexpr double kPidRiseTime = 2.0;
constexpr double kPidRiseBand = 0.05;  // fraction of the commanded step
constexpr double kPidSteadyTol = 0.01;
constexpr double kPidSteadyTime = 10.0;
constexpr double kInferenceTol = 1e-5;
constexpr double kPermutationTol = 1e-6;

constexpr std::array<ScenarioName, 4> kScenarios = {ScenarioName::intersection, ScenarioName::bottleneck,
                                                    ScenarioName::merge, ScenarioName::roundabout};

struct Verdict {
  bool pass = true;
  std::ostringstream detail;

  void require(bool ok, const std::string& what) {
    if (!ok && pass) detail << "first failure: " << what << "; ";
    pass = pass && ok;
  }
};

struct Options {
  int cases = 200;
  int seeds = 10;
  int workers = 1;
};

RolloutSpec idm_flow(ScenarioName name) {
  RolloutSpec s;
  s.scenario = testing::bundled(name);
  s.flow_policy = PolicyHandle::idm();
  return s;
}

// ------------------------------------------------------------------ P1, P2

struct FlowBatches {
  std::vector<std::pair<ScenarioName, std::vector<EpisodeLog>>> runs;
  double seconds = 0.0;
};

FlowBatches run_flow_batches(const Options& o) {
  FlowBatches b;
  const auto t0 = std::chrono::steady_clock::now();
  for (ScenarioName name : kScenarios) {
    const RolloutSpec spec = idm_flow(name);
    const auto cases = generate_cases(*spec.scenario, o.cases, 7, SvoUniform{});
    b.runs.emplace_back(name, run_batch(cases, spec, o.seeds, 1, o.workers));
  }
  b.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return b;
}

Verdict p1(const FlowBatches& b, const Options& o) {
  Verdict v;
  for (const auto& [name, logs] : b.runs) {
    const MetricsReport r = aggregate_metrics(logs, MetricScope::flow);
    v.detail << to_string(name) << " off_road=" << r.off_road.value << "% off_route=" << r.off_route.value
             << "% wrong_lane=" << r.wrong_lane.value << "% (success " << r.success.value << "%, collision "
             << r.collision.value << "%); ";
    const std::string where(to_string(name));
    v.require(r.off_road.value == 0.0, where + " off_road");
    v.require(r.off_route.value == 0.0, where + " off_route");
    v.require(r.wrong_lane.value == 0.0, where + " wrong_lane");
    v.require(static_cast<int>(logs.size()) == o.cases * o.seeds, where + " episode count");
  }
  v.detail << b.runs.size() * static_cast<std::size_t>(o.cases * o.seeds) << " episodes in " << std::round(b.seconds)
           << " s";
  v.require(b.seconds < kRuntimeBudgetS, "runtime budget");
  return v;
}

Verdict p2(const FlowBatches& b) {
  Verdict v;
  double worst = 0.0;
  long agents = 0;
  for (const auto& [name, logs] : b.runs) {
    const MetricsReport r = aggregate_metrics(logs, MetricScope::flow);
    const double total = r.success.value + r.collision.value + r.off_road.value + r.off_route.value +
                         r.wrong_lane.value + r.timeout.value;
    worst = std::max(worst, std::abs(total - 100.0));
    // each agent carries exactly one terminal status, set at its termination step
    for (const EpisodeLog& l : logs) {
      for (const AgentSummary& a : l.agents) {
        ++agents;
        v.require(a.status != TerminationStatus::alive, "agent left alive");
        v.require(a.termination_step >= 1 && a.termination_step <= l.step_count, "termination step");
        v.require(a.alive_steps == a.termination_step, "alive steps");
      }
    }
    v.require(r.agent_count > 0, "agents counted");
  }
  v.require(worst <= kAccountingTol, "status shares sum to 100");
  v.detail << "max |sum - 100| = " << worst << " over " << agents << " agents";
  return v;
}

// ---------------------------------------------------------------------- P3

Verdict p3(const Options& o) {
  Verdict v;
  int episodes = 0, replayed = 0;
  for (ScenarioName name : kScenarios) {
    RolloutSpec spec = idm_flow(name);
    spec.record_steps = true;
    const auto cases = generate_cases(*spec.scenario, 6, 7, SvoUniform{});
    const auto one = run_batch(cases, spec, 2, 3, 1);
    const auto four = run_batch(cases, spec, 2, 3, 4);
    for (std::size_t k = 0; k < one.size(); ++k) {
      ++episodes;
      v.require(same_episode(one[k], four[k]), "worker count changed an episode");
      const EpisodeLog again = run_episode(cases[k / 2], spec, one[k].seed, one[k].repeat);
      v.require(same_episode(one[k], again), "re-run differs");
      std::stringstream s;
      write_episode_log(s, one[k]);
      const ReplayReport rep = replay_episode(read_episode_log(s), spec.scenario);
      replayed += rep.steps;
      v.require(rep.mismatches == 0 && rep.final_fingerprint_matches, "replay mismatch");
    }
    spec.execution = Execution::parallel;
    v.require(same_episode(run_episode(cases[0], spec, one[0].seed), one[0]), "parallel step differs");
  }
  v.detail << episodes << " episodes re-run, 1 vs 4 workers, " << replayed << " logged steps replayed bitwise";
  (void)o;
  return v;
}

// ---------------------------------------------------------------------- P4

Verdict p4() {
  Verdict v;
  auto g = testing::rng(401);
  for (int i = 0; i < 1000; ++i) {
    const double own = draw(g, -150.0, 10.0);
    std::vector<double> others(static_cast<std::size_t>(draw_int(g, 1, 20)));
    double sum = 0.0;
    for (double& x : others) sum += (x = draw(g, -150.0, 10.0));
    v.require(socially_composed_reward(own, others, 0.0) == own, "c = 0 endpoint");
    v.require(socially_composed_reward(own, others, 90.0) == sum / static_cast<double>(others.size()),
              "c = 90 endpoint");
  }
  for (int i = 0; i < 10000; ++i) {
    const double r = draw(g, -1e6, 1e6);
    v.require(r + adversary_reward(r) == 0.0, "zero-sum");
  }
  v.require(std::abs(alpha_to_svo(1.0) + 45.0) <= kAlphaTol, "alpha_to_svo(1)");
  v.require(alpha_to_svo(0.0) == -90.0, "alpha_to_svo(0)");
  for (double a = 0.0; a < 1e6; a = a * 1.05 + 1e-3) {
    const double c = alpha_to_svo(a);
    v.require(c >= -90.0 && c < 0.0, "alpha range");
  }
  double worst = 0.0;
  for (int k = 0; k <= 900; ++k) {
    const SvoWeights w = svo_weights(0.1 * k);
    worst = std::max(worst, std::abs(w.own * w.own + w.others * w.others - 1.0));
  }
  v.require(worst <= kSvoWeightTol, "cos^2 + sin^2");
  v.detail << "endpoints exact on 1000 draws, 10000 zero-sum pairs, alpha_to_svo(1) = " << alpha_to_svo(1.0)
           << ", max |cos^2+sin^2-1| = " << worst;
  return v;
}

// ---------------------------------------------------------------------- P5

Verdict p5() {
  Verdict v;
  const IdmParams p;
  auto g = testing::rng(501);
  double worst = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const double vb = draw(g, 0.0, 12.0), vf = draw(g, 0.0, 12.0), gap = draw(g, 1.0, 150.0);
    const double want = testing::idm_by_hand(vb, vf, gap);
    worst = std::max(worst, std::abs(idm_acceleration_raw(vb, vf, gap, p) - want) / std::max(1.0, std::abs(want)));
  }
  v.require(worst <= kIdmRelTol, "IDM oracle");
  int sweeps = 0;
  for (int trial = 0; trial < 200; ++trial, ++sweeps) {
    const double vb = draw(g, 0.0, 10.0), vf = draw(g, 0.0, 10.0);
    double prev = -1e300;
    for (double gap = 0.05; gap < 200.0; gap *= 1.05) {
      const double a = idm_acceleration(vb, vf, gap, p);
      v.require(a >= prev, "gap monotonicity");
      prev = a;
    }
  }
  v.detail << "max relative error " << worst << " on 1000 draws; " << sweeps << " monotone gap sweeps";
  return v;
}

// ---------------------------------------------------------------------- P6

Verdict p6() {
  Verdict v;
  const VehicleParams vp;
  double worst_circle = 0.0;
  for (double sigma : {0.1, 0.3, -0.45}) {
    const double radius = vp.wheelbase / std::tan(std::abs(sigma)), speed = 5.0;
    const Vec2 centre{0.0, sigma > 0 ? radius : -radius};
    VehicleState s{{0, 0, 0}, speed};
    const int steps = static_cast<int>(std::ceil(2 * std::numbers::pi * radius / (speed * kCircleDt)));
    for (int t = 0; t < steps; ++t) {
      s = bicycle_step(s, 0.0, sigma, kCircleDt, vp);
      worst_circle = std::max(worst_circle, std::abs(distance(s.pose.position(), centre) - radius) / radius);
    }
  }
  v.require(worst_circle <= kCircleRelTol, "turning circle");

  const PidParams pid;
  auto g = testing::rng(601);
  for (int seq = 0; seq < 10000; ++seq) {
    VehicleState s{{0, 0, 0}, draw(g, 0.0, vp.v_max)};
    PidMemory mem;
    for (int t = 0; t < 20; ++t) {
      const Action a = clamp_action({draw(g, -50.0, 50.0), draw(g, -3.0, 3.0)}, vp);
      s = bicycle_step(s, pid_speed_control(s, a.v_ref, pid, mem, 0.1), a.sigma, 0.1, vp);
      v.require(s.speed >= 0.0 && s.speed <= vp.v_max, "speed closure");
    }
  }

  // "reaches v_ref within 2 s": inside a 5% band of the commanded step by then. Steps are
  // kept to at most accel_max * 1.2 s so the acceleration limit alone cannot use up the window.
  double worst_rise = 0.0, worst_steady = 0.0;
  const double dt = 0.1;
  for (auto [from, to] : {std::pair{0.0, 5.0}, std::pair{0.0, 6.0}, std::pair{8.0, 3.0}, std::pair{2.0, 7.5},
                          std::pair{9.0, 3.0}}) {
    if (std::abs(to - from) > pid.accel_max * 1.2) throw std::logic_error("PID step outside the checked range");
    VehicleState s{{}, from};
    PidMemory mem;
    const int rise = static_cast<int>(std::lround(kPidRiseTime / dt));
    const int steady = static_cast<int>(std::lround(kPidSteadyTime / dt));
    for (int t = 0; t < steady; ++t) {
      s = bicycle_step(s, pid_speed_control(s, to, pid, mem, dt), 0.0, dt, vp);
      if (t + 1 == rise) worst_rise = std::max(worst_rise, std::abs(s.speed - to) / std::abs(to - from));
    }
    worst_steady = std::max(worst_steady, std::abs(s.speed - to));
  }
  v.require(worst_rise <= kPidRiseBand, "PID rise");
  v.require(worst_steady < kPidSteadyTol, "PID steady state");
  v.detail << "circle radius error " << 100.0 * worst_circle << "%, speed closed over 10000 sequences, PID error "
           << 100.0 * worst_rise << "% of step at 2 s and " << worst_steady << " m/s at 10 s";
  return v;
}

// ---------------------------------------------------------------------- P7

Verdict p7() {
  Verdict v;
  auto g = testing::rng(701);
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const int width = draw_int(g, 5, 6);
    const auto w = init_weights(
        testing::random_network_shape(g, width, width == 6 ? OutputKind::action : OutputKind::svo), 7000 + trial);
    const int n_dyn = draw_int(g, 1, 2);
    const auto obs = testing::random_observation(g, width, n_dyn, draw_int(g, 0, 3 - n_dyn), 4);
    const auto got = decode_raw(obs, *w), want = testing::reference_forward(*w, obs);
    for (std::size_t k = 0; k < got.size(); ++k) worst = std::max(worst, std::abs(got[k] - want[k]));
  }
  v.require(worst <= kInferenceTol, "reference forward pass");

  double worst_perm = 0.0;
  for (int trial = 0; trial < 50; ++trial) {
    const auto w = init_weights(testing::random_network_shape(g, 6, OutputKind::action), 7100 + trial);
    auto obs = testing::random_observation(g, 6, draw_int(g, 2, 5), draw_int(g, 1, 5), 6);
    obs.query_index = 0;
    auto dyn = testing::split_polylines(obs.dynamic_rows, obs.dynamic, 6);
    auto sta = testing::split_polylines(obs.static_rows, obs.statics, 5);
    std::shuffle(dyn.begin() + 1, dyn.end(), g);
    std::shuffle(sta.begin(), sta.end(), g);
    SerializedObservation perm;
    perm.dynamic_width = 6;
    for (const auto& p : dyn) {
      perm.dynamic_rows.push_back(static_cast<std::uint32_t>(p.size()));
      for (const auto& r : p) perm.dynamic.insert(perm.dynamic.end(), r.begin(), r.end());
    }
    for (const auto& p : sta) {
      perm.static_rows.push_back(static_cast<std::uint32_t>(p.size()));
      for (const auto& r : p) perm.statics.insert(perm.statics.end(), r.begin(), r.end());
    }
    const auto a = encode_observation(obs, *w), b = encode_observation(perm, *w);
    for (std::size_t k = 0; k < a.size(); ++k) worst_perm = std::max(worst_perm, std::abs(a[k] - b[k]));
  }
  v.require(worst_perm <= kPermutationTol, "permutation invariance");

  // bounds, through the public act paths on a live world
  auto scenario = testing::bundled(ScenarioName::roundabout);
  WorldState world = reset(scenario, generate_cases(*scenario, 1, 70, SvoUniform{}).front(), EnvMode::ego_vs_flow);
  for (int t = 0; t < 15; ++t) step(world, testing::uniform_actions(world, {5.0, 0.0}));
  SvoContext genuine;
  for (const AgentRecord& a : world.agents) genuine.genuine.push_back(a.genuine_svo);
  NetworkShape lower;
  lower.feature_dim = 8;
  lower.heads = 2;
  lower.vector_hidden = {8};
  lower.decoder_hidden = {8, 8};
  NetworkShape adv = lower;
  adv.input_width = 5;
  adv.output = OutputKind::svo;
  int outputs = 0;
  for (int trial = 0; trial < 40; ++trial) {
    const float factor = static_cast<float>(draw(g, 0.1, 60.0));
    const auto lw = testing::scaled_bundle(*init_weights(lower, 7200 + trial), factor);
    const PolicyHandle lp = PolicyHandle::neural_lower(lw);
    const PolicyHandle ap = PolicyHandle::neural_adversary(testing::scaled_bundle(*init_weights(adv, 7300 + trial), factor));
    for (const AgentRecord& a : world.agents) {
      if (!a.alive()) continue;
      const ObservationFrame obs = attach_context(build_observation(a.id, world),
                                                  communicate(CommFullyVisible{}, a.id, genuine, nullptr, 0, 30));
      const Action out = act(lp, a.id, world, &obs);
      v.require(out.v_ref >= 0.0 && out.v_ref <= lw->shape().v_max, "v_ref bound");
      v.require(std::abs(out.sigma) <= lw->shape().sigma_max, "sigma bound");
      ++outputs;
      if (a.id == 1) continue;
      const double svo = act_adversary(ap, build_adversary_observation(a.id, world));
      v.require(svo >= 0.0 && svo <= 90.0, "svo bound");
      ++outputs;
    }
  }

  const auto bytes = weights_to_bytes(*init_weights(NetworkShape{}, 7400));
  v.require(weights_to_bytes(*weights_from_bytes(bytes)) == bytes, "bitwise round trip");
  int rejected = 0, flips = 0;
  for (std::size_t at = 0; at < bytes.size(); at += 997, ++flips) {
    auto bad = bytes;
    bad[at] ^= 0x01;
    try {
      weights_from_bytes(bad);
    } catch (const WeightFormatError&) {
      ++rejected;
    }
  }
  v.require(rejected == flips, "corruption detected");
  v.detail << "max |ref - engine| = " << worst << " on 100 bundles, max permutation drift " << worst_perm << ", "
           << outputs << " outputs in bounds, " << rejected << "/" << flips << " corrupted files rejected";
  return v;
}

// ---------------------------------------------------------------------- P8

Verdict p8() {
  Verdict v;
  auto g = testing::rng(801);
  const ObservationFrame obs;
  constexpr double clip = 30.0;
  int replaced = 0, passed_through = 0;
  for (int i = 0; i < 10000; ++i) {
    SvoContext ctx;
    for (int k = draw_int(g, 2, 16); k > 0; --k) ctx.genuine.push_back(draw(g, 0.0, 90.0));
    const double mistaken = draw(g, 0.0, 90.0), dist = draw(g, 0.0, 2.0 * clip);
    const CommAdversarial adv{[mistaken](const ObservationFrame&) { return mistaken; }};
    const int receiver = draw_int(g, 2, static_cast<int>(ctx.genuine.size()));
    const DeliveredContext d = communicate(adv, receiver, ctx, &obs, dist, clip);
    for (std::size_t k = 1; k < ctx.genuine.size(); ++k) v.require(*d.entries[k] == ctx.genuine[k], "non-ego entry");
    if (dist > clip) {
      v.require(*d.entries[0] == ctx.genuine[0], "beyond clip radius");
      ++passed_through;
    } else {
      v.require(*d.entries[0] == mistaken, "ego entry replaced");
      ++replaced;
    }
    for (const auto& e : d.entries) v.require(e && *e >= 0.0 && *e <= 90.0, "delivered range");
  }
  v.detail << "10000 contexts: " << replaced << " ego entries replaced inside the clip radius, " << passed_through
           << " genuine beyond it";
  return v;
}

}  // namespace
}  // namespace sflow

int main(int argc, char** argv) {
  using namespace sflow;
  Options o;
  o.workers = std::max(1, omp_get_num_procs());
  std::string only;
  CLI::App app{"Acceptance checks"};
  app.add_option("--cases", o.cases, "Cases per scenario for P1/P2")->check(CLI::PositiveNumber);
  app.add_option("--seeds", o.seeds, "Seeds per case for P1/P2")->check(CLI::PositiveNumber);
  app.add_option("--only", only, "Comma-separated subset, e.g. P4,P8");
  CLI11_PARSE(app, argc, argv);

  std::set<std::string> wanted;
  std::stringstream ss(only);
  for (std::string id; std::getline(ss, id, ',');) wanted.insert(id);
  auto selected = [&](const std::string& id) { return wanted.empty() || wanted.count(id) > 0; };

  const std::vector<std::pair<std::string, std::string>> titles = {
      {"P1", "IDM flow purity"},     {"P2", "termination accounting"}, {"P3", "determinism and replay"},
      {"P4", "reward identities"},   {"P5", "IDM oracle"},             {"P6", "dynamics"},
      {"P7", "inference fidelity"},  {"P8", "adversary structure"}};

  std::optional<FlowBatches> batches;
  if (selected("P1") || selected("P2")) batches = run_flow_batches(o);

  bool all = true;
  for (const auto& [id, title] : titles) {
    if (!selected(id)) continue;
    Verdict v;
    try {
      if (id == "P1") v = p1(*batches, o);
      else if (id == "P2") v = p2(*batches);
      else if (id == "P3") v = p3(o);
      else if (id == "P4") v = p4();
      else if (id == "P5") v = p5();
      else if (id == "P6") v = p6();
      else if (id == "P7") v = p7();
      else v = p8();
    } catch (const std::exception& e) {
      v.pass = false;
      v.detail << "exception: " << e.what();
    }
    all = all && v.pass;
    std::cout << id << ' ' << (v.pass ? "PASS" : "FAIL") << "  " << title << ": " << v.detail.str() << std::endl;
  }
  return all ? 0 : 1;
}
