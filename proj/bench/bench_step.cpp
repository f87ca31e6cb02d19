// Serial reference kernels against their OpenMP counterparts.
//
//   ./bench_step --benchmark_filter=Step
//   OMP_NUM_THREADS=4 ./bench_step

#include <benchmark/benchmark.h>

#include <numeric>

#include <omp.h>

#include "sflow/rollout.hpp"

namespace {

using namespace sflow;

constexpr ScenarioName kScenarios[] = {ScenarioName::intersection, ScenarioName::bottleneck, ScenarioName::merge,
                                       ScenarioName::roundabout};

std::shared_ptr<const ScenarioSpec> scenario(int index) {
  return load_scenario_file(resolve_scenario_path(std::string(to_string(kScenarios[index]))));
}

// A mid-episode world (30 IDM steps in) and the IDM joint action for its next step.
struct Snapshot {
  WorldState world;
  JointAction actions;
};

Snapshot snapshot(int index, int agents) {
  auto s = scenario(index);
  CaseGenOptions opt;
  if (agents > 0) opt.agent_count = agents;
  Snapshot snap{reset(s, generate_cases(*s, 1, 3, SvoUniform{}, opt).front(), EnvMode::flow), {}};
  const PolicyHandle idm = PolicyHandle::idm();
  auto decide = [&] {
    JointAction a(snap.world.agents.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
      if (snap.world.agents[i].alive()) a[i] = act(idm, snap.world.agents[i].id, snap.world, nullptr);
    }
    return a;
  };
  for (int t = 0; t < 30 && !snap.world.done; ++t) step(snap.world, decide());
  snap.actions = decide();
  return snap;
}

void set_labels(benchmark::State& state, const Snapshot& snap) {
  state.SetLabel(std::string(to_string(kScenarios[state.range(0)])) + ", " +
                 std::to_string(snap.world.agents.size()) + " agents");
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(snap.world.agents.size()));
}

void BM_StepReference(benchmark::State& state) {
  const Snapshot snap = snapshot(static_cast<int>(state.range(0)), static_cast<int>(state.range(1)));
  std::vector<int> order(snap.world.agents.size());
  std::iota(order.begin(), order.end(), 0);
  for (auto _ : state) {
    WorldState w = snap.world;
    benchmark::DoNotOptimize(step_reference(w, snap.actions, order));
  }
  set_labels(state, snap);
}

void BM_StepParallel(benchmark::State& state) {
  const Snapshot snap = snapshot(static_cast<int>(state.range(0)), static_cast<int>(state.range(1)));
  for (auto _ : state) {
    WorldState w = snap.world;
    benchmark::DoNotOptimize(step(w, snap.actions, Execution::parallel));
  }
  set_labels(state, snap);
  state.counters["threads"] = omp_get_max_threads();
}

void step_args(benchmark::internal::Benchmark* b) {
  for (int s = 0; s < 4; ++s) b->Args({s, 0});
  b->Args({0, 24});  // crowded intersection
  b->ArgNames({"scenario", "agents"});
}

// Snapshot::agents = 0 falls back to the scenario default.
BENCHMARK(BM_StepReference)->Apply(step_args);
BENCHMARK(BM_StepParallel)->Apply(step_args);

void run_episode_bench(benchmark::State& state, Execution exec) {
  RolloutSpec spec;
  spec.scenario = scenario(static_cast<int>(state.range(0)));
  spec.config.max_steps = 100;
  spec.flow_policy = PolicyHandle::idm();
  spec.execution = exec;
  const CaseSpec c = generate_cases(*spec.scenario, 1, 4, SvoUniform{}).front();
  long steps = 0;
  for (auto _ : state) {
    const EpisodeLog log = run_episode(c, spec, 1);
    steps += log.step_count;
  }
  state.counters["steps/s"] = benchmark::Counter(static_cast<double>(steps), benchmark::Counter::kIsRate);
}

void BM_EpisodeSerial(benchmark::State& state) { run_episode_bench(state, Execution::serial); }
void BM_EpisodeParallel(benchmark::State& state) { run_episode_bench(state, Execution::parallel); }
BENCHMARK(BM_EpisodeSerial)->DenseRange(0, 3)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_EpisodeParallel)->DenseRange(0, 3)->Unit(benchmark::kMillisecond);

// Episode-level parallelism: the same 16 episodes on 1 worker or on every core.
void BM_Batch(benchmark::State& state) {
  RolloutSpec spec;
  spec.scenario = scenario(0);
  spec.config.max_steps = 100;
  spec.flow_policy = PolicyHandle::idm();
  const auto cases = generate_cases(*spec.scenario, 8, 5, SvoUniform{});
  const int workers = state.range(0) == 0 ? 1 : std::max(1, omp_get_num_procs());
  for (auto _ : state) benchmark::DoNotOptimize(run_batch(cases, spec, 2, 1, workers));
  state.counters["workers"] = workers;
  state.SetItemsProcessed(state.iterations() * 16);
}
BENCHMARK(BM_Batch)->Arg(0)->Arg(1)->ArgName("all_cores")->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
