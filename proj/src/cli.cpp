#include "sflow/cli.hpp"

#include <omp.h>

#include <CLI11.hpp>
#include <fstream>
#include <iostream>
#include <mutex>
#include <sstream>

#include "sflow/idm.hpp"
#include "sflow/random.hpp"

namespace sflow {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

/// Failure while turning configuration into engine objects (exit 1).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

void reject_unknown(const json& j, std::initializer_list<const char*> known, const std::string& where) {
  for (const auto& [key, _] : j.items()) {
    if (std::none_of(known.begin(), known.end(), [&](const char* k) { return key == k; })) {
      throw ParseError("unknown key '" + where + key + "'");
    }
  }
}

template <typename T>
T field(const json& j, const char* key, const std::string& where) {
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    throw ParseError("field '" + where + key + "' is missing or has the wrong type");
  }
}

fs::path resolve(const fs::path& base, const std::string& p) {
  const fs::path path(p);
  return path.is_absolute() || base.empty() ? path : base / path;
}

FlowSpec parse_flow(const json& j, const fs::path& base, const std::string& where) {
  if (!j.is_object()) throw ParseError("field '" + where + "' must be an object");
  reject_unknown(j, {"policy", "comm_mode", "adversary_weights"}, where + ".");
  FlowSpec f;
  if (j.contains("policy")) f.policy.text = field<std::string>(j, "policy", where + ".");
  if (j.contains("comm_mode")) f.comm_mode = field<std::string>(j, "comm_mode", where + ".");
  if (j.contains("adversary_weights")) {
    f.adversary_weights = resolve(base, field<std::string>(j, "adversary_weights", where + "."));
  }
  if (f.policy.text.rfind("neural:", 0) == 0) {
    f.policy.text = "neural:" + resolve(base, f.policy.text.substr(7)).string();
  }
  return f;
}

json flow_to_json(const FlowSpec& f) {
  json j = {{"policy", f.policy.text}, {"comm_mode", f.comm_mode}};
  if (f.adversary_weights) j["adversary_weights"] = f.adversary_weights->string();
  return j;
}

int default_workers() { return std::max(1, omp_get_num_procs()); }

fs::path output_dir(const RunConfig& cfg, const std::optional<std::string>& flag) {
  if (flag) return *flag;
  if (cfg.output_dir) return *cfg.output_dir;
  if (const char* env = std::getenv("SFLOW_OUTPUT_DIR")) return env;
  return "sflow_out";
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
}

std::uint64_t config_hash(const json& config) { return fnv1a(config.dump()); }

std::vector<CaseSpec> load_cases(const RunConfig& cfg, const ScenarioSpec& scenario, json& provenance) {
  if (cfg.cases.file) {
    CaseFile file = load_case_file(*cfg.cases.file);
    if (file.scenario != scenario.name) {
      throw ConfigError("case file " + cfg.cases.file->string() + " is for " + std::string(to_string(file.scenario)));
    }
    for (const CaseSpec& c : file.cases) validate_case(c, scenario);
    std::ifstream in(*cfg.cases.file, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    provenance = {{"file", cfg.cases.file->string()}, {"content_hash", fnv1a(ss.str())}};
    return file.cases;
  }
  CaseGenOptions opt;
  opt.agent_count = cfg.cases.agents;
  provenance = {{"n", cfg.cases.n}, {"seed", cfg.cases.seed}, {"svo", cfg.cases.svo}};
  return generate_cases(scenario, cfg.cases.n, cfg.cases.seed, parse_svo_mode(cfg.cases.svo), opt);
}

json seeds_json(const std::vector<EpisodeLog>& logs) {
  json seeds = json::array();
  for (const EpisodeLog& l : logs) seeds.push_back({l.case_id, l.repeat, l.seed});
  return seeds;
}

json manifest(const std::string& command, const json& config, const json& extra) {
  json m = {{"engine_version", kEngineVersion},
            {"command", command},
            {"config_hash", config_hash(config)},
            {"config", config},
            {"idm_degenerate_gaps", idm_degenerate_gap_count()}};
  for (const auto& [k, v] : extra.items()) m[k] = v;
  return m;
}

struct Common {
  std::optional<std::string> output;
  std::optional<int> workers;
  std::optional<int> repeats;
  std::optional<std::uint64_t> seed;
  bool log_steps = false;
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("--output-dir", c.output, "Directory for all outputs");
  cmd->add_option("--workers", c.workers, "Parallel episodes (default: available cores)")->check(CLI::PositiveNumber);
  cmd->add_option("--repeats", c.repeats, "Seeds per case")->check(CLI::PositiveNumber);
  cmd->add_option("--seed", c.seed, "Master seed for episode seeds");
  cmd->add_flag("--log-steps", c.log_steps, "Write one dense log per episode");
}

void apply_common(RunConfig& cfg, const Common& c) {
  if (c.workers) cfg.workers = *c.workers;
  if (c.repeats) cfg.repeats = *c.repeats;
  if (c.seed) cfg.master_seed = *c.seed;
  if (c.log_steps) cfg.log_steps = true;
}

struct Prepared {
  std::shared_ptr<const ScenarioSpec> scenario;
  std::vector<CaseSpec> cases;
  json case_provenance;
  fs::path out_dir;
  int workers = 1;
};

Prepared prepare(const RunConfig& cfg, const Common& common) {
  Prepared p;
  try {
    p.scenario = load_scenario_file(resolve_scenario_path(cfg.scenario));
  } catch (const std::exception& e) {
    throw ConfigError(std::string("scenario: ") + e.what());
  }
  try {
    p.cases = load_cases(cfg, *p.scenario, p.case_provenance);
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigError(std::string("cases: ") + e.what());
  }
  p.out_dir = output_dir(cfg, common.output);
  p.workers = cfg.workers.value_or(default_workers());
  return p;
}

EpisodeSink log_sink(const RunConfig& cfg, const fs::path& dir, const std::string& prefix) {
  if (!cfg.log_steps) return {};
  fs::create_directories(dir);
  const std::string ext = cfg.log_gzip ? ".ndjson.gz" : ".ndjson";
  return [dir, prefix, ext](const EpisodeLog& log) {
    save_episode_log(dir / (prefix + "case" + std::to_string(log.case_id) + "_rep" + std::to_string(log.repeat) + ext),
                     log);
  };
}

RolloutSpec base_spec(const RunConfig& cfg, const Prepared& p) {
  RolloutSpec spec;
  spec.scenario = p.scenario;
  spec.config = cfg.episode;
  spec.record_steps = cfg.log_steps;
  return spec;
}

int cmd_gen_cases(const std::string& scenario_arg, int n, std::uint64_t seed, const std::string& svo,
                  std::optional<int> agents, const std::optional<std::string>& out_file,
                  const std::optional<std::string>& out_dir_flag, std::ostream& out) {
  std::shared_ptr<const ScenarioSpec> scenario;
  SvoMode mode;
  try {
    scenario = load_scenario_file(resolve_scenario_path(scenario_arg));
    mode = parse_svo_mode(svo);
  } catch (const std::exception& e) {
    throw ConfigError(e.what());
  }
  if (n < 1) throw ConfigError("--n must be >= 1");
  CaseGenOptions opt;
  opt.agent_count = agents;
  CaseFile file;
  file.scenario = scenario->name;
  file.master_seed = seed;
  file.svo_mode = to_string(mode);
  file.cases = generate_cases(*scenario, n, seed, mode, opt);

  RunConfig defaults;
  const fs::path dir = output_dir(defaults, out_dir_flag);
  const fs::path target = out_file ? fs::path(*out_file)
                                   : dir / ("cases_" + std::string(to_string(scenario->name)) + "_n" +
                                            std::to_string(n) + "_seed" + std::to_string(seed) + ".json");
  if (target.has_parent_path()) fs::create_directories(target.parent_path());
  const std::string text = serialize_cases(file);
  write_text(target, text);
  const json config = {{"scenario", to_string(scenario->name)}, {"n", n},     {"seed", seed},
                       {"svo", file.svo_mode},                  {"agents", agents ? json(*agents) : json(nullptr)}};
  write_text(fs::path(target.string() + ".manifest.json"),
             manifest("gen-cases", config,
                      {{"scenario_hash", scenario->content_hash}, {"output", target.string()},
                       {"output_hash", fnv1a(text)}})
                     .dump(2));
  out << "wrote " << n << " cases to " << target.string() << '\n';
  return kExitOk;
}

int cmd_rollout(const std::string& config_path, const Common& common, std::ostream& out) {
  RunConfig cfg;
  Prepared p;
  RolloutSpec spec;
  try {
    cfg = load_run_config(config_path);
    apply_common(cfg, common);
    p = prepare(cfg, common);
    spec = base_spec(cfg, p);
    spec.mode = cfg.mode;
    spec.flow_policy = make_policy(cfg.flow.policy);
    spec.comm_mode = make_comm_mode(cfg.flow);
    spec.comm_label = cfg.flow.comm_mode;
    if (cfg.ego) spec.ego_policy = make_policy(*cfg.ego);
    if (cfg.mode == EnvMode::ego_vs_flow && !cfg.ego) throw ConfigError("mode ego_vs_flow needs an 'ego' policy");
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigError(e.what());
  }

  fs::create_directories(p.out_dir);
  const auto logs = run_batch(p.cases, spec, cfg.repeats, cfg.master_seed, p.workers,
                              log_sink(cfg, p.out_dir / "episodes", ""));
  const MetricsReport report = aggregate_metrics(logs, cfg.scope, cfg.efficiency);
  const std::string label = cfg.flow.policy.text;
  const std::string table = metrics_table({{label, report}});
  write_text(p.out_dir / "metrics.txt", table);
  write_text(p.out_dir / "metrics.csv", metrics_csv_header() + "\n" + metrics_csv_row(label, report) + "\n");
  {
    std::ofstream ep(p.out_dir / "episodes.csv");
    write_episode_csv(ep, logs, cfg.scope);
  }
  const json config = run_config_to_json(cfg);
  write_text(p.out_dir / "manifest.json",
             manifest("rollout", config,
                      {{"scenario_hash", p.scenario->content_hash},
                       {"cases", p.case_provenance},
                       {"workers", p.workers},
                       {"episodes", logs.size()},
                       {"seeds", seeds_json(logs)}})
                     .dump(2));
  out << table;
  out << "timeout " << report.timeout.value << "%, safety " << report.safety.value << "%, mean speed "
      << report.mean_speed.value << " m/s over " << report.episode_count << " episodes\n";
  return kExitOk;
}

int cmd_evaluate(const std::string& config_path, const std::string& ego_weights, const std::string& flows_arg,
                 const Common& common, std::ostream& out) {
  RunConfig cfg;
  Prepared p;
  PolicyHandle ego;
  std::vector<std::pair<std::string, FlowSpec>> flows;
  try {
    cfg = load_run_config(config_path);
    apply_common(cfg, common);
    p = prepare(cfg, common);
    ego = make_policy({ego_weights == "idm" ? "idm" : "neural:" + ego_weights});
    std::stringstream ss(flows_arg);
    std::string name;
    while (std::getline(ss, name, ',')) {
      if (name.empty()) continue;
      auto it = cfg.flows.find(name);
      if (it == cfg.flows.end()) throw ConfigError("--flows: no flow named '" + name + "' under 'flows'");
      flows.emplace_back(name, it->second);
    }
    if (flows.empty()) throw ConfigError("--flows names no flows");
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigError(e.what());
  }

  fs::create_directories(p.out_dir);
  std::vector<std::pair<std::string, MetricsReport>> rows;
  json runs = json::object();
  for (const auto& [name, flow] : flows) {
    RolloutSpec spec = base_spec(cfg, p);
    spec.mode = EnvMode::ego_vs_flow;
    try {
      spec.flow_policy = make_policy(flow.policy);
      spec.comm_mode = make_comm_mode(flow);
    } catch (const std::exception& e) {
      throw ConfigError("flows." + name + ": " + e.what());
    }
    spec.comm_label = flow.comm_mode;
    spec.ego_policy = ego;
    const auto logs = run_batch(p.cases, spec, cfg.repeats, cfg.master_seed, p.workers,
                                log_sink(cfg, p.out_dir / "episodes", name + "_"));
    rows.emplace_back(name, aggregate_metrics(logs, MetricScope::ego_only, cfg.efficiency));
    std::ofstream ep(p.out_dir / ("episodes_" + name + ".csv"));
    write_episode_csv(ep, logs, MetricScope::ego_only);
    runs[name] = {{"episodes", logs.size()}, {"seeds", seeds_json(logs)}};
  }
  const std::string table = metrics_table(rows);
  std::string csv = metrics_csv_header() + "\n";
  for (const auto& [name, r] : rows) csv += metrics_csv_row(name, r) + "\n";
  write_text(p.out_dir / "evaluate.txt", table);
  write_text(p.out_dir / "evaluate.csv", csv);
  json config = run_config_to_json(cfg);
  config["ego_weights"] = ego_weights;
  config["evaluated_flows"] = flows_arg;
  write_text(p.out_dir / "manifest.json",
             manifest("evaluate", config,
                      {{"scenario_hash", p.scenario->content_hash},
                       {"cases", p.case_provenance},
                       {"workers", p.workers},
                       {"runs", runs}})
                     .dump(2));
  out << table;
  return kExitOk;
}

int cmd_replay(const std::string& log_path, const std::optional<std::string>& scenario_arg,
               std::optional<int> dump_step, std::ostream& out) {
  EpisodeLog log;
  std::shared_ptr<const ScenarioSpec> scenario;
  try {
    log = load_episode_log(log_path);
    scenario = load_scenario_file(resolve_scenario_path(scenario_arg.value_or(log.scenario)));
  } catch (const std::exception& e) {
    throw ConfigError(e.what());
  }
  if (dump_step) {
    auto it = std::find_if(log.steps.begin(), log.steps.end(), [&](const StepRecord& s) { return s.step == *dump_step; });
    if (it == log.steps.end()) throw ConfigError("--dump-step: log has no step " + std::to_string(*dump_step));
    EpisodeLog one = log;
    one.steps = {*it};
    std::ostringstream s;
    write_episode_log(s, one);
    std::string line;
    std::istringstream lines(s.str());
    std::getline(lines, line);  // header
    std::getline(lines, line);  // the step
    out << json::parse(line).dump(2) << '\n';
  }
  const ReplayReport r = replay_episode(log, scenario);
  out << "replayed " << r.steps << " steps of case " << log.case_id << " repeat " << log.repeat << ": "
      << r.mismatches << " mismatching steps, final state " << (r.final_fingerprint_matches ? "matches" : "differs")
      << '\n';
  if (r.first_mismatch_step) out << "first mismatch at step " << *r.first_mismatch_step << '\n';
  return r.mismatches == 0 && r.final_fingerprint_matches ? kExitOk : kExitRuntime;
}

int cmd_compare(const std::string& a_path, const std::string& b_path, std::ostream& out) {
  std::vector<EpisodeRow> a, b;
  try {
    std::ifstream fa(a_path), fb(b_path);
    if (!fa) throw ConfigError("cannot open " + a_path);
    if (!fb) throw ConfigError("cannot open " + b_path);
    a = read_episode_csv(fa);
    b = read_episode_csv(fb);
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigError(e.what());
  }
  const auto diffs = paired_compare(a, b);
  out << "paired differences (b - a), normal-approximation 95% intervals (approximate)\n";
  for (const PairedDifference& d : diffs) {
    out << "  " << d.metric << ": " << d.mean_diff << " ± " << d.ci95 << " over " << d.pairs << " pairs\n";
  }
  return kExitOk;
}

}  // namespace

// ------------------------------------------------------------------- config

RunConfig parse_run_config(const json& j, const fs::path& base) {
  if (!j.is_object()) throw ParseError("run configuration must be a JSON object");
  reject_unknown(j,
                 {"scenario", "cases", "repeats", "master_seed", "mode", "flow", "flows", "ego", "reward", "episode",
                  "metrics", "log", "output_dir", "workers"},
                 "");
  RunConfig c;
  if (j.contains("scenario")) {
    const auto s = field<std::string>(j, "scenario", "");
    const fs::path as_path = resolve(base, s);
    c.scenario = fs::exists(as_path) ? as_path.string() : s;
  }
  if (j.contains("cases")) {
    const json& cs = j.at("cases");
    if (cs.is_string()) {
      c.cases.file = resolve(base, cs.get<std::string>());
    } else if (cs.is_object()) {
      reject_unknown(cs, {"n", "seed", "svo", "agents"}, "cases.");
      if (cs.contains("n")) c.cases.n = field<int>(cs, "n", "cases.");
      if (cs.contains("seed")) c.cases.seed = field<std::uint64_t>(cs, "seed", "cases.");
      if (cs.contains("svo")) c.cases.svo = field<std::string>(cs, "svo", "cases.");
      if (cs.contains("agents")) c.cases.agents = field<int>(cs, "agents", "cases.");
      if (c.cases.n < 1) throw ParseError("field 'cases.n' must be >= 1");
      try {
        parse_svo_mode(c.cases.svo);
      } catch (const std::exception& e) {
        throw ParseError(std::string("field 'cases.svo': ") + e.what());
      }
    } else {
      throw ParseError("field 'cases' must be a file path or an object");
    }
  }
  if (j.contains("repeats")) c.repeats = field<int>(j, "repeats", "");
  if (c.repeats < 1) throw ParseError("field 'repeats' must be >= 1");
  if (j.contains("master_seed")) c.master_seed = field<std::uint64_t>(j, "master_seed", "");
  if (j.contains("mode")) {
    const auto m = field<std::string>(j, "mode", "");
    if (m == "flow") c.mode = EnvMode::flow;
    else if (m == "ego_vs_flow") c.mode = EnvMode::ego_vs_flow;
    else throw ParseError("field 'mode' must be flow or ego_vs_flow");
  }
  if (j.contains("flow")) c.flow = parse_flow(j.at("flow"), base, "flow");
  if (j.contains("flows")) {
    if (!j.at("flows").is_object()) throw ParseError("field 'flows' must be an object");
    for (const auto& [name, f] : j.at("flows").items()) c.flows[name] = parse_flow(f, base, "flows." + name);
  }
  if (j.contains("ego")) {
    std::string e = field<std::string>(j, "ego", "");
    if (e.rfind("neural:", 0) == 0) e = "neural:" + resolve(base, e.substr(7)).string();
    c.ego = PolicySpec{e};
  }
  json episode = j.value("episode", json::object());
  if (!episode.is_object()) throw ParseError("field 'episode' must be an object");
  if (j.contains("reward")) {
    if (episode.contains("reward")) throw ParseError("give 'reward' either at top level or under 'episode'");
    episode["reward"] = j.at("reward");
  }
  c.episode = episode_config_from_json(episode);
  if (j.contains("metrics")) {
    const json& m = j.at("metrics");
    reject_unknown(m, {"efficiency", "scope"}, "metrics.");
    if (m.contains("efficiency")) {
      const auto e = field<std::string>(m, "efficiency", "metrics.");
      if (e == "normalized_speed") c.efficiency = EfficiencyMode::normalized_speed;
      else if (e == "raw_speed") c.efficiency = EfficiencyMode::raw_speed;
      else throw ParseError("field 'metrics.efficiency' must be normalized_speed or raw_speed");
    }
    if (m.contains("scope")) {
      const auto s = field<std::string>(m, "scope", "metrics.");
      if (s == "flow") c.scope = MetricScope::flow;
      else if (s == "ego_only") c.scope = MetricScope::ego_only;
      else throw ParseError("field 'metrics.scope' must be flow or ego_only");
    }
  }
  if (j.contains("log")) {
    const json& l = j.at("log");
    reject_unknown(l, {"steps", "gzip"}, "log.");
    if (l.contains("steps")) c.log_steps = field<bool>(l, "steps", "log.");
    if (l.contains("gzip")) c.log_gzip = field<bool>(l, "gzip", "log.");
  }
  if (j.contains("output_dir")) c.output_dir = resolve(base, field<std::string>(j, "output_dir", ""));
  if (j.contains("workers")) {
    c.workers = field<int>(j, "workers", "");
    if (*c.workers < 1) throw ParseError("field 'workers' must be >= 1");
  }
  return c;
}

RunConfig load_run_config(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open config " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw ParseError("config " + path.string() + " is not valid JSON: " + e.what());
  }
  return parse_run_config(j, path.parent_path());
}

json run_config_to_json(const RunConfig& c) {
  json cases;
  if (c.cases.file) {
    cases = c.cases.file->string();
  } else {
    cases = {{"n", c.cases.n}, {"seed", c.cases.seed}, {"svo", c.cases.svo}};
    if (c.cases.agents) cases["agents"] = *c.cases.agents;
  }
  json flows = json::object();
  for (const auto& [name, f] : c.flows) flows[name] = flow_to_json(f);
  json j = {{"scenario", c.scenario},
            {"cases", cases},
            {"repeats", c.repeats},
            {"master_seed", c.master_seed},
            {"mode", to_string(c.mode)},
            {"flow", flow_to_json(c.flow)},
            {"flows", flows},
            {"episode", episode_config_to_json(c.episode)},
            {"metrics",
             {{"efficiency", c.efficiency == EfficiencyMode::normalized_speed ? "normalized_speed" : "raw_speed"},
              {"scope", c.scope == MetricScope::flow ? "flow" : "ego_only"}}},
            {"log", {{"steps", c.log_steps}, {"gzip", c.log_gzip}}}};
  if (c.ego) j["ego"] = c.ego->text;
  return j;
}

PolicyHandle make_policy(const PolicySpec& spec) {
  const std::string& t = spec.text;
  if (t == "idm") return PolicyHandle::idm();
  if (t.rfind("constant:", 0) == 0) {
    const std::string body = t.substr(9);
    const auto comma = body.find(',');
    if (comma == std::string::npos) throw ParseError("constant policy must read constant:V,S");
    try {
      return PolicyHandle::constant_action({std::stod(body.substr(0, comma)), std::stod(body.substr(comma + 1))});
    } catch (const std::logic_error&) {
      throw ParseError("constant policy must read constant:V,S");
    }
  }
  if (t.rfind("neural:", 0) == 0) return PolicyHandle::neural_lower(load_weights(t.substr(7)));
  throw ParseError("unknown policy '" + t + "' (expected idm, constant:V,S or neural:PATH)");
}

CommMode make_comm_mode(const FlowSpec& flow) {
  const std::string& m = flow.comm_mode;
  if (m == "fully_visible") return CommFullyVisible{};
  if (m == "self_visible") return CommSelfVisible{};
  if (m.rfind("constant:", 0) == 0) {
    double c0;
    try {
      c0 = std::stod(m.substr(9));
    } catch (const std::logic_error&) {
      throw ParseError("comm_mode constant must read constant:C");
    }
    if (!(c0 >= 0.0 && c0 <= 90.0)) throw ParseError("comm_mode constant must lie in [0, 90]");
    return CommConstant{c0};
  }
  if (m == "adversarial") {
    if (!flow.adversary_weights) throw ParseError("comm_mode adversarial needs 'adversary_weights'");
    const PolicyHandle adv = PolicyHandle::neural_adversary(load_weights(*flow.adversary_weights));
    return CommAdversarial{[adv](const ObservationFrame& obs) { return act_adversary(adv, obs); }};
  }
  throw ParseError("unknown comm_mode '" + m + "'");
}

// ----------------------------------------------------------------- dispatch

int dispatch(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Traffic-flow simulation and evaluation", "sflow"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kEngineVersion);

  std::string scenario, svo = "uniform";
  int n = 0;
  std::uint64_t seed = 0;
  std::optional<int> agents;
  std::optional<std::string> out_file, gen_dir;
  auto* gen = app.add_subcommand("gen-cases", "Generate a reproducible case file");
  gen->add_option("--scenario", scenario, "Bundled scenario name or scenario file")->required();
  gen->add_option("--n", n, "Number of cases")->required();
  gen->add_option("--seed", seed, "Master seed")->required();
  gen->add_option("--svo", svo, "uniform | fixed:C");
  gen->add_option("--agents", agents, "Agents per case (default: scenario default)");
  gen->add_option("--out", out_file, "Case file to write");
  gen->add_option("--output-dir", gen_dir, "Directory for the case file when --out is absent");

  std::string config;
  Common rollout_common;
  auto* rollout = app.add_subcommand("rollout", "Run a traffic flow and report flow metrics");
  rollout->add_option("--config", config, "Run configuration (JSON)")->required();
  add_common(rollout, rollout_common);

  std::string ego_weights, flows;
  Common eval_common;
  auto* evaluate = app.add_subcommand("evaluate", "Evaluate an ego policy inside named flows");
  evaluate->add_option("--config", config, "Run configuration (JSON)")->required();
  evaluate->add_option("--ego-weights", ego_weights, "Ego weight file, or 'idm'")->required();
  evaluate->add_option("--flows", flows, "Comma-separated names from the config's 'flows'")->required();
  add_common(evaluate, eval_common);

  std::string log_path;
  std::optional<std::string> replay_scenario;
  std::optional<int> dump_step;
  auto* replay = app.add_subcommand("replay", "Re-execute an episode log and check it bitwise");
  replay->add_option("--log", log_path, "Episode log (.ndjson or .ndjson.gz)")->required();
  replay->add_option("--scenario", replay_scenario, "Scenario override (default: from the log)");
  replay->add_option("--dump-step", dump_step, "Print the record of one step");

  std::string a_path, b_path;
  auto* compare = app.add_subcommand("compare", "Paired comparison of two episode tables");
  compare->add_option("--a", a_path, "Baseline episodes.csv")->required();
  compare->add_option("--b", b_path, "Candidate episodes.csv")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForVersion&) {
    out << kEngineVersion << '\n';
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n" << app.help();
    return kExitConfig;
  }

  try {
    if (gen->parsed()) return cmd_gen_cases(scenario, n, seed, svo, agents, out_file, gen_dir, out);
    if (rollout->parsed()) return cmd_rollout(config, rollout_common, out);
    if (evaluate->parsed()) return cmd_evaluate(config, ego_weights, flows, eval_common, out);
    if (replay->parsed()) return cmd_replay(log_path, replay_scenario, dump_step, out);
    if (compare->parsed()) return cmd_compare(a_path, b_path, out);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    err << "runtime error: " << e.what() << '\n';
    return kExitRuntime;
  }
  return kExitConfig;
}

}  // namespace sflow
