#include "sflow/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include "json.hpp"
#include <set>
#include <sstream>

#include "sflow/random.hpp"

namespace sflow {

using nlohmann::json;

namespace {

constexpr double kSlotTolerance = 1e-3;

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

template <typename T>
T get_field(const json& j, const char* key) {
  if (!j.contains(key)) throw ParseError(std::string("missing field '") + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ParseError(std::string("field '") + key + "': " + e.what());
  }
}

void reject_unknown(const json& j, std::initializer_list<const char*> known, const char* where) {
  for (const auto& [key, _] : j.items()) {
    if (std::none_of(known.begin(), known.end(), [&](const char* k) { return key == k; })) {
      throw ParseError(std::string("unknown key '") + key + "' in " + where);
    }
  }
}

StaticPolyline parse_polyline(const json& j, PolylineKind kind) {
  StaticPolyline line;
  line.kind = kind;
  line.id = get_field<int>(j, "id");
  for (const auto& v : get_field<json>(j, "vectors")) {
    if (!v.is_array() || v.size() != 5) throw ParseError("static vector must have 5 entries");
    line.vectors.push_back({v[0].get<double>(), v[1].get<double>(), v[2].get<double>(),
                            v[3].get<double>(), v[4].get<int>()});
  }
  return line;
}

Polygon parse_polygon(const json& j) {
  std::vector<Vec2> pts;
  for (const auto& p : j) {
    if (!p.is_array() || p.size() != 2) throw ParseError("polygon vertex must be [x, y]");
    pts.push_back({p[0].get<double>(), p[1].get<double>()});
  }
  if (pts.size() < 3) throw ValidationError("polygon with fewer than 3 vertices");
  return Polygon(std::move(pts));
}

VehicleParams parse_vehicle(const json& j) {
  reject_unknown(j, {"length", "width", "wheelbase", "v_max", "sigma_max", "accel_max"},
                 "vehicle_params");
  VehicleParams p;
  p.length = get_field<double>(j, "length");
  p.width = get_field<double>(j, "width");
  p.wheelbase = get_field<double>(j, "wheelbase");
  p.v_max = get_field<double>(j, "v_max");
  p.sigma_max = get_field<double>(j, "sigma_max");
  p.accel_max = get_field<double>(j, "accel_max");
  return p;
}

IdmParams parse_idm(const json& j) {
  reject_unknown(j, {"v0", "time_gap_T", "s0", "delta", "a", "b"}, "idm");
  IdmParams p;
  p.v0 = j.value("v0", p.v0);
  p.time_gap_T = j.value("time_gap_T", p.time_gap_T);
  p.s0 = j.value("s0", p.s0);
  p.delta = j.value("delta", p.delta);
  p.a = j.value("a", p.a);
  p.b = j.value("b", p.b);
  return p;
}

void validate_polyline(const StaticPolyline& line, double max_spacing, const char* what) {
  const std::string name = std::string(what) + " " + std::to_string(line.id);
  if (line.vectors.empty()) throw ValidationError(name + ": polyline is empty");
  for (std::size_t i = 0; i < line.vectors.size(); ++i) {
    const auto& v = line.vectors[i];
    if (line.kind == PolylineKind::sideline && v.lane_width != 0.0) {
      throw ValidationError(name + ": sideline lane_width must be 0");
    }
    if (line.kind != PolylineKind::sideline && !(v.lane_width > 0.0)) {
      throw ValidationError(name + ": lane_width must be positive");
    }
    if (v.index_k < 0) throw ValidationError(name + ": index_k must be nonnegative");
    if (i > 0) {
      const auto& u = line.vectors[i - 1];
      if (v.index_k <= u.index_k) throw ValidationError(name + ": index_k not strictly increasing");
      if (std::hypot(v.x - u.x, v.y - u.y) > max_spacing + 1e-9) {
        throw ValidationError(name + ": vector spacing exceeds max_vector_spacing");
      }
    }
  }
}

/// Zone must be covered by the drivable union; checked on boundary samples every 0.5 m.
void validate_zone_inside_drivable(const ScenarioSpec& s) {
  const auto verts = s.interaction_zone.vertices();
  for (std::size_t i = 0; i < verts.size(); ++i) {
    const Vec2 a = verts[i];
    const Vec2 b = verts[(i + 1) % verts.size()];
    const int n = std::max(1, static_cast<int>(std::ceil(distance(a, b) / 0.5)));
    for (int k = 0; k <= n; ++k) {
      const double t = static_cast<double>(k) / n;
      if (!s.drivable(a + t * (b - a))) {
        throw ValidationError("interaction_zone not contained in drivable_area");
      }
    }
  }
}

double zone_exit_arclength(const ScenarioSpec& s, const Path& path, int id) {
  const auto pts = path.points();
  std::optional<std::size_t> last_inside;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    if (s.in_interaction_zone(pts[i])) last_inside = i;
  }
  if (!last_inside || *last_inside + 1 >= pts.size()) {
    throw ValidationError("candidate path " + std::to_string(id) + " does not exit the interaction zone");
  }
  // refine the crossing on the segment leaving the zone
  const std::size_t i = *last_inside;
  double lo = 0.0, hi = 1.0;
  const Vec2 a = pts[i], b = pts[i + 1];
  for (int it = 0; it < 60; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (s.in_interaction_zone(a + mid * (b - a))) lo = mid; else hi = mid;
  }
  return path.arclength_at(i) + hi * (path.arclength_at(i + 1) - path.arclength_at(i));
}

}  // namespace

std::string_view to_string(ScenarioName name) {
  switch (name) {
    case ScenarioName::intersection: return "intersection";
    case ScenarioName::bottleneck: return "bottleneck";
    case ScenarioName::merge: return "merge";
    case ScenarioName::roundabout: return "roundabout";
  }
  return "?";
}

ScenarioName scenario_name_from_string(std::string_view s) {
  for (auto n : {ScenarioName::intersection, ScenarioName::bottleneck, ScenarioName::merge,
                 ScenarioName::roundabout}) {
    if (to_string(n) == s) return n;
  }
  throw ParseError("unknown scenario name '" + std::string(s) + "'");
}

void VehicleParams::validate() const {
  if (!(length > 0.0) || !(width > 0.0)) throw ValidationError("vehicle extents must be positive");
  if (!(wheelbase > 0.0 && wheelbase < length)) throw ValidationError("vehicle requires 0 < wheelbase < length");
  if (!(v_max > 0.0)) throw ValidationError("vehicle v_max must be positive");
  if (!(sigma_max > 0.0 && sigma_max < std::numbers::pi / 2)) {
    throw ValidationError("vehicle sigma_max must lie in (0, pi/2)");
  }
  if (!(accel_max > 0.0)) throw ValidationError("vehicle accel_max must be positive");
}

void IdmParams::validate() const {
  if (!(v0 > 0.0 && time_gap_T > 0.0 && s0 > 0.0 && a > 0.0 && b > 0.0)) {
    throw ValidationError("idm parameters must be strictly positive");
  }
  if (!(delta >= 1.0)) throw ValidationError("idm delta must be >= 1");
}

bool ScenarioSpec::drivable(Vec2 p) const {
  return std::any_of(drivable_area.begin(), drivable_area.end(),
                     [&](const Polygon& poly) { return poly.contains(p); });
}

std::shared_ptr<const ScenarioSpec> load_scenario(std::string_view document) {
  json doc;
  try {
    doc = json::parse(document);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("scenario document: ") + e.what());
  }
  if (!doc.is_object()) throw ParseError("scenario document must be an object");
  reject_unknown(doc,
                 {"format_version", "name", "default_agent_count", "max_vector_spacing",
                  "vehicle_params", "idm", "interaction_zone", "drivable_area", "centerlines",
                  "sidelines", "candidate_paths", "spawn_slots"},
                 "scenario document");
  if (get_field<int>(doc, "format_version") != 1) throw ParseError("unsupported format_version");

  auto spec = std::make_shared<ScenarioSpec>();
  spec->content_hash = fnv1a(document);
  spec->name = scenario_name_from_string(get_field<std::string>(doc, "name"));
  spec->default_agent_count = get_field<int>(doc, "default_agent_count");
  spec->max_vector_spacing = doc.value("max_vector_spacing", 2.0);
  for (const auto& v : get_field<json>(doc, "vehicle_params")) spec->vehicle_params.push_back(parse_vehicle(v));
  if (doc.contains("idm")) spec->idm = parse_idm(doc["idm"]);
  spec->interaction_zone = parse_polygon(get_field<json>(doc, "interaction_zone"));
  for (const auto& p : get_field<json>(doc, "drivable_area")) spec->drivable_area.push_back(parse_polygon(p));

  for (const auto& c : get_field<json>(doc, "centerlines")) {
    Lane lane;
    lane.polyline = parse_polyline(c, PolylineKind::centerline);
    spec->centerlines.push_back(std::move(lane));
  }
  for (const auto& c : get_field<json>(doc, "sidelines")) {
    spec->sidelines.push_back(parse_polyline(c, PolylineKind::sideline));
  }
  for (const auto& c : get_field<json>(doc, "candidate_paths")) {
    CandidatePath path;
    path.polyline = parse_polyline(c, PolylineKind::global_path);
    spec->candidate_paths.push_back(std::move(path));
  }
  for (const auto& s : get_field<json>(doc, "spawn_slots")) {
    const auto pose = get_field<std::vector<double>>(s, "pose");
    if (pose.size() != 3) throw ParseError("spawn slot pose must be [x, y, theta]");
    spec->spawn_slots.push_back({{pose[0], pose[1], pose[2]}, get_field<int>(s, "path"), 0.0});
  }

  // ---- invariants
  if (spec->vehicle_params.empty()) throw ValidationError("vehicle_params is empty");
  for (const auto& v : spec->vehicle_params) v.validate();
  spec->idm.validate();
  if (spec->default_agent_count < 1) throw ValidationError("default_agent_count must be >= 1");
  if (spec->centerlines.empty()) throw ValidationError("centerline list is empty");
  if (spec->candidate_paths.empty()) throw ValidationError("candidate path list is empty");
  if (spec->drivable_area.empty()) throw ValidationError("drivable_area is empty");

  for (auto& lane : spec->centerlines) {
    validate_polyline(lane.polyline, spec->max_vector_spacing, "centerline");
    if (lane.polyline.vectors.size() < 2) throw ValidationError("centerline needs >= 2 vectors");
    lane.geometry = Path::from_polyline(lane.polyline);
    lane.lane_width = lane.polyline.vectors.front().lane_width;
    const Aabb& b = lane.geometry.bounds();
    const double h = 0.5 * lane.lane_width;
    lane.corridor_bounds = {b.min_x - h, b.min_y - h, b.max_x + h, b.max_y + h};
  }
  for (const auto& line : spec->sidelines) validate_polyline(line, spec->max_vector_spacing, "sideline");

  validate_zone_inside_drivable(*spec);

  for (std::size_t i = 0; i < spec->candidate_paths.size(); ++i) {
    auto& path = spec->candidate_paths[i];
    if (path.polyline.id != static_cast<int>(i)) throw ValidationError("candidate path ids must be 0..n-1");
    validate_polyline(path.polyline, spec->max_vector_spacing, "candidate path");
    if (path.polyline.vectors.size() < 2) throw ValidationError("candidate path needs >= 2 vectors");
    path.geometry = Path::from_polyline(path.polyline);
    path.lane_width = path.polyline.vectors.front().lane_width;
    path.zone_exit_arclength = zone_exit_arclength(*spec, path.geometry, path.polyline.id);
  }

  std::vector<bool> has_slot(spec->candidate_paths.size(), false);
  for (auto& slot : spec->spawn_slots) {
    if (slot.path_id < 0 || slot.path_id >= static_cast<int>(spec->candidate_paths.size())) {
      throw ValidationError("spawn slot references unknown path " + std::to_string(slot.path_id));
    }
    if (!spec->drivable(slot.pose.position())) throw ValidationError("spawn slot outside drivable_area");
    const auto& path = spec->candidate_paths[slot.path_id];
    const auto proj = path.geometry.project(slot.pose.position());
    if (std::abs(proj.lateral_offset) > kSlotTolerance) {
      throw ValidationError("spawn slot does not lie on its candidate path");
    }
    if (proj.arclength >= path.zone_exit_arclength) {
      throw ValidationError("spawn slot lies past its path's interaction-zone exit");
    }
    slot.arclength = proj.arclength;
    has_slot[slot.path_id] = true;
  }
  for (std::size_t i = 0; i < has_slot.size(); ++i) {
    if (!has_slot[i]) throw ValidationError("candidate path " + std::to_string(i) + " has no spawn slot");
  }
  return spec;
}

std::shared_ptr<const ScenarioSpec> load_scenario_file(const std::filesystem::path& path) {
  return load_scenario(read_file(path));
}

std::filesystem::path resolve_scenario_path(const std::string& name_or_path) {
  std::filesystem::path p(name_or_path);
  if (std::filesystem::exists(p)) return p;
  std::vector<std::filesystem::path> roots;
  if (const char* env = std::getenv("SFLOW_ASSET_DIR")) roots.emplace_back(env);
#ifdef SFLOW_ASSET_DIR
  roots.emplace_back(SFLOW_ASSET_DIR);
#endif
  for (const auto& root : roots) {
    auto candidate = root / (name_or_path + ".json");
    if (std::filesystem::exists(candidate)) return candidate;
  }
  throw ParseError("scenario '" + name_or_path + "' is neither a file nor a bundled scenario");
}

// ---------------------------------------------------------------------- cases

OrientedBox footprint(const Pose2D& pose, const VehicleParams& params) {
  return {pose, params.length, params.width};
}

SvoMode parse_svo_mode(std::string_view text) {
  if (text == "uniform" || text == "uniform_0_90") return SvoUniform{};
  if (text.starts_with("fixed:")) {
    const std::string value(text.substr(6));
    char* end = nullptr;
    const double c = std::strtod(value.c_str(), &end);
    if (end == value.c_str() || *end != '\0' || !(c >= 0.0 && c <= 90.0)) {
      throw ParseError("fixed SVO must be a number of degrees in [0, 90]");
    }
    return SvoFixed{c};
  }
  throw ParseError("svo mode must be 'uniform' or 'fixed:C'");
}

std::string to_string(const SvoMode& mode) {
  if (std::holds_alternative<SvoUniform>(mode)) return "uniform_0_90";
  json c = std::get<SvoFixed>(mode).degrees;
  return "fixed:" + c.dump();
}

std::vector<CaseSpec> generate_cases(const ScenarioSpec& scenario, int n, std::uint64_t master_seed,
                                     const SvoMode& svo_mode, const CaseGenOptions& options) {
  if (n < 1) throw std::invalid_argument("generate_cases requires n >= 1");
  const int count = options.agent_count.value_or(scenario.default_agent_count);
  if (count < 1) throw std::invalid_argument("agent count must be >= 1");
  const VehicleParams& vehicle = scenario.vehicle_params.front();

  std::vector<CaseSpec> cases;
  cases.reserve(n);
  for (int case_id = 0; case_id < n; ++case_id) {
    CaseSpec c;
    c.case_id = case_id;
    c.scenario = scenario.name;
    c.seed = derive_seed(master_seed, static_cast<std::uint64_t>(case_id));
    std::mt19937_64 rng(c.seed);

    std::vector<std::size_t> free_slots(scenario.spawn_slots.size());
    for (std::size_t i = 0; i < free_slots.size(); ++i) free_slots[i] = i;
    std::vector<OrientedBox> placed;
    int attempts = 0;
    while (static_cast<int>(c.agents.size()) < count) {
      if (free_slots.empty() || ++attempts > options.max_attempts) {
        throw PlacementError("case " + std::to_string(case_id) + ": no collision-free placement for " +
                             std::to_string(count) + " agents in " +
                             std::to_string(options.max_attempts) + " attempts");
      }
      const std::size_t pick = uniform_index(rng, free_slots.size());
      const SpawnSlot& slot = scenario.spawn_slots[free_slots[pick]];
      const auto& path = scenario.candidate_paths[slot.path_id];
      const double s = std::clamp(slot.arclength + uniform(rng, -options.jitter, options.jitter), 0.0,
                                  path.zone_exit_arclength);
      const Pose2D pose = path.geometry.pose_at(s);
      const OrientedBox box = footprint(pose, vehicle);
      const bool clash = std::any_of(placed.begin(), placed.end(),
                                     [&](const OrientedBox& other) { return boxes_overlap(box, other); });
      if (clash) continue;
      free_slots.erase(free_slots.begin() + static_cast<std::ptrdiff_t>(pick));
      placed.push_back(box);
      const double svo = std::holds_alternative<SvoUniform>(svo_mode) ? 90.0 * uniform01(rng)
                                                                      : std::get<SvoFixed>(svo_mode).degrees;
      c.agents.push_back({slot.path_id, pose, 0.0, svo, 0});
    }
    cases.push_back(std::move(c));
  }
  return cases;
}

void validate_case(const CaseSpec& c, const ScenarioSpec& scenario) {
  if (c.scenario != scenario.name) throw ValidationError("case scenario does not match loaded scenario");
  if (c.agents.empty()) throw ValidationError("case has no agents");
  std::vector<OrientedBox> boxes;
  for (const auto& a : c.agents) {
    if (!(a.svo_deg >= 0.0 && a.svo_deg <= 90.0)) throw ValidationError("agent svo outside [0, 90]");
    if (a.path_id < 0 || a.path_id >= static_cast<int>(scenario.candidate_paths.size())) {
      throw ValidationError("agent references unknown path");
    }
    if (a.vehicle_id < 0 || a.vehicle_id >= static_cast<int>(scenario.vehicle_params.size())) {
      throw ValidationError("agent references unknown vehicle params");
    }
    const auto& vp = scenario.vehicle_params[a.vehicle_id];
    if (!(a.speed >= 0.0 && a.speed <= vp.v_max)) throw ValidationError("agent initial speed outside [0, v_max]");
    boxes.push_back(footprint(a.pose, vp));
  }
  for (std::size_t i = 0; i < boxes.size(); ++i) {
    for (std::size_t j = i + 1; j < boxes.size(); ++j) {
      if (boxes_overlap(boxes[i], boxes[j])) throw ValidationError("initial footprints overlap");
    }
  }
}

std::string serialize_cases(const CaseFile& file) {
  json doc;
  doc["format_version"] = 1;
  doc["scenario"] = std::string(to_string(file.scenario));
  doc["master_seed"] = file.master_seed;
  doc["svo_mode"] = file.svo_mode;
  json cases = json::array();
  for (const auto& c : file.cases) {
    json agents = json::array();
    for (const auto& a : c.agents) {
      agents.push_back({{"path", a.path_id},
                        {"pose", {a.pose.x, a.pose.y, a.pose.theta}},
                        {"speed", a.speed},
                        {"svo", a.svo_deg},
                        {"vehicle", a.vehicle_id}});
    }
    cases.push_back({{"case_id", c.case_id}, {"seed", c.seed}, {"agents", std::move(agents)}});
  }
  doc["cases"] = std::move(cases);
  return doc.dump(1) + "\n";
}

CaseFile parse_cases(std::string_view document) {
  json doc;
  try {
    doc = json::parse(document);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("case file: ") + e.what());
  }
  reject_unknown(doc, {"format_version", "scenario", "master_seed", "svo_mode", "cases"}, "case file");
  if (get_field<int>(doc, "format_version") != 1) throw ParseError("unsupported format_version");
  CaseFile file;
  file.scenario = scenario_name_from_string(get_field<std::string>(doc, "scenario"));
  file.master_seed = doc.value("master_seed", std::uint64_t{0});
  file.svo_mode = doc.value("svo_mode", std::string{});
  for (const auto& jc : get_field<json>(doc, "cases")) {
    reject_unknown(jc, {"case_id", "seed", "agents"}, "case");
    CaseSpec c;
    c.case_id = get_field<int>(jc, "case_id");
    c.seed = get_field<std::uint64_t>(jc, "seed");
    c.scenario = file.scenario;
    for (const auto& ja : get_field<json>(jc, "agents")) {
      reject_unknown(ja, {"path", "pose", "speed", "svo", "vehicle"}, "case agent");
      CaseAgent a;
      a.path_id = get_field<int>(ja, "path");
      const auto pose = get_field<std::vector<double>>(ja, "pose");
      if (pose.size() != 3) throw ParseError("agent pose must be [x, y, theta]");
      a.pose = {pose[0], pose[1], pose[2]};
      a.speed = get_field<double>(ja, "speed");
      a.svo_deg = get_field<double>(ja, "svo");
      a.vehicle_id = ja.value("vehicle", 0);
      c.agents.push_back(a);
    }
    file.cases.push_back(std::move(c));
  }
  return file;
}

CaseFile load_case_file(const std::filesystem::path& path) { return parse_cases(read_file(path)); }

}  // namespace sflow
