#include "sflow/observation.hpp"

#include <algorithm>
#include <bit>
#include <cstring>
#include <string>

namespace sflow {

static_assert(std::endian::native == std::endian::little, "byte layouts assume a little-endian host");

namespace {

constexpr char kObsMagic[4] = {'S', 'V', 'O', 'B'};
constexpr std::uint32_t kObsVersion = 1;

DynamicPolyline history_polyline(const AgentRecord& a, const Pose2D& frame) {
  DynamicPolyline line;
  line.agent_id = a.id;
  line.vectors.reserve(a.history.size());
  for (std::size_t h = 0; h < a.history.size(); ++h) {
    const VehicleState& s = a.history[h];
    const Pose2D local = transform_to_frame(s.pose, frame);
    line.vectors.push_back({local.x, local.y, local.theta, s.speed, static_cast<int>(h) + 1, std::nullopt});
  }
  return line;
}

void append_clipped(std::vector<StaticPolyline>& out, const StaticPolyline& src, PolylineKind kind, Vec2 center,
                    double radius, const Pose2D& frame) {
  StaticPolyline line;
  line.kind = kind;
  line.id = src.id;
  for (const StaticVector& v : src.vectors) {
    if (distance(Vec2{v.x, v.y}, center) > radius) continue;
    const Pose2D local = transform_to_frame({v.x, v.y, v.theta}, frame);
    line.vectors.push_back({local.x, local.y, local.theta, v.lane_width, v.index_k});
  }
  if (!line.vectors.empty()) out.push_back(std::move(line));
}

// Shared content rules: visibility and clipping around `observer`, coordinates in `frame`.
ObservationFrame assemble(const AgentRecord& observer, const WorldState& world, const Pose2D& frame,
                          const AgentRecord* forced) {
  const double radius = world.config.clip_radius;
  const Vec2 center = observer.state.pose.position();
  ObservationFrame obs;
  obs.frame = frame;
  obs.self_index = 0;
  obs.agent_polylines.push_back(history_polyline(observer, frame));
  for (const AgentRecord& other : world.agents) {
    if (other.id == observer.id || !other.alive()) continue;
    const bool is_forced = forced != nullptr && other.id == forced->id;
    if (!is_forced && distance(other.state.pose.position(), center) > radius) continue;
    if (is_forced) obs.ego_index = static_cast<int>(obs.agent_polylines.size());
    obs.agent_polylines.push_back(history_polyline(other, frame));
  }

  const ScenarioSpec& sc = *world.scenario;
  std::vector<const StaticPolyline*> centerlines;
  for (const Lane& lane : sc.centerlines) centerlines.push_back(&lane.polyline);
  std::vector<const StaticPolyline*> sidelines;
  for (const StaticPolyline& s : sc.sidelines) sidelines.push_back(&s);
  auto by_id = [](const StaticPolyline* a, const StaticPolyline* b) { return a->id < b->id; };
  std::stable_sort(centerlines.begin(), centerlines.end(), by_id);
  std::stable_sort(sidelines.begin(), sidelines.end(), by_id);
  for (const StaticPolyline* l : centerlines) {
    append_clipped(obs.static_polylines, *l, PolylineKind::centerline, center, radius, frame);
  }
  for (const StaticPolyline* l : sidelines) {
    append_clipped(obs.static_polylines, *l, PolylineKind::sideline, center, radius, frame);
  }
  append_clipped(obs.static_polylines, world.path(observer).polyline, PolylineKind::global_path, center, radius,
                 frame);
  return obs;
}

template <typename T>
void put(std::vector<std::uint8_t>& out, const T& v) {
  const auto* p = reinterpret_cast<const std::uint8_t*>(&v);
  out.insert(out.end(), p, p + sizeof(T));
}

template <typename T>
T take(std::span<const std::uint8_t> bytes, std::size_t& at) {
  if (at > bytes.size() || bytes.size() - at < sizeof(T)) throw ObservationFormatError("observation blob truncated");
  T v;
  std::memcpy(&v, bytes.data() + at, sizeof(T));
  at += sizeof(T);
  return v;
}

}  // namespace

AgentTerminated::AgentTerminated(int id)
    : std::invalid_argument("agent " + std::to_string(id) + " is not alive") {}

MissingContext::MissingContext(int id)
    : std::invalid_argument("no delivered context for agent " + std::to_string(id)) {}

ObservationFrame build_observation(int agent, const WorldState& world) {
  const AgentRecord& a = world.agent(agent);
  if (!a.alive()) throw AgentTerminated(agent);
  return assemble(a, world, a.state.pose, nullptr);
}

ObservationFrame build_adversary_observation(int background_agent, const WorldState& world) {
  if (world.agents.empty() || !world.agents.front().alive()) throw EgoTerminated();
  if (background_agent == 1) throw std::invalid_argument("the ego is not a background agent");
  const AgentRecord& bg = world.agent(background_agent);
  if (!bg.alive()) throw AgentTerminated(background_agent);
  const AgentRecord& ego = world.agents.front();
  return assemble(bg, world, ego.state.pose, &ego);
}

ObservationFrame attach_context(ObservationFrame obs, const DeliveredContext& delivered) {
  for (DynamicPolyline& line : obs.agent_polylines) {
    if (line.agent_id < 1 || static_cast<std::size_t>(line.agent_id) > delivered.size()) {
      throw MissingContext(line.agent_id);
    }
    const double svo = delivered.value(line.agent_id);
    for (DynamicVector& v : line.vectors) v.svo = svo;
  }
  return obs;
}

SerializedObservation serialize_observation(const ObservationFrame& obs) {
  SerializedObservation out;
  const bool with_svo = !obs.agent_polylines.empty() && !obs.agent_polylines.front().vectors.empty() &&
                        obs.agent_polylines.front().vectors.front().svo.has_value();
  out.dynamic_width = with_svo ? 6 : 5;
  out.query_index = static_cast<std::uint32_t>(obs.query_index());
  for (const DynamicPolyline& line : obs.agent_polylines) {
    out.dynamic_rows.push_back(static_cast<std::uint32_t>(line.vectors.size()));
    for (const DynamicVector& v : line.vectors) {
      if (v.svo.has_value() != with_svo) throw ObservationFormatError("mixed dynamic vector widths");
      out.dynamic.insert(out.dynamic.end(), {static_cast<float>(v.x), static_cast<float>(v.y),
                                             static_cast<float>(v.theta), static_cast<float>(v.speed),
                                             static_cast<float>(v.history_index)});
      if (with_svo) out.dynamic.push_back(static_cast<float>(*v.svo));
    }
  }
  for (const StaticPolyline& line : obs.static_polylines) {
    out.static_rows.push_back(static_cast<std::uint32_t>(line.vectors.size()));
    for (const StaticVector& v : line.vectors) {
      out.statics.insert(out.statics.end(), {static_cast<float>(v.x), static_cast<float>(v.y),
                                             static_cast<float>(v.theta), static_cast<float>(v.lane_width),
                                             static_cast<float>(v.index_k)});
    }
  }
  return out;
}

std::vector<std::uint8_t> observation_to_bytes(const SerializedObservation& obs) {
  std::vector<std::uint8_t> out;
  out.insert(out.end(), kObsMagic, kObsMagic + 4);
  put(out, kObsVersion);
  put(out, obs.dynamic_width);
  put(out, obs.query_index);
  put(out, static_cast<std::uint32_t>(obs.dynamic_rows.size()));
  put(out, static_cast<std::uint32_t>(obs.static_rows.size()));
  for (std::uint32_t r : obs.dynamic_rows) put(out, r);
  for (std::uint32_t r : obs.static_rows) put(out, r);
  for (float f : obs.dynamic) put(out, f);
  for (float f : obs.statics) put(out, f);
  return out;
}

SerializedObservation observation_from_bytes(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 4 || std::memcmp(bytes.data(), kObsMagic, 4) != 0) {
    throw ObservationFormatError("bad observation magic");
  }
  std::size_t at = 4;
  if (take<std::uint32_t>(bytes, at) != kObsVersion) throw ObservationFormatError("unsupported observation version");
  SerializedObservation out;
  out.dynamic_width = take<std::uint32_t>(bytes, at);
  if (out.dynamic_width != 5 && out.dynamic_width != 6) throw ObservationFormatError("dynamic width must be 5 or 6");
  out.query_index = take<std::uint32_t>(bytes, at);
  const auto n_dyn = take<std::uint32_t>(bytes, at);
  const auto n_static = take<std::uint32_t>(bytes, at);
  if (n_dyn > bytes.size() || n_static > bytes.size()) throw ObservationFormatError("observation blob truncated");
  std::size_t dyn_floats = 0, static_floats = 0;
  for (std::uint32_t i = 0; i < n_dyn; ++i) {
    out.dynamic_rows.push_back(take<std::uint32_t>(bytes, at));
    dyn_floats += std::size_t{out.dynamic_rows.back()} * out.dynamic_width;
  }
  for (std::uint32_t i = 0; i < n_static; ++i) {
    out.static_rows.push_back(take<std::uint32_t>(bytes, at));
    static_floats += std::size_t{out.static_rows.back()} * 5;
  }
  if ((bytes.size() - at) != (dyn_floats + static_floats) * sizeof(float)) {
    throw ObservationFormatError("observation payload size mismatch");
  }
  out.dynamic.resize(dyn_floats);
  out.statics.resize(static_floats);
  std::memcpy(out.dynamic.data(), bytes.data() + at, dyn_floats * sizeof(float));
  at += dyn_floats * sizeof(float);
  std::memcpy(out.statics.data(), bytes.data() + at, static_floats * sizeof(float));
  if (out.query_index >= n_dyn) throw ObservationFormatError("query index outside the dynamic polylines");
  return out;
}

}  // namespace sflow
