#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "sflow/communication.hpp"
#include "sflow/env.hpp"
#include "sflow/geometry.hpp"

namespace sflow {

/// Agent-centric view of the world. Every vector is expressed in `frame`.
struct ObservationFrame {
  Pose2D frame;
  std::vector<DynamicPolyline> agent_polylines;
  std::vector<StaticPolyline> static_polylines;
  int self_index = 0;
  std::optional<int> ego_index;  // set on adversary observations

  /// Index of the polyline used as the attention query.
  int query_index() const { return ego_index.value_or(self_index); }
  friend bool operator==(const ObservationFrame&, const ObservationFrame&) = default;
};

class AgentTerminated : public std::invalid_argument {
 public:
  explicit AgentTerminated(int id);
};

class EgoTerminated : public std::invalid_argument {
 public:
  EgoTerminated() : std::invalid_argument("ego agent is not alive") {}
};

class MissingContext : public std::invalid_argument {
 public:
  explicit MissingContext(int id);
};

/// Observation for a lower-level policy: clipped around the agent, in its own frame.
ObservationFrame build_observation(int agent, const WorldState& world);

/// Appends each agent's delivered SVO to its dynamic vectors.
ObservationFrame attach_context(ObservationFrame obs, const DeliveredContext& delivered);

/// Background agent's view (its clipping, its global path) re-expressed in the
/// ego frame, with the ego polyline always present and flagged.
ObservationFrame build_adversary_observation(int background_agent, const WorldState& world);

/// Flat float32 layout handed to inference and external tooling.
struct SerializedObservation {
  std::uint32_t dynamic_width = 5;  // 5, or 6 with context attached
  std::uint32_t query_index = 0;
  std::vector<std::uint32_t> dynamic_rows;  // vectors per agent polyline
  std::vector<std::uint32_t> static_rows;   // vectors per static polyline
  std::vector<float> dynamic;               // row-major [x, y, theta, v, h, (svo)]
  std::vector<float> statics;               // row-major [x, y, theta, lane_width, k]

  friend bool operator==(const SerializedObservation&, const SerializedObservation&) = default;
};

class ObservationFormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Throws ObservationFormatError when polylines mix SVO-carrying and plain vectors.
SerializedObservation serialize_observation(const ObservationFrame& obs);

/// Little-endian byte blob with magic "SVOB"; see docs/formats.md.
std::vector<std::uint8_t> observation_to_bytes(const SerializedObservation& obs);
SerializedObservation observation_from_bytes(std::span<const std::uint8_t> bytes);

}  // namespace sflow
