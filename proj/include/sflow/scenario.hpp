#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "sflow/geometry.hpp"

namespace sflow {

class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raised when a loaded document breaches a structural invariant. The message names it.
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class PlacementError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class ScenarioName { intersection, bottleneck, merge, roundabout };

std::string_view to_string(ScenarioName name);
ScenarioName scenario_name_from_string(std::string_view s);

struct VehicleParams {
  double length = 4.5;
  double width = 2.0;
  double wheelbase = 2.8;
  double v_max = 10.0;
  double sigma_max = 0.6;
  double accel_max = 5.0;

  void validate() const;
  friend bool operator==(const VehicleParams&, const VehicleParams&) = default;
};

/// Intelligent Driver Model parameters; defaults are the published IDM table.
struct IdmParams {
  double v0 = 6.0;
  double time_gap_T = 1.0;
  double s0 = 2.0;
  double delta = 4.0;
  double a = 5.0;
  double b = 5.0;

  void validate() const;
  friend bool operator==(const IdmParams&, const IdmParams&) = default;
};

struct SpawnSlot {
  Pose2D pose;
  int path_id = 0;
  double arclength = 0.0;  // derived at load time
};

/// A candidate global path with derived projection data.
struct CandidatePath {
  StaticPolyline polyline;
  Path geometry;
  double lane_width = 3.5;
  double zone_exit_arclength = 0.0;  // derived: last exit from the interaction zone
};

/// Centerline with derived geometry for lane-direction queries.
struct Lane {
  StaticPolyline polyline;
  Path geometry;
  double lane_width = 3.5;
  Aabb corridor_bounds;  // geometry bounds grown by half a lane width
};

/// Immutable map description for one scenario.
struct ScenarioSpec {
  ScenarioName name = ScenarioName::intersection;
  int default_agent_count = 1;
  double max_vector_spacing = 2.0;
  std::vector<VehicleParams> vehicle_params;
  IdmParams idm;
  std::vector<Lane> centerlines;
  std::vector<StaticPolyline> sidelines;
  std::vector<Polygon> drivable_area;
  Polygon interaction_zone;
  std::vector<CandidatePath> candidate_paths;
  std::vector<SpawnSlot> spawn_slots;
  std::uint64_t content_hash = 0;  // FNV-1a of the source document bytes

  bool drivable(Vec2 p) const;
  bool in_interaction_zone(Vec2 p) const { return interaction_zone.contains(p); }
};

/// Parses and validates a scenario document (JSON text).
std::shared_ptr<const ScenarioSpec> load_scenario(std::string_view document);
std::shared_ptr<const ScenarioSpec> load_scenario_file(const std::filesystem::path& path);

/// Resolves a scenario argument: either a file path or a bundled scenario name.
std::filesystem::path resolve_scenario_path(const std::string& name_or_path);

// ---------------------------------------------------------------------- cases

struct CaseAgent {
  int path_id = 0;
  Pose2D pose;
  double speed = 0.0;
  double svo_deg = 0.0;
  int vehicle_id = 0;

  friend bool operator==(const CaseAgent&, const CaseAgent&) = default;
};

struct CaseSpec {
  int case_id = 0;
  ScenarioName scenario = ScenarioName::intersection;
  std::vector<CaseAgent> agents;
  std::uint64_t seed = 0;

  friend bool operator==(const CaseSpec&, const CaseSpec&) = default;
};

struct SvoUniform {};
struct SvoFixed {
  double degrees = 0.0;
};
using SvoMode = std::variant<SvoUniform, SvoFixed>;

SvoMode parse_svo_mode(std::string_view text);  // "uniform" | "uniform_0_90" | "fixed:C"
std::string to_string(const SvoMode& mode);

struct CaseGenOptions {
  std::optional<int> agent_count;  // defaults to the scenario's count
  double jitter = 2.0;             // longitudinal, meters
  int max_attempts = 1000;         // per case
};

std::vector<CaseSpec> generate_cases(const ScenarioSpec& scenario, int n, std::uint64_t master_seed,
                                     const SvoMode& svo_mode, const CaseGenOptions& options = {});

/// Throws ValidationError when a case breaches its invariants against `scenario`.
void validate_case(const CaseSpec& c, const ScenarioSpec& scenario);

OrientedBox footprint(const Pose2D& pose, const VehicleParams& params);

struct CaseFile {
  ScenarioName scenario = ScenarioName::intersection;
  std::uint64_t master_seed = 0;
  std::string svo_mode;
  std::vector<CaseSpec> cases;
};

std::string serialize_cases(const CaseFile& file);
CaseFile parse_cases(std::string_view document);
CaseFile load_case_file(const std::filesystem::path& path);

}  // namespace sflow
