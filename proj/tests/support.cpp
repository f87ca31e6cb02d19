#include "support.hpp"

#include <algorithm>
#include <cmath>

#include "json.hpp"

namespace sflow::testing {

using nlohmann::json;

namespace {

json lane_vectors(double x0, double x1, double y, double heading, double width, double spacing = 1.9) {
  json out = json::array();
  const int n = static_cast<int>(std::ceil(std::abs(x1 - x0) / spacing));
  for (int i = 0; i <= n; ++i) {
    const double x = x0 + (x1 - x0) * i / n;
    out.push_back({x, y, heading, width, i + 1});
  }
  return out;
}

json rect(double x0, double y0, double x1, double y1) {
  return json::array({{x0, y0}, {x1, y0}, {x1, y1}, {x0, y1}});
}

json base_document() {
  return {{"format_version", 1},
          {"name", "merge"},
          {"default_agent_count", 4},
          {"max_vector_spacing", 2.0},
          {"vehicle_params",
           {{{"length", 4.5}, {"width", 2.0}, {"wheelbase", 2.8}, {"v_max", 10.0}, {"sigma_max", 0.6},
             {"accel_max", 5.0}}}},
          {"idm", {{"v0", 6.0}, {"time_gap_T", 1.0}, {"s0", 2.0}, {"delta", 4.0}, {"a", 5.0}, {"b", 5.0}}}};
}

}  // namespace

std::string straight_lane_document(double length, double zone_begin, double zone_end) {
  // long lanes use coarse vectors so projections stay cheap
  const double spacing = length > 1000.0 ? 50.0 : 1.9;
  json d = base_document();
  d["max_vector_spacing"] = std::max(2.0, spacing);
  d["interaction_zone"] = rect(zone_begin, -1.75, zone_end, 1.75);
  d["drivable_area"] = json::array({rect(-20.0, -3.25, length + 20.0, 3.25)});
  d["centerlines"] = json::array({{{"id", 0}, {"vectors", lane_vectors(0.0, length, 0.0, 0.0, 3.5, spacing)}}});
  d["sidelines"] = json::array({{{"id", 0}, {"vectors", lane_vectors(0.0, length, 1.75, 0.0, 0.0, spacing)}},
                                {{"id", 1}, {"vectors", lane_vectors(0.0, length, -1.75, 0.0, 0.0, spacing)}}});
  d["candidate_paths"] =
      json::array({{{"id", 0}, {"vectors", lane_vectors(0.0, length, 0.0, 0.0, 3.5, spacing)}}});
  d["spawn_slots"] = json::array({{{"pose", {10.0, 0.0, 0.0}}, {"path", 0}}});
  return d.dump();
}

std::shared_ptr<const ScenarioSpec> straight_lane(double length, double zone_begin, double zone_end) {
  return load_scenario(straight_lane_document(length, zone_begin, zone_end));
}

std::shared_ptr<const ScenarioSpec> two_way_road(double length) {
  const double pi = std::acos(-1.0);
  json d = base_document();
  d["interaction_zone"] = rect(0.4 * length, -1.75, 0.6 * length, 5.25);
  d["drivable_area"] = json::array({rect(-20.0, -3.25, length + 20.0, 6.75)});
  d["centerlines"] = json::array({{{"id", 0}, {"vectors", lane_vectors(0.0, length, 0.0, 0.0, 3.5)}},
                                  {{"id", 1}, {"vectors", lane_vectors(length, 0.0, 3.5, pi, 3.5)}}});
  d["sidelines"] = json::array({{{"id", 0}, {"vectors", lane_vectors(0.0, length, -1.75, 0.0, 0.0)}},
                                {{"id", 1}, {"vectors", lane_vectors(0.0, length, 5.25, 0.0, 0.0)}}});
  d["candidate_paths"] = json::array({{{"id", 0}, {"vectors", lane_vectors(0.0, length, 0.0, 0.0, 3.5)}},
                                      {{"id", 1}, {"vectors", lane_vectors(length, 0.0, 3.5, pi, 3.5)}}});
  d["spawn_slots"] = json::array({{{"pose", {10.0, 0.0, 0.0}}, {"path", 0}},
                                  {{"pose", {length - 10.0, 3.5, pi}}, {"path", 1}}});
  return load_scenario(d.dump());
}

std::shared_ptr<const ScenarioSpec> bundled(ScenarioName name) {
  return load_scenario_file(resolve_scenario_path(std::string(to_string(name))));
}

CaseSpec lane_case(const ScenarioSpec& s, const std::vector<double>& xs, double speed, double svo) {
  CaseSpec c;
  c.scenario = s.name;
  for (double x : xs) c.agents.push_back({0, {x, 0.0, 0.0}, speed, svo, 0});
  return c;
}

CaseSpec pose_case(const ScenarioSpec& s, const std::vector<Pose2D>& poses, int path, double speed) {
  CaseSpec c;
  c.scenario = s.name;
  for (const Pose2D& p : poses) c.agents.push_back({path, p, speed, 45.0, 0});
  return c;
}

JointAction uniform_actions(const WorldState& w, Action a) {
  JointAction out(w.agents.size());
  for (std::size_t i = 0; i < w.agents.size(); ++i) {
    if (w.agents[i].alive()) out[i] = a;
  }
  return out;
}

}  // namespace sflow::testing
