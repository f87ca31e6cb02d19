#pragma once

#include <cstdint>
#include <memory>
#include <random>
#include <string>
#include <vector>

#include "sflow/env.hpp"
#include "sflow/scenario.hpp"

namespace sflow::testing {

/// Single straight lane along +x from 0 to `length`, labelled as a merge map.
/// The interaction zone spans [zone_begin, zone_end].
std::string straight_lane_document(double length, double zone_begin, double zone_end);
std::shared_ptr<const ScenarioSpec> straight_lane(double length = 400.0, double zone_begin = 300.0,
                                                  double zone_end = 340.0);

/// Two opposing straight lanes (y = 0 eastbound, y = 3.5 westbound).
std::shared_ptr<const ScenarioSpec> two_way_road(double length = 200.0);

std::shared_ptr<const ScenarioSpec> bundled(ScenarioName name);

/// Case placing agents on path 0 at the given x positions (heading +x).
CaseSpec lane_case(const ScenarioSpec& s, const std::vector<double>& xs, double speed = 0.0, double svo = 45.0);

/// Case from explicit per-agent poses on `path`.
CaseSpec pose_case(const ScenarioSpec& s, const std::vector<Pose2D>& poses, int path = 0, double speed = 0.0);

/// Every agent gets the same action.
JointAction uniform_actions(const WorldState& w, Action a);

inline std::mt19937_64 rng(std::uint64_t seed) { return std::mt19937_64(seed); }

inline double draw(std::mt19937_64& g, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(g);
}

inline int draw_int(std::mt19937_64& g, int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(g); }

}  // namespace sflow::testing
