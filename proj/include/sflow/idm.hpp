#pragma once

#include <atomic>
#include <cstdint>
#include <optional>

#include "sflow/scenario.hpp"

namespace sflow {

struct WorldState;

/// Unclamped IDM acceleration for a bumper-to-bumper gap > 0.
double idm_acceleration_raw(double v_back, double v_front, double gap, const IdmParams& p);

/// Desired dynamic gap s0 + v*T + v*dv / (2*sqrt(a*b)).
double idm_desired_gap(double v_back, double v_front, const IdmParams& p);

/// IDM acceleration clamped to [-2b, a]. A non-positive gap returns the hard
/// brake -2b and increments idm_degenerate_gap_count().
double idm_acceleration(double v_back, double v_front, double gap, const IdmParams& p);

/// IDM acceleration with no leader (infinite gap).
double idm_free_road_acceleration(double v_back, const IdmParams& p);

std::uint64_t idm_degenerate_gap_count();

struct Leader {
  int id = 0;
  double gap = 0.0;

  friend bool operator==(const Leader&, const Leader&) = default;
};

struct LeaderSearch {
  double radius = 60.0;
};

/// Nearest alive agent ahead on `agent`'s global path, within half a lane width
/// laterally and `radius` meters of arclength. Skips far agents before projecting.
std::optional<Leader> find_leader(int agent, const WorldState& world, const LeaderSearch& search = {});

/// Brute-force version that projects every agent; kept as the reference.
std::optional<Leader> find_leader_reference(int agent, const WorldState& world,
                                            const LeaderSearch& search = {});

/// Pure-pursuit steering toward the point `lookahead` meters ahead on the path.
double pure_pursuit_steer(const Pose2D& pose, double arclength, const Path& path, double lookahead,
                          double wheelbase);

}  // namespace sflow
