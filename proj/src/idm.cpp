#include "sflow/idm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "sflow/env.hpp"

namespace sflow {

namespace {

std::atomic<std::uint64_t> g_degenerate_gaps{0};

}  // namespace

double idm_desired_gap(double v_back, double v_front, const IdmParams& p) {
  const double dv = v_back - v_front;
  return p.s0 + v_back * p.time_gap_T + v_back * dv / (2.0 * std::sqrt(p.a * p.b));
}

double idm_acceleration_raw(double v_back, double v_front, double gap, const IdmParams& p) {
  const double phi = idm_desired_gap(v_back, v_front, p);
  const double ratio = phi / gap;
  return p.a * (1.0 - std::pow(v_back / p.v0, p.delta) - ratio * ratio);
}

double idm_acceleration(double v_back, double v_front, double gap, const IdmParams& p) {
  if (!(gap > 0.0)) {
    g_degenerate_gaps.fetch_add(1, std::memory_order_relaxed);
    return -2.0 * p.b;
  }
  return std::clamp(idm_acceleration_raw(v_back, v_front, gap, p), -2.0 * p.b, p.a);
}

double idm_free_road_acceleration(double v_back, const IdmParams& p) {
  return std::clamp(p.a * (1.0 - std::pow(v_back / p.v0, p.delta)), -2.0 * p.b, p.a);
}

std::uint64_t idm_degenerate_gap_count() { return g_degenerate_gaps.load(std::memory_order_relaxed); }

namespace {

template <bool Prefilter>
std::optional<Leader> search_leader(int agent, const WorldState& world, const LeaderSearch& search) {
  const AgentRecord& me = world.agent(agent);
  const CandidatePath& path = world.path(me);
  const Vec2 p = me.state.pose.position();
  const PathProjection mine = path.geometry.project(p);
  const double s_me = mine.arclength;
  const double half_lane = 0.5 * path.lane_width;
  const double my_half_length = 0.5 * world.params(me).length;

  std::optional<Leader> best;
  double best_lead = std::numeric_limits<double>::infinity();
  for (const AgentRecord& other : world.agents) {
    if (other.id == me.id || !other.alive()) continue;
    const Vec2 q = other.state.pose.position();
    if constexpr (Prefilter) {
      // lead bounds the along-path distance between the two foot points
      const Vec2 d = q - p;
      const double reach = search.radius + half_lane + mine.distance;
      if (dot(d, d) > reach * reach) continue;
    }
    const PathProjection proj = path.geometry.project(q);
    const double lead = proj.arclength - s_me;
    if (!(lead > 0.0) || lead > search.radius) continue;
    if (proj.distance > half_lane) continue;
    if (lead < best_lead) {
      best_lead = lead;
      best = Leader{other.id, lead - (0.5 * world.params(other).length + my_half_length)};
    }
  }
  return best;
}

}  // namespace

std::optional<Leader> find_leader(int agent, const WorldState& world, const LeaderSearch& search) {
  return search_leader<true>(agent, world, search);
}

std::optional<Leader> find_leader_reference(int agent, const WorldState& world, const LeaderSearch& search) {
  return search_leader<false>(agent, world, search);
}

double pure_pursuit_steer(const Pose2D& pose, double arclength, const Path& path, double lookahead,
                          double wheelbase) {
  const Pose2D target = path.pose_at(arclength + lookahead);
  const Pose2D local = transform_to_frame(target, pose);
  const double ld = std::hypot(local.x, local.y);
  if (ld <= 1e-9) return 0.0;
  const double alpha = std::atan2(local.y, local.x);
  return std::atan(2.0 * wheelbase * std::sin(alpha) / ld);
}

}  // namespace sflow
