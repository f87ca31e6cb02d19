#include "sflow/reward.hpp"

#include <cmath>
#include <numeric>

#include "sflow/geometry.hpp"

namespace sflow {

RewardWeights::RewardWeights(double omega1, double omega2) : omega1_(omega1), omega2_(omega2) {
  if (!(omega1 > 0.0)) throw std::invalid_argument("omega1 must be positive");
  if (!(omega2 >= 10.0 * omega1)) throw std::invalid_argument("omega2 must be >= 10 * omega1");
}

RewardBreakdown individual_reward(double speed, double v_max, bool failed, const RewardWeights& w) {
  RewardBreakdown r;
  r.r_speed = 2.0 * speed / v_max - 1.0;
  r.r_fail = failed ? -1.0 : 0.0;
  r.individual = w.omega1() * r.r_speed + w.omega2() * r.r_fail;
  r.composed = r.individual;
  return r;
}

double failmaker_individual_reward(double speed, double v_max, bool failed, bool collided,
                                   const RewardWeights& w) {
  const double r_speed = 2.0 * speed / v_max - 1.0;
  const double r_fail = failed ? -1.0 : 0.0;
  return w.omega1() * r_speed + w.omega2() * r_fail + w.omega2() * (collided ? 1.0 : 0.0);
}

SvoWeights svo_weights(double c_deg) {
  if (c_deg == 0.0) return {1.0, 0.0};
  if (c_deg == 90.0) return {0.0, 1.0};
  if (c_deg == -90.0) return {0.0, -1.0};
  const double c = deg2rad(c_deg);
  return {std::cos(c), std::sin(c)};
}

double socially_composed_reward(double own, std::span<const double> others, double c_deg) {
  if (others.empty()) throw EmptyOthers();
  const double mean = std::accumulate(others.begin(), others.end(), 0.0) / static_cast<double>(others.size());
  if (c_deg == 0.0) return own;
  if (c_deg == 90.0) return mean;
  const SvoWeights w = svo_weights(c_deg);
  return w.own * own + w.others * mean;
}

double alpha_to_svo(double alpha) {
  if (!(alpha >= 0.0)) throw std::invalid_argument("alpha must be >= 0");
  if (alpha == 0.0) return -90.0;
  return -std::atan(1.0 / alpha) * (180.0 / std::numbers::pi);
}

double failmaker_background_reward(double own, double ego, double c_deg) {
  if (!(c_deg >= -90.0 && c_deg < 0.0)) throw std::invalid_argument("failmaker SVO must lie in [-90, 0)");
  if (c_deg == -90.0) return -ego;
  const SvoWeights w = svo_weights(c_deg);
  return w.own * own + w.others * ego;
}

}  // namespace sflow
