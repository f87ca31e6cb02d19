#pragma once

#include <span>
#include <stdexcept>

namespace sflow {

/// omega1 weighs the dense speed term, omega2 the terminal failure penalty.
class RewardWeights {
 public:
  RewardWeights() = default;
  /// Throws std::invalid_argument unless omega2 >= 10 * omega1 (and omega1 > 0).
  RewardWeights(double omega1, double omega2);

  double omega1() const { return omega1_; }
  double omega2() const { return omega2_; }
  friend bool operator==(const RewardWeights&, const RewardWeights&) = default;

 private:
  double omega1_ = 1.0;
  double omega2_ = 100.0;
};

struct RewardBreakdown {
  double r_speed = 0.0;
  double r_fail = 0.0;
  double individual = 0.0;
  double composed = 0.0;
  double adversary_signal = 0.0;

  friend bool operator==(const RewardBreakdown&, const RewardBreakdown&) = default;
};

class EmptyOthers : public std::invalid_argument {
 public:
  EmptyOthers() : std::invalid_argument("socially composed reward needs at least one other agent") {}
};

/// Fills r_speed, r_fail and individual; composed is set equal to individual.
RewardBreakdown individual_reward(double speed, double v_max, bool failed, const RewardWeights& w);

/// Reward used by a collision-seeking attacker: collisions are not penalized.
double failmaker_individual_reward(double speed, double v_max, bool failed, bool collided,
                                   const RewardWeights& w);

struct SvoWeights {
  double own = 1.0;
  double others = 0.0;
};

/// (cos c, sin c) for c in degrees, exact at 0, +/-90.
SvoWeights svo_weights(double c_deg);

/// cos(c) * own + sin(c) * mean(others); c in [0, 90] degrees.
double socially_composed_reward(double own, std::span<const double> others, double c_deg);

/// Zero-sum counterpart of the ego reward.
inline double adversary_reward(double ego_individual) { return -ego_individual; }

/// Maps an attack-weight hyperparameter alpha >= 0 to an SVO angle in [-90, 0) degrees.
double alpha_to_svo(double alpha);

/// cos(c) * own + sin(c) * ego for c in [-90, 0) degrees.
double failmaker_background_reward(double own, double ego, double c_deg);

}  // namespace sflow
