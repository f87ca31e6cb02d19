#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "sflow/reward.hpp"
#include "support.hpp"

namespace sflow {
namespace {

using testing::draw;

TEST(Individual, SpeedTermSpansMinusOneToOne) {
  const RewardWeights w;
  EXPECT_EQ(individual_reward(0.0, 10.0, false, w).r_speed, -1.0);
  EXPECT_EQ(individual_reward(10.0, 10.0, false, w).r_speed, 1.0);
  EXPECT_EQ(individual_reward(5.0, 10.0, false, w).r_speed, 0.0);
}

TEST(Individual, FailurePenaltyIsWeighted) {
  const RewardWeights w(1.0, 100.0);
  const RewardBreakdown r = individual_reward(5.0, 10.0, true, w);
  EXPECT_EQ(r.r_fail, -1.0);
  EXPECT_EQ(r.individual, -100.0);
  EXPECT_EQ(r.composed, r.individual);
}

TEST(Individual, WeightsRequireDominantPenalty) {
  EXPECT_THROW(RewardWeights(1.0, 5.0), std::invalid_argument);
  EXPECT_THROW(RewardWeights(0.0, 5.0), std::invalid_argument);
  EXPECT_NO_THROW(RewardWeights(0.5, 5.0));
}

TEST(Individual, AttackerIsNotPenalizedForCollisions) {
  const RewardWeights w;
  EXPECT_EQ(failmaker_individual_reward(5.0, 10.0, true, true, w), 0.0);
  EXPECT_EQ(failmaker_individual_reward(5.0, 10.0, true, false, w), -100.0);
}

TEST(Composed, EndpointsAreExact) {
  auto g = testing::rng(41);
  for (int i = 0; i < 1000; ++i) {
    const double own = draw(g, -150.0, 10.0);
    std::vector<double> others(static_cast<std::size_t>(testing::draw_int(g, 1, 20)));
    for (double& o : others) o = draw(g, -150.0, 10.0);
    double sum = 0.0;
    for (double o : others) sum += o;
    EXPECT_EQ(socially_composed_reward(own, others, 0.0), own);
    EXPECT_EQ(socially_composed_reward(own, others, 90.0), sum / static_cast<double>(others.size()));
  }
}

TEST(Composed, MidpointWeighsBothEqually) {
  const std::vector<double> others{2.0, 4.0};
  EXPECT_NEAR(socially_composed_reward(1.0, others, 45.0), std::sqrt(0.5) * (1.0 + 3.0), 1e-12);
}

TEST(Composed, RequiresOtherAgents) {
  EXPECT_THROW(socially_composed_reward(1.0, {}, 30.0), EmptyOthers);
}

TEST(Composed, WeightGeometryOverSweep) {
  double prev_cos = 2.0, prev_sin = -2.0;
  for (int k = 0; k <= 900; ++k) {
    const double c = 0.1 * k;
    const SvoWeights w = svo_weights(c);
    EXPECT_NEAR(w.own * w.own + w.others * w.others, 1.0, 1e-12) << c;
    EXPECT_LE(w.own, prev_cos);
    EXPECT_GE(w.others, prev_sin);
    prev_cos = w.own;
    prev_sin = w.others;
  }
}

TEST(Composed, BoundedByRootTwoTimesLargestTerm) {
  auto g = testing::rng(42);
  for (int i = 0; i < 5000; ++i) {
    const double own = draw(g, -200.0, 200.0);
    std::vector<double> others(static_cast<std::size_t>(testing::draw_int(g, 1, 10)));
    double sum = 0.0;
    for (double& o : others) sum += (o = draw(g, -200.0, 200.0));
    const double mean = sum / static_cast<double>(others.size());
    const double r = socially_composed_reward(own, others, draw(g, 0.0, 90.0));
    EXPECT_LE(std::abs(r), std::sqrt(2.0) * std::max(std::abs(own), std::abs(mean)) * (1 + 1e-15));
  }
}

TEST(ZeroSum, EgoAndAdversarySumToZeroBitwise) {
  auto g = testing::rng(43);
  for (int i = 0; i < 10000; ++i) {
    const double r = draw(g, -1e6, 1e6);
    EXPECT_EQ(r + adversary_reward(r), 0.0);
  }
  EXPECT_EQ(0.0 + adversary_reward(0.0), 0.0);
}

TEST(Alpha, MapsOntoNegativeQuadrant) {
  EXPECT_DOUBLE_EQ(alpha_to_svo(1.0), -45.0);
  EXPECT_EQ(alpha_to_svo(0.0), -90.0);
  EXPECT_LT(alpha_to_svo(1e12), 0.0);
  EXPECT_THROW(alpha_to_svo(-0.1), std::invalid_argument);
  double prev = -91.0;
  for (double a = 0.0; a < 1000.0; a = a * 1.1 + 0.01) {
    const double c = alpha_to_svo(a);
    EXPECT_GT(c, prev);
    EXPECT_GE(c, -90.0);
    EXPECT_LT(c, 0.0);
    prev = c;
  }
}

TEST(Alpha, AttackerRewardIsProportionalToGeneralSum) {
  // cos c * own + sin c * ego is proportional to alpha * own - ego
  auto g = testing::rng(44);
  for (int i = 0; i < 500; ++i) {
    const double alpha = draw(g, 0.05, 20.0), own = draw(g, -10.0, 10.0), ego = draw(g, -10.0, 10.0);
    const double c = alpha_to_svo(alpha);
    const double scale = std::sin(-deg2rad(c));  // = 1 / sqrt(1 + alpha^2)
    EXPECT_NEAR(failmaker_background_reward(own, ego, c), scale * (alpha * own - ego), 1e-9);
  }
  EXPECT_THROW(failmaker_background_reward(1.0, 1.0, 0.0), std::invalid_argument);
  EXPECT_EQ(failmaker_background_reward(3.0, 2.0, -90.0), -2.0);
}

}  // namespace
}  // namespace sflow
