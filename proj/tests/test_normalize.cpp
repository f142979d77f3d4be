// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The semdiv Authors

#include <semdiv/normalize.hpp>

#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <vector>

namespace {

using semdiv::RewardVector;

TEST(BatchNormalize, ConstantComponentIsCentered) {
  const std::vector<RewardVector> batch(5, RewardVector{1.0, 0.0, 1.5, 0.3});
  const auto out = semdiv::batch_normalize(batch);
  for (const auto& r : out.rewards) EXPECT_EQ(r, (RewardVector{0, 0, 0, 0}));
  EXPECT_EQ(out.stats.stddev[0], 0.0);
}

TEST(BatchNormalize, TwoPoints) {
  const std::vector<RewardVector> batch = {{0, 0, 0, 0}, {2, 2, 2, 2}};
  const auto out = semdiv::batch_normalize(batch, 1e-8);
  for (std::size_t k = 0; k < semdiv::kNumComponents; ++k) {
    EXPECT_NEAR(semdiv::component(out.rewards[0], k), -1.0, 1e-6);
    EXPECT_NEAR(semdiv::component(out.rewards[1], k), 1.0, 1e-6);
    EXPECT_EQ(out.stats.mean[k], 1.0);
    EXPECT_EQ(out.stats.stddev[k], 1.0);
  }
}

TEST(BatchNormalize, EmptyAndBadEpsilon) {
  EXPECT_THROW(semdiv::batch_normalize({}), std::invalid_argument);
  const std::vector<RewardVector> one(1);
  EXPECT_THROW(semdiv::batch_normalize(one, 0.0), std::invalid_argument);
}

TEST(BatchNormalize, MomentsOnRandomBatches) {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> n(0.0, 2.0);
  for (int t = 0; t < 200; ++t) {
    const double eps = t % 2 == 0 ? 1e-8 : 0.3;
    std::vector<RewardVector> batch(2 + rng() % 30);
    for (auto& r : batch) r = {n(rng), n(rng) > 0 ? 1.0 : 0.0, n(rng), std::abs(n(rng))};
    const auto out = semdiv::batch_normalize(batch, eps);
    for (std::size_t k = 0; k < semdiv::kNumComponents; ++k) {
      double mean = 0.0;
      for (const auto& r : out.rewards) mean += semdiv::component(r, k);
      mean /= static_cast<double>(batch.size());
      ASSERT_NEAR(mean, 0.0, 1e-9);
      double var = 0.0;
      for (const auto& r : out.rewards) var += std::pow(semdiv::component(r, k) - mean, 2);
      const double sd = std::sqrt(var / static_cast<double>(batch.size()));
      const double sigma = out.stats.stddev[k];
      if (sigma > eps) {
        ASSERT_NEAR(sd, sigma / (sigma + eps), 1e-9);
      } else {
        ASSERT_NEAR(sd, sigma, 1e-9);
      }
    }
  }
}

TEST(Aggregate, Examples) {
  EXPECT_EQ(semdiv::aggregate({0.5, -0.5, 0, 0}, {}), 0.0);
  EXPECT_EQ(semdiv::aggregate({0.7, 3, 4, 5}, {1, 0, 0, 0}), 0.7);
  semdiv::AggregationWeights bad{1, 1, NAN, 1};
  EXPECT_THROW(bad.validate(), std::invalid_argument);
}

TEST(GroupAdvantages, Examples) {
  const std::vector<double> constant = {0.4, 0.4, 0.4};
  for (double a : semdiv::group_advantages(constant)) EXPECT_EQ(a, 0.0);
  const std::vector<double> two = {0.0, 1.0};
  const auto adv = semdiv::group_advantages(two, 1e-12);
  EXPECT_NEAR(adv[0], -1.0, 1e-9);
  EXPECT_NEAR(adv[1], 1.0, 1e-9);
  const std::vector<double> one = {1.0};
  EXPECT_THROW(semdiv::group_advantages(one), std::invalid_argument);
}

TEST(GroupAdvantages, ZeroSumAndShiftInvariance) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  for (int t = 0; t < 500; ++t) {
    std::vector<double> r(2 + rng() % 10);
    for (auto& x : r) x = u(rng);
    const auto adv = semdiv::group_advantages(r);
    double sum = 0.0;
    for (double a : adv) sum += a;
    ASSERT_NEAR(sum, 0.0, 1e-9);
    const double c = u(rng);
    auto shifted = r;
    for (auto& x : shifted) x += c;
    const auto adv2 = semdiv::group_advantages(shifted);
    for (std::size_t i = 0; i < r.size(); ++i) ASSERT_NEAR(adv[i], adv2[i], 1e-9);
  }
}

}  // namespace
