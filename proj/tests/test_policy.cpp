// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The semdiv Authors

#include <semdiv/policy.hpp>

#include <gtest/gtest.h>

#include <cmath>
#include <functional>
#include <random>
#include <vector>

namespace {

using semdiv::TemplatePolicy;
using semdiv::Trajectory;

TemplatePolicy random_policy(std::size_t k, std::size_t slots, std::mt19937_64& rng, double scale = 1.5) {
  TemplatePolicy p(k, slots);
  std::normal_distribution<double> n(0.0, scale);
  for (auto& x : p.params()) x = n(rng);
  return p;
}

// Every complete trajectory of a policy.
std::vector<Trajectory> enumerate(const TemplatePolicy& p) {
  std::vector<Trajectory> out;
  std::function<void(std::vector<std::size_t>&)> rec = [&](std::vector<std::size_t>& prefix) {
    const bool stopped = !prefix.empty() && prefix.back() == p.stop_action();
    if (stopped || prefix.size() == p.max_slots()) {
      Trajectory t{prefix, 0};
      const auto n_final = t.emitted(p.stop_action()).size() + 1;
      for (std::size_t f = 0; f < n_final; ++f) out.push_back({prefix, f});
      return;
    }
    for (std::size_t a = 0; a < p.slot_actions(); ++a) {
      prefix.push_back(a);
      rec(prefix);
      prefix.pop_back();
    }
  };
  std::vector<std::size_t> empty;
  rec(empty);
  return out;
}

TEST(Softmax, SumsToOneAndIsStable) {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> n(0.0, 30.0);
  for (int t = 0; t < 200; ++t) {
    std::vector<double> logits(2 + rng() % 8);
    for (auto& x : logits) x = n(rng) + 700.0;
    double sum = 0.0;
    for (double p : semdiv::softmax(logits)) sum += p;
    ASSERT_NEAR(sum, 1.0, 1e-9);
    for (double lp : semdiv::log_softmax(logits)) ASSERT_TRUE(std::isfinite(lp));
  }
}

TEST(Kl, ClosedFormStep) {
  const std::vector<double> p = {0.0, 0.0};
  const std::vector<double> q = {std::log(0.9), std::log(0.1)};
  const double expected = 0.5 * std::log(0.5 / 0.9) + 0.5 * std::log(0.5 / 0.1);
  EXPECT_NEAR(semdiv::categorical_kl(p, q), expected, 1e-12);
  EXPECT_NEAR(expected, 0.5108, 1e-4);

  // One template, one slot: the slot step carries the KL; the final step is
  // identical in both policies.
  TemplatePolicy policy(1, 1);
  TemplatePolicy reference(1, 1);
  reference.slot_logits(0)[0] = std::log(0.9);
  reference.slot_logits(0)[1] = std::log(0.1);
  const Trajectory t{{0}, 0};
  EXPECT_NEAR(semdiv::trajectory_kl(policy, reference, t), expected, 1e-12);
  const std::vector<Trajectory> batch = {t, t};
  EXPECT_NEAR(semdiv::tokenwise_kl(policy, reference, batch), expected, 1e-12);
}

TEST(Kl, NonnegativeAndZeroOnIdentity) {
  std::mt19937_64 rng(2);
  for (int t = 0; t < 1000; ++t) {
    const auto a = random_policy(3, 3, rng);
    const auto b = random_policy(3, 3, rng);
    const auto traj = semdiv::sample_trajectory(a, rng);
    ASSERT_GE(semdiv::trajectory_kl(a, b, traj), 0.0);
    ASSERT_NEAR(semdiv::trajectory_kl(a, a, traj), 0.0, 1e-12);
  }
  TemplatePolicy small(2, 2);
  TemplatePolicy other(3, 2);
  const std::vector<Trajectory> none;
  EXPECT_THROW(semdiv::tokenwise_kl(small, other, none), std::invalid_argument);
}

TEST(TrajectoryLogProb, NormalizesOverAllTrajectories) {
  std::mt19937_64 rng(4);
  for (int t = 0; t < 20; ++t) {
    const auto p = random_policy(1 + t % 3, 1 + t % 3, rng);
    double mass = 0.0;
    for (const auto& traj : enumerate(p)) mass += std::exp(semdiv::trajectory_log_prob(p, traj));
    ASSERT_NEAR(mass, 1.0, 1e-9);
  }
}

TEST(TrajectoryLogProb, StepsSumToTotal) {
  std::mt19937_64 rng(5);
  const auto p = random_policy(4, 3, rng);
  for (int t = 0; t < 100; ++t) {
    const auto traj = semdiv::sample_trajectory(p, rng);
    double sum = 0.0;
    for (double lp : semdiv::step_log_probs(p, traj)) sum += lp;
    ASSERT_NEAR(sum, semdiv::trajectory_log_prob(p, traj), 1e-12);
  }
}

TEST(TrajectoryLogProb, RejectsForeignTrajectories) {
  TemplatePolicy p(2, 2);
  EXPECT_THROW(semdiv::trajectory_log_prob(p, Trajectory{{}, 0}), std::invalid_argument);
  EXPECT_THROW(semdiv::trajectory_log_prob(p, Trajectory{{5}, 0}), std::invalid_argument);
  EXPECT_THROW(semdiv::trajectory_log_prob(p, Trajectory{{0, 1, 1}, 0}), std::invalid_argument);
  EXPECT_THROW(semdiv::trajectory_log_prob(p, Trajectory{{0, 2}, 2}), std::invalid_argument);
}

TEST(Gradients, MatchFiniteDifferences) {
  std::mt19937_64 rng(6);
  const double h = 1e-6;
  for (int t = 0; t < 20; ++t) {
    const auto p = random_policy(3, 2, rng);
    const auto q = random_policy(3, 2, rng);
    const auto traj = semdiv::sample_trajectory(p, rng);
    std::vector<double> g_lp(p.n_params(), 0.0);
    std::vector<double> g_kl(p.n_params(), 0.0);
    semdiv::accumulate_log_prob_gradient(p, traj, 1.0, g_lp);
    semdiv::accumulate_kl_gradient(p, q, traj, 1.0, g_kl);
    for (std::size_t k = 0; k < p.n_params(); ++k) {
      auto plus = p;
      auto minus = p;
      plus.params()[k] += h;
      minus.params()[k] -= h;
      const double n_lp =
          (semdiv::trajectory_log_prob(plus, traj) - semdiv::trajectory_log_prob(minus, traj)) / (2 * h);
      const double n_kl =
          (semdiv::trajectory_kl(plus, q, traj) - semdiv::trajectory_kl(minus, q, traj)) / (2 * h);
      ASSERT_NEAR(g_lp[k], n_lp, 1e-6);
      ASSERT_NEAR(g_kl[k], n_kl, 1e-6);
    }
  }
}

TEST(Sampling, UniformTemplatesMonteCarlo) {
  TemplatePolicy p(4, 1);
  p.slot_logits(0)[p.stop_action()] = -50.0;
  std::mt19937_64 rng(7);
  std::vector<int> counts(4, 0);
  for (int i = 0; i < 1000; ++i) {
    const auto t = semdiv::sample_trajectory(p, rng);
    ASSERT_EQ(t.slot_actions.size(), 1u);
    ++counts[t.slot_actions[0]];
  }
  for (int c : counts) EXPECT_NEAR(c / 1000.0, 0.25, 0.05);
}

TEST(Sampling, LargeMarginIsDeterministic) {
  TemplatePolicy p(3, 3);
  p.slot_logits(0)[2] = 50.0;
  p.slot_logits(1)[p.stop_action()] = 50.0;
  p.pointer_logit(2) = 50.0;
  std::mt19937_64 rng(8);
  const auto first = semdiv::sample_trajectory(p, rng);
  EXPECT_EQ(first, (Trajectory{{2, 3}, 0}));
  for (int i = 0; i < 100; ++i) EXPECT_EQ(semdiv::sample_trajectory(p, rng), first);
}

TEST(Sampling, SameSeedSameBatch) {
  std::mt19937_64 init(9);
  const auto p = random_policy(5, 3, init, 0.5);
  std::mt19937_64 a(42);
  std::mt19937_64 b(42);
  for (int i = 0; i < 50; ++i) ASSERT_EQ(semdiv::sample_trajectory(p, a), semdiv::sample_trajectory(p, b));
}

TEST(Sampling, GreedyTakesFirstArgmax) {
  TemplatePolicy p(3, 2);
  std::mt19937_64 rng(0);
  // All ties: template 0 at every slot, then copy block 0.
  EXPECT_EQ(semdiv::sample_trajectory(p, rng, semdiv::Decoding::greedy), (Trajectory{{0, 0}, 0}));
  p.none_logit() = 1.0;
  EXPECT_EQ(semdiv::sample_trajectory(p, rng, semdiv::Decoding::greedy), (Trajectory{{0, 0}, 2}));
}

}  // namespace
