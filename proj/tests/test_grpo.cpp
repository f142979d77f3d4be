// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The semdiv Authors

#include <semdiv/grpo.hpp>
#include <semdiv/trainer.hpp>

#include "grad_check.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <sstream>
#include <vector>

namespace {

TEST(ImportanceRatio, Examples) {
  EXPECT_EQ(semdiv::importance_ratio(-1.3, -1.3), 1.0);
  EXPECT_NEAR(semdiv::importance_ratio(std::log(2.0) - 4.0, -4.0), 2.0, 1e-12);
  EXPECT_THROW(semdiv::importance_ratio(NAN, 0.0), std::invalid_argument);
  EXPECT_THROW(semdiv::importance_ratio(0.0, -INFINITY), std::invalid_argument);
}

TEST(ImportanceRatio, ClampsAtCeilingWithWarning) {
  std::ostringstream captured;
  auto* old = std::clog.rdbuf(captured.rdbuf());
  const double r = semdiv::importance_ratio(100.0, 0.0);
  std::clog.rdbuf(old);
  EXPECT_EQ(r, semdiv::kRatioCeiling);
  EXPECT_NE(captured.str().find("clamped"), std::string::npos);
}

TEST(ImportanceRatio, IdenticalPoliciesGiveOne) {
  std::mt19937_64 rng(1);
  semdiv::TemplatePolicy p(4, 3);
  gradcheck::randomize(p, rng, 1.0);
  for (int i = 0; i < 200; ++i) {
    const auto t = semdiv::sample_trajectory(p, rng);
    const double lp = semdiv::trajectory_log_prob(p, t);
    ASSERT_NEAR(semdiv::importance_ratio(lp, lp), 1.0, 1e-9);
  }
}

TEST(ClippedSurrogate, Examples) {
  EXPECT_DOUBLE_EQ(semdiv::clipped_term(2.0, 1.0, 0.2), 1.2);
  EXPECT_DOUBLE_EQ(semdiv::clipped_term(0.5, -1.0, 0.2), -0.8);
  const std::vector<double> ones = {1.0, 1.0, 1.0, 1.0};
  const std::vector<double> adv = {-1.5, 0.5, 0.25, 0.75};
  EXPECT_NEAR(semdiv::clipped_surrogate(ones, adv, 0.2), 0.0, 1e-15);
  const std::vector<double> short_adv = {1.0};
  EXPECT_THROW(semdiv::clipped_surrogate(ones, short_adv, 0.2), std::invalid_argument);
  EXPECT_THROW(semdiv::clipped_surrogate({}, {}, 0.2), std::invalid_argument);
}

TEST(ClippedSurrogate, NeverExceedsUnclipped) {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> ratio(0.0, 3.0);
  std::normal_distribution<double> adv(0.0, 1.0);
  for (int t = 0; t < 1000; ++t) {
    std::vector<double> r(1 + rng() % 12);
    std::vector<double> a(r.size());
    double unclipped = 0.0;
    for (std::size_t i = 0; i < r.size(); ++i) {
      r[i] = ratio(rng);
      a[i] = adv(rng);
      unclipped += r[i] * a[i];
    }
    unclipped /= static_cast<double>(r.size());
    ASSERT_LE(semdiv::clipped_surrogate(r, a, 0.2), unclipped + 1e-12);
  }
}

TEST(GrpoConfig, Validation) {
  semdiv::GrpoConfig c;
  EXPECT_NO_THROW(c.validate());
  c.group_size = 1;
  EXPECT_THROW(c.validate(), std::invalid_argument);
  c = {};
  c.clip_epsilon = 1.0;
  EXPECT_THROW(c.validate(), std::invalid_argument);
  c = {};
  c.kl_coeff = -1.0;
  EXPECT_THROW(c.validate(), std::invalid_argument);
}

TEST(GrpoGradient, MatchesFiniteDifferences) {
  std::size_t clipped = 0;
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    const auto inst = gradcheck::make_instance(seed);
    const auto res = gradcheck::check(inst);
    clipped += res.clipped_samples;
    ASSERT_LT(res.max_rel_error, 1e-4) << "seed " << seed;
  }
  // The instances must exercise the clipped branch somewhere.
  EXPECT_GT(clipped, 0u);
}

TEST(GrpoGradient, LargerInstances) {
  for (std::uint64_t seed = 100; seed < 105; ++seed) {
    const auto inst = gradcheck::make_instance(seed, 5, 3, 6);
    ASSERT_LT(gradcheck::check(inst).max_rel_error, 1e-4) << "seed " << seed;
  }
}

TEST(GrpoGradient, ZeroAdvantagesLeaveOnlyKl) {
  auto inst = gradcheck::make_instance(7);
  for (auto& s : inst.samples) s.advantage = 0.0;
  const auto g = semdiv::grpo_gradient(inst.policy, inst.reference, inst.samples, inst.clip, 0.0);
  for (double x : g) EXPECT_EQ(x, 0.0);
  const auto with_kl = semdiv::grpo_gradient(inst.policy, inst.reference, inst.samples, inst.clip, 1.0);
  double norm = 0.0;
  for (double x : with_kl) norm += x * x;
  EXPECT_GT(norm, 0.0);
}

// ---------------------------------------------------------------------------
// Full step on synthetic tasks
// ---------------------------------------------------------------------------

class GrpoStep : public ::testing::Test {
 protected:
  void SetUp() override {
    semdiv::TaskFamilySpec spec;
    tasks_ = semdiv::generate_tasks(8, spec, 3);
    for (const auto& t : tasks_) prompts_.push_back(&t);
    prompts_.resize(4);
    config_.seed = 3;
  }

  semdiv::StepStats step(semdiv::TemplatePolicy& policy, const semdiv::TemplatePolicy& reference,
                         const semdiv::GrpoConfig& cfg, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    return semdiv::grpo_step(policy, reference, prompts_, semdiv::make_scorer(config_, embedder_),
                             config_.effective_weights(), cfg, rng);
  }

  std::vector<semdiv::SyntheticTask> tasks_;
  std::vector<const semdiv::SyntheticTask*> prompts_;
  semdiv::RunConfig config_;
  semdiv::HashEmbedder embedder_{256};
};

TEST_F(GrpoStep, ZeroLearningRateKeepsParameters) {
  semdiv::TemplatePolicy policy(tasks_[0].templates.size(), 3);
  std::mt19937_64 init(4);
  gradcheck::randomize(policy, init, 0.5);
  const auto before = policy;
  semdiv::GrpoConfig cfg;
  cfg.learning_rate = 0.0;
  const auto stats = step(policy, semdiv::TemplatePolicy(policy.n_templates(), 3), cfg, 9);
  EXPECT_TRUE(std::equal(before.params().begin(), before.params().end(), policy.params().begin()));
  EXPECT_GT(stats.tok_mean, 0.0);
  EXPECT_GT(stats.kl, 0.0);
  std::size_t hist = 0;
  for (auto c : stats.uniq_histogram) hist += c;
  EXPECT_EQ(hist, prompts_.size() * cfg.group_size);
}

TEST_F(GrpoStep, StrongKlPullsTowardReference) {
  const std::size_t k = tasks_[0].templates.size();
  semdiv::GrpoConfig cfg;
  cfg.kl_coeff = 1e3;
  cfg.learning_rate = 1e-4;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    std::mt19937_64 init(seed);
    semdiv::TemplatePolicy policy(k, 3);
    gradcheck::randomize(policy, init, 1.0);
    semdiv::TemplatePolicy reference(k, 3);
    gradcheck::randomize(reference, init, 1.0);
    // Replay the step's sampling to recover the trajectories it trained on.
    std::mt19937_64 replay(seed);
    std::vector<semdiv::Trajectory> trajs;
    for (std::size_t i = 0; i < prompts_.size() * cfg.group_size; ++i) {
      trajs.push_back(semdiv::sample_trajectory(policy, replay));
    }
    const double before = semdiv::tokenwise_kl(policy, reference, trajs);
    const auto stats = step(policy, reference, cfg, seed);
    EXPECT_NEAR(stats.kl, before, 1e-12);
    EXPECT_LT(semdiv::tokenwise_kl(policy, reference, trajs), before) << "seed " << seed;
  }
}

TEST_F(GrpoStep, ConstantRewardsMoveOnlyThroughKl) {
  const std::size_t k = tasks_[0].templates.size();
  semdiv::TemplatePolicy policy(k, 3);
  const semdiv::TemplatePolicy reference = policy;
  semdiv::GrpoConfig cfg;
  std::mt19937_64 rng(1);
  const semdiv::Scorer constant = [](const std::string&, const std::string&) { return semdiv::ScoreDetail{}; };
  semdiv::grpo_step(policy, reference, prompts_, constant, {}, cfg, rng);
  for (double x : policy.params()) EXPECT_EQ(x, 0.0);
}

TEST_F(GrpoStep, SameSeedSameStats) {
  const std::size_t k = tasks_[0].templates.size();
  semdiv::TemplatePolicy a(k, 3);
  semdiv::TemplatePolicy b(k, 3);
  const semdiv::TemplatePolicy ref(k, 3);
  const semdiv::GrpoConfig cfg;
  const auto sa = step(a, ref, cfg, 5);
  const auto sb = step(b, ref, cfg, 5);
  EXPECT_EQ(semdiv::to_json(sa).dump(), semdiv::to_json(sb).dump());
  EXPECT_TRUE(std::equal(a.params().begin(), a.params().end(), b.params().begin()));
}

}  // namespace
