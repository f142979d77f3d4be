#pragma once

// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The semdiv Authors

/**
 * @file normalize.hpp
 * @brief Batchwise reward normalization, aggregation, group advantages.
 *
 * Per component k over the N trajectories of a batch (population moments):
 *
 *   R̃_k = (R_k − μ_k) / (σ_k + ε)   if σ_k > ε
 *   R̃_k =  R_k − μ_k                otherwise
 *
 * The scalar reward is Σ_k w_k R̃_k. Within each prompt's group of G samples
 * the advantage is (R_i − μ_b) / (σ_b + ε), again with the population std.
 */

#include "rewards.hpp"

#include <array>
#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

namespace semdiv {

inline constexpr std::size_t kNumComponents = 4;
inline constexpr std::array<const char*, kNumComponents> kComponentNames = {"oc", "re", "fa", "sd"};

inline double& component(RewardVector& r, std::size_t k) {
  switch (k) {
    case 0: return r.oc;
    case 1: return r.re;
    case 2: return r.fa;
    default: return r.sd;
  }
}

inline double component(const RewardVector& r, std::size_t k) {
  return component(const_cast<RewardVector&>(r), k);
}

namespace detail {

// Mean taken relative to the first value, so constant data yields it exactly.
template <class At>
double shifted_mean(std::size_t n, At at) {
  const double x0 = at(0);
  double sum = 0.0;
  for (std::size_t i = 1; i < n; ++i) sum += at(i) - x0;
  return x0 + sum / static_cast<double>(n);
}

}  // namespace detail

struct NormalizationStats {
  std::array<double, kNumComponents> mean{};
  std::array<double, kNumComponents> stddev{};
  double epsilon = 1e-8;
};

struct NormalizedBatch {
  std::vector<RewardVector> rewards;
  NormalizationStats stats;
};

inline NormalizedBatch batch_normalize(std::span<const RewardVector> rewards, double epsilon = 1e-8) {
  if (rewards.empty()) throw std::invalid_argument("batch_normalize: empty batch");
  if (!(epsilon > 0.0)) throw std::invalid_argument("batch_normalize: epsilon must be positive");
  const double n = static_cast<double>(rewards.size());
  NormalizedBatch out;
  out.stats.epsilon = epsilon;
  out.rewards.assign(rewards.begin(), rewards.end());
  for (std::size_t k = 0; k < kNumComponents; ++k) {
    const double mu = detail::shifted_mean(rewards.size(), [&](std::size_t i) { return component(rewards[i], k); });
    double sq = 0.0;
    for (const auto& r : rewards) {
      const double d = component(r, k) - mu;
      sq += d * d;
    }
    const double sigma = std::sqrt(sq / n);
    out.stats.mean[k] = mu;
    out.stats.stddev[k] = sigma;
    for (auto& r : out.rewards) {
      double& v = component(r, k);
      v = sigma > epsilon ? (v - mu) / (sigma + epsilon) : v - mu;
    }
  }
  return out;
}

struct AggregationWeights {
  double w_oc = 1.0;
  double w_re = 1.0;
  double w_fa = 1.0;
  double w_sd = 1.0;

  void validate() const {
    for (double w : {w_oc, w_re, w_fa, w_sd}) {
      if (!std::isfinite(w)) throw std::invalid_argument("aggregation weights must be finite");
    }
  }
};

inline double aggregate(const RewardVector& normalized, const AggregationWeights& w) {
  return w.w_oc * normalized.oc + w.w_re * normalized.re + w.w_fa * normalized.fa + w.w_sd * normalized.sd;
}

inline std::vector<double> group_advantages(std::span<const double> rewards, double epsilon = 1e-8) {
  if (rewards.size() < 2) throw std::invalid_argument("group_advantages: group size must be >= 2");
  const double g = static_cast<double>(rewards.size());
  const double mu = detail::shifted_mean(rewards.size(), [&](std::size_t i) { return rewards[i]; });
  double sq = 0.0;
  for (double r : rewards) sq += (r - mu) * (r - mu);
  const double sigma = std::sqrt(sq / g);
  std::vector<double> adv;
  adv.reserve(rewards.size());
  for (double r : rewards) adv.push_back((r - mu) / (sigma + epsilon));
  return adv;
}

}  // namespace semdiv
