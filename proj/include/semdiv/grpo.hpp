#pragma once

// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The semdiv Authors

/**
 * @file grpo.hpp
 * @brief Clipped surrogate with tokenwise KL for the template policy.
 *
 * For samples (a_n, Â_n, log π_old(a_n)) and the objective
 *
 *   L(θ) = J_clip(θ) − β · KL(θ)
 *   J_clip = (1/N) Σ_n min(r_n Â_n, clip(r_n, 1−ε, 1+ε) Â_n),   r_n = π_θ(a_n)/π_old(a_n)
 *   KL     = (1/N) Σ_n Σ_t KL(π_θ^(t) || π_ref^(t))
 *
 * grpo_objective() evaluates L and grpo_gradient() returns its exact gradient;
 * the pair is what the finite-difference checks exercise.
 */

#include "policy.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <iostream>
#include <span>
#include <stdexcept>
#include <vector>

namespace semdiv {

inline constexpr double kRatioCeiling = 1e6;

/// exp(logp_new − logp_old), clamped at `ceiling` with a warning on stderr.
inline double importance_ratio(double logp_new, double logp_old, double ceiling = kRatioCeiling) {
  if (!std::isfinite(logp_new) || !std::isfinite(logp_old)) {
    throw std::invalid_argument("importance_ratio: non-finite log-probability");
  }
  const double diff = logp_new - logp_old;
  if (diff > std::log(ceiling)) {
    std::clog << "semdiv: importance ratio exp(" << diff << ") clamped to " << ceiling << '\n';
    return ceiling;
  }
  return std::exp(diff);
}

inline double clipped_term(double ratio, double advantage, double clip_epsilon) {
  const double clipped = std::clamp(ratio, 1.0 - clip_epsilon, 1.0 + clip_epsilon);
  return std::min(ratio * advantage, clipped * advantage);
}

inline double clipped_surrogate(std::span<const double> ratios, std::span<const double> advantages,
                                double clip_epsilon) {
  if (ratios.size() != advantages.size()) throw std::invalid_argument("clipped_surrogate: length mismatch");
  if (ratios.empty()) throw std::invalid_argument("clipped_surrogate: empty batch");
  double sum = 0.0;
  for (std::size_t i = 0; i < ratios.size(); ++i) sum += clipped_term(ratios[i], advantages[i], clip_epsilon);
  return sum / static_cast<double>(ratios.size());
}

struct GrpoConfig {
  double clip_epsilon = 0.2;
  double kl_coeff = 0.02;
  std::size_t group_size = 6;
  std::size_t batch_prompts = 4;
  double learning_rate = 0.05;
  std::size_t steps = 2000;
  std::size_t inner_epochs = 1;
  double epsilon = 1e-8;

  void validate() const {
    if (!(clip_epsilon > 0.0 && clip_epsilon < 1.0)) throw std::invalid_argument("clip epsilon must lie in (0, 1)");
    if (!(kl_coeff >= 0.0)) throw std::invalid_argument("kl_coeff must be nonnegative");
    if (group_size < 2) throw std::invalid_argument("group size must be >= 2");
    if (batch_prompts < 1) throw std::invalid_argument("batch must hold at least one prompt");
    if (!(learning_rate >= 0.0)) throw std::invalid_argument("learning rate must be nonnegative");
    if (inner_epochs < 1) throw std::invalid_argument("inner_epochs must be >= 1");
    if (!(epsilon > 0.0)) throw std::invalid_argument("epsilon must be positive");
  }
};

/// One scored trajectory frozen for the update.
struct GrpoSample {
  Trajectory traj;
  double logp_old = 0.0;
  double advantage = 0.0;
};

struct ObjectiveValue {
  double j_clip = 0.0;
  double kl = 0.0;
  double total = 0.0;  ///< j_clip − kl_coeff · kl
};

inline ObjectiveValue grpo_objective(const TemplatePolicy& policy, const TemplatePolicy& reference,
                                     std::span<const GrpoSample> samples, double clip_epsilon, double kl_coeff) {
  if (samples.empty()) throw std::invalid_argument("grpo_objective: no samples");
  ObjectiveValue v;
  for (const auto& s : samples) {
    const double r = importance_ratio(trajectory_log_prob(policy, s.traj), s.logp_old);
    v.j_clip += clipped_term(r, s.advantage, clip_epsilon);
    v.kl += trajectory_kl(policy, reference, s.traj);
  }
  const double n = static_cast<double>(samples.size());
  v.j_clip /= n;
  v.kl /= n;
  v.total = v.j_clip - kl_coeff * v.kl;
  return v;
}

/// Exact ∇_θ of grpo_objective().total. Samples whose min() selects the
/// clipped branch with the ratio outside [1−ε, 1+ε] contribute no surrogate
/// gradient; the same holds for ratios pinned at the ceiling.
inline std::vector<double> grpo_gradient(const TemplatePolicy& policy, const TemplatePolicy& reference,
                                         std::span<const GrpoSample> samples, double clip_epsilon,
                                         double kl_coeff) {
  if (samples.empty()) throw std::invalid_argument("grpo_gradient: no samples");
  std::vector<double> grad(policy.n_params(), 0.0);
  const double inv_n = 1.0 / static_cast<double>(samples.size());
  for (const auto& s : samples) {
    const double diff = trajectory_log_prob(policy, s.traj) - s.logp_old;
    const bool pinned = diff > std::log(kRatioCeiling);
    const double r = importance_ratio(diff + s.logp_old, s.logp_old);
    const double clipped = std::clamp(r, 1.0 - clip_epsilon, 1.0 + clip_epsilon);
    const bool surrogate_active = !pinned && (r * s.advantage <= clipped * s.advantage || clipped == r);
    if (surrogate_active && s.advantage != 0.0) {
      accumulate_log_prob_gradient(policy, s.traj, inv_n * s.advantage * r, grad);
    }
    if (kl_coeff != 0.0) accumulate_kl_gradient(policy, reference, s.traj, -kl_coeff * inv_n, grad);
  }
  return grad;
}

/// Distance of a ratio to the nearer clip boundary.
inline double clip_boundary_distance(double ratio, double clip_epsilon) {
  return std::min(std::abs(ratio - (1.0 - clip_epsilon)), std::abs(ratio - (1.0 + clip_epsilon)));
}

}  // namespace semdiv
