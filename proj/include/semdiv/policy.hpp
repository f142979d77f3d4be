#pragma once

// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The semdiv Authors

/**
 * @file policy.hpp
 * @brief Exactly differentiable template policy.
 *
 * A completion is generated as a short sequence of categorical decisions:
 *
 *   slot s = 0..max_slots-1   choose one of K strategy templates, or stop
 *   final                     point at one of the emitted blocks (its outcome
 *                             becomes the final answer) or omit the final tag
 *
 * Slot s has its own K+1 logits. The final-answer step is conditioned on
 * what was emitted: candidate j (an emitted block with template t) has logit
 * pointer[t], the omit option has logit `none`. Log-probabilities are exact
 * sums of log-softmax terms and their gradients are closed-form, as is the
 * per-step KL to a reference policy with the same shape.
 *
 * Parameter layout: [slot 0 | slot 1 | ... | pointer (K) | none (1)].
 */

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <random>
#include <span>
#include <stdexcept>
#include <vector>

namespace semdiv {

inline std::vector<double> log_softmax(std::span<const double> logits) {
  const double mx = *std::max_element(logits.begin(), logits.end());
  double z = 0.0;
  for (double x : logits) z += std::exp(x - mx);
  const double lz = mx + std::log(z);
  std::vector<double> out(logits.size());
  for (std::size_t i = 0; i < logits.size(); ++i) out[i] = logits[i] - lz;
  return out;
}

inline std::vector<double> softmax(std::span<const double> logits) {
  auto out = log_softmax(logits);
  for (double& x : out) x = std::exp(x);
  return out;
}

/// KL(softmax(p_logits) || softmax(q_logits)) over one finite action set.
inline double categorical_kl(std::span<const double> p_logits, std::span<const double> q_logits) {
  const auto lp = log_softmax(p_logits);
  const auto lq = log_softmax(q_logits);
  double kl = 0.0;
  for (std::size_t i = 0; i < lp.size(); ++i) kl += std::exp(lp[i]) * (lp[i] - lq[i]);
  return std::max(0.0, kl);
}

class TemplatePolicy {
 public:
  TemplatePolicy() = default;

  /// Uniform policy (all logits zero).
  TemplatePolicy(std::size_t n_templates, std::size_t max_slots)
      : n_templates_(n_templates), max_slots_(max_slots),
        params_(max_slots * (n_templates + 1) + n_templates + 1, 0.0) {
    if (n_templates == 0) throw std::invalid_argument("TemplatePolicy: need at least one template");
    if (max_slots == 0) throw std::invalid_argument("TemplatePolicy: need at least one slot");
  }

  std::size_t n_templates() const noexcept { return n_templates_; }
  std::size_t max_slots() const noexcept { return max_slots_; }
  std::size_t slot_actions() const noexcept { return n_templates_ + 1; }
  std::size_t stop_action() const noexcept { return n_templates_; }
  std::size_t n_params() const noexcept { return params_.size(); }

  std::size_t slot_offset(std::size_t slot) const noexcept { return slot * slot_actions(); }
  std::size_t pointer_offset() const noexcept { return max_slots_ * slot_actions(); }
  std::size_t none_offset() const noexcept { return pointer_offset() + n_templates_; }

  std::span<double> params() noexcept { return params_; }
  std::span<const double> params() const noexcept { return params_; }

  std::span<const double> slot_logits(std::size_t slot) const {
    return std::span<const double>(params_).subspan(slot_offset(slot), slot_actions());
  }
  std::span<double> slot_logits(std::size_t slot) {
    return std::span<double>(params_).subspan(slot_offset(slot), slot_actions());
  }
  double& pointer_logit(std::size_t tid) { return params_[pointer_offset() + tid]; }
  double pointer_logit(std::size_t tid) const { return params_[pointer_offset() + tid]; }
  double& none_logit() { return params_[none_offset()]; }
  double none_logit() const { return params_[none_offset()]; }

  bool same_action_space(const TemplatePolicy& other) const noexcept {
    return n_templates_ == other.n_templates_ && max_slots_ == other.max_slots_;
  }

 private:
  std::size_t n_templates_ = 0;
  std::size_t max_slots_ = 0;
  std::vector<double> params_;
};

/// The decisions of one sampled completion.
struct Trajectory {
  std::vector<std::size_t> slot_actions;  ///< visited slots; a trailing stop is included
  std::size_t final_choice = 0;           ///< < emitted().size(): copy that block; == size: omit

  std::vector<std::size_t> emitted(std::size_t stop_action) const {
    std::vector<std::size_t> out;
    for (auto a : slot_actions) {
      if (a != stop_action) out.push_back(a);
    }
    return out;
  }

  friend bool operator==(const Trajectory&, const Trajectory&) = default;
};

namespace detail {

inline std::vector<double> final_logits(const TemplatePolicy& policy, const std::vector<std::size_t>& emitted) {
  std::vector<double> z;
  z.reserve(emitted.size() + 1);
  for (auto tid : emitted) z.push_back(policy.pointer_logit(tid));
  z.push_back(policy.none_logit());
  return z;
}

inline void check_trajectory(const TemplatePolicy& policy, const Trajectory& traj) {
  if (traj.slot_actions.empty() || traj.slot_actions.size() > policy.max_slots()) {
    throw std::invalid_argument("trajectory visits an invalid number of slots");
  }
  for (std::size_t s = 0; s < traj.slot_actions.size(); ++s) {
    const auto a = traj.slot_actions[s];
    if (a > policy.stop_action()) throw std::invalid_argument("trajectory action out of range");
    if (a == policy.stop_action() && s + 1 != traj.slot_actions.size()) {
      throw std::invalid_argument("trajectory continues after stop");
    }
  }
}

// Scatters a gradient over final-step logits back onto parameters.
inline void scatter_final(const TemplatePolicy& policy, const std::vector<std::size_t>& emitted,
                          std::span<const double> dz, std::span<double> grad) {
  for (std::size_t j = 0; j < emitted.size(); ++j) grad[policy.pointer_offset() + emitted[j]] += dz[j];
  grad[policy.none_offset()] += dz.back();
}

}  // namespace detail

/// Per-decision log-probabilities; the last entry is the final-answer step.
inline std::vector<double> step_log_probs(const TemplatePolicy& policy, const Trajectory& traj) {
  detail::check_trajectory(policy, traj);
  std::vector<double> out;
  out.reserve(traj.slot_actions.size() + 1);
  for (std::size_t s = 0; s < traj.slot_actions.size(); ++s) {
    out.push_back(log_softmax(policy.slot_logits(s))[traj.slot_actions[s]]);
  }
  const auto emitted = traj.emitted(policy.stop_action());
  if (traj.final_choice > emitted.size()) throw std::invalid_argument("final choice out of range");
  out.push_back(log_softmax(detail::final_logits(policy, emitted))[traj.final_choice]);
  return out;
}

inline double trajectory_log_prob(const TemplatePolicy& policy, const Trajectory& traj) {
  const auto steps = step_log_probs(policy, traj);
  return std::accumulate(steps.begin(), steps.end(), 0.0);
}

/// grad += scale · ∇_θ log π_θ(traj).
inline void accumulate_log_prob_gradient(const TemplatePolicy& policy, const Trajectory& traj, double scale,
                                         std::span<double> grad) {
  for (std::size_t s = 0; s < traj.slot_actions.size(); ++s) {
    const auto p = softmax(policy.slot_logits(s));
    const std::size_t off = policy.slot_offset(s);
    for (std::size_t a = 0; a < p.size(); ++a) {
      grad[off + a] += scale * ((a == traj.slot_actions[s] ? 1.0 : 0.0) - p[a]);
    }
  }
  const auto emitted = traj.emitted(policy.stop_action());
  const auto p = softmax(detail::final_logits(policy, emitted));
  std::vector<double> dz(p.size());
  for (std::size_t j = 0; j < p.size(); ++j) dz[j] = scale * ((j == traj.final_choice ? 1.0 : 0.0) - p[j]);
  detail::scatter_final(policy, emitted, dz, grad);
}

/// Σ_t KL(π_θ^(t) || π_ref^(t)) over the decision steps visited by `traj`.
inline double trajectory_kl(const TemplatePolicy& policy, const TemplatePolicy& reference, const Trajectory& traj) {
  if (!policy.same_action_space(reference)) throw std::invalid_argument("KL: action-space mismatch");
  double kl = 0.0;
  for (std::size_t s = 0; s < traj.slot_actions.size(); ++s) {
    kl += categorical_kl(policy.slot_logits(s), reference.slot_logits(s));
  }
  const auto emitted = traj.emitted(policy.stop_action());
  kl += categorical_kl(detail::final_logits(policy, emitted), detail::final_logits(reference, emitted));
  return kl;
}

/// grad += scale · ∇_θ Σ_t KL(π_θ^(t) || π_ref^(t)).
inline void accumulate_kl_gradient(const TemplatePolicy& policy, const TemplatePolicy& reference,
                                   const Trajectory& traj, double scale, std::span<double> grad) {
  // d KL(softmax(x) || q) / dx_i = p_i (log p_i − log q_i − KL)
  const auto step = [&](std::span<const double> x, std::span<const double> y) {
    const auto lp = log_softmax(x);
    const auto lq = log_softmax(y);
    double kl = 0.0;
    for (std::size_t i = 0; i < lp.size(); ++i) kl += std::exp(lp[i]) * (lp[i] - lq[i]);
    std::vector<double> d(lp.size());
    for (std::size_t i = 0; i < lp.size(); ++i) d[i] = scale * std::exp(lp[i]) * (lp[i] - lq[i] - kl);
    return d;
  };
  for (std::size_t s = 0; s < traj.slot_actions.size(); ++s) {
    const auto d = step(policy.slot_logits(s), reference.slot_logits(s));
    const std::size_t off = policy.slot_offset(s);
    for (std::size_t a = 0; a < d.size(); ++a) grad[off + a] += d[a];
  }
  const auto emitted = traj.emitted(policy.stop_action());
  const auto d = step(detail::final_logits(policy, emitted), detail::final_logits(reference, emitted));
  detail::scatter_final(policy, emitted, d, grad);
}

/// Mean over trajectories of the summed per-step KL.
inline double tokenwise_kl(const TemplatePolicy& policy, const TemplatePolicy& reference,
                           std::span<const Trajectory> trajectories) {
  if (!policy.same_action_space(reference)) throw std::invalid_argument("KL: action-space mismatch");
  if (trajectories.empty()) return 0.0;
  double sum = 0.0;
  for (const auto& t : trajectories) sum += trajectory_kl(policy, reference, t);
  return sum / static_cast<double>(trajectories.size());
}

// ---------------------------------------------------------------------------
// Decoding
// ---------------------------------------------------------------------------

enum class Decoding { sample, greedy };

namespace detail {

inline std::size_t draw(std::span<const double> logits, Decoding mode, std::mt19937_64& rng) {
  if (mode == Decoding::greedy) {
    return static_cast<std::size_t>(std::max_element(logits.begin(), logits.end()) - logits.begin());
  }
  const auto p = softmax(logits);
  const double u = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
  double acc = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    acc += p[i];
    if (u < acc) return i;
  }
  // u landed in the rounding gap above the last cumulative sum
  for (std::size_t i = p.size(); i-- > 0;) {
    if (p[i] > 0.0) return i;
  }
  return p.size() - 1;
}

}  // namespace detail

inline Trajectory sample_trajectory(const TemplatePolicy& policy, std::mt19937_64& rng,
                                    Decoding mode = Decoding::sample) {
  Trajectory traj;
  for (std::size_t s = 0; s < policy.max_slots(); ++s) {
    const std::size_t a = detail::draw(policy.slot_logits(s), mode, rng);
    traj.slot_actions.push_back(a);
    if (a == policy.stop_action()) break;
  }
  const auto emitted = traj.emitted(policy.stop_action());
  traj.final_choice = detail::draw(detail::final_logits(policy, emitted), mode, rng);
  return traj;
}

}  // namespace semdiv
