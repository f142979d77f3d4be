#pragma once

// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The semdiv Authors

/**
 * @file rewards.hpp
 * @brief Reward components for structured multi-strategy completions.
 *
 * The four raw components for a completion a with gold answer y:
 *
 *   oc  λ_oc · 1{N(final(a)) = N(y)}
 *   re  λ_re · χ(a)               χ(a) = 1{some strategy outcome is N-equal to y}
 *   fa  min(1, γ_s·n_strat) + γ_a·final(a) + γ_c·complete(a)
 *   sd  α·χ(a) + (1 − χ(a))·min(β, ρ·g(H))
 *
 * Two baseline rewards are provided for comparison: the count-based
 * explore/exploit term (g(H) replaced by the number of valid blocks) and a
 * hinge length penalty for the correctness+format+length recipe.
 */

#include "diversity.hpp"
#include "embed.hpp"
#include "schema.hpp"

#include <algorithm>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace semdiv {

struct RewardParams {
  double lambda_oc = 1.0;
  double lambda_re = 1.0;
  double gamma_s = 0.5;
  double gamma_a = 0.5;
  double gamma_c = 0.5;
  double alpha = 1.0;     ///< collapse bonus once a strategy is correct
  double beta_cap = 0.5;  ///< cap on the exploration reward
  double rho = 0.1;       ///< exploration growth rate
  double delta = 0.80;    ///< similarity threshold for Uniq

  void validate() const {
    for (double v : {lambda_oc, lambda_re, gamma_s, gamma_a, gamma_c, alpha, beta_cap, rho}) {
      if (!(v >= 0.0)) throw std::invalid_argument("reward parameters must be nonnegative");
    }
    DiversityParams{delta}.validate();
  }

  DiversityParams diversity() const { return DiversityParams{delta}; }
};

struct BaselineParams {
  double w_oc = 1.0;
  double w_fa = 1.0;
  double w_re = 1.0;
  double w_rd = 1.0;
  double w_l = 1.0;
  std::size_t length_target = 512;
  double length_penalty_scale = 0.001;
};

/// Raw, pre-normalization component scores. Under the baseline schemes the
/// fourth channel carries that scheme's extra term (count-based explore
/// reward or length penalty) instead of R_sd.
struct RewardVector {
  double oc = 0.0;
  double re = 0.0;
  double fa = 0.0;
  double sd = 0.0;

  friend bool operator==(const RewardVector&, const RewardVector&) = default;
};

// ---------------------------------------------------------------------------
// Components
// ---------------------------------------------------------------------------

/// χ(a): some strategy outcome canonicalizes equal to the gold answer.
inline bool has_correct_strategy(const ParsedCompletion& p, std::string_view gold) {
  return std::any_of(p.blocks.begin(), p.blocks.end(),
                     [&](const StrategyBlock& b) { return numeric_equal(b.outcome, gold); });
}

inline bool final_is_correct(const ParsedCompletion& p, std::string_view gold) {
  return p.final_answer && numeric_equal(*p.final_answer, gold);
}

inline double reward_oc(const ParsedCompletion& p, std::string_view gold, const RewardParams& params) {
  return final_is_correct(p, gold) ? params.lambda_oc : 0.0;
}

inline double reward_re(const ParsedCompletion& p, std::string_view gold, const RewardParams& params) {
  return has_correct_strategy(p, gold) ? params.lambda_re : 0.0;
}

inline double reward_fa(const ParsedCompletion& p, const RewardParams& params) {
  const double structure = std::min(1.0, params.gamma_s * static_cast<double>(p.n_strat));
  return structure + (p.has_final() ? params.gamma_a : 0.0) + (p.complete() ? params.gamma_c : 0.0);
}

/// Exploration reward from a precomputed χ and g(H).
inline double exploration_reward(bool chi, double g, const RewardParams& params) {
  return chi ? params.alpha : std::min(params.beta_cap, params.rho * g);
}

inline double reward_sd(const ParsedCompletion& p, std::string_view gold, const StrategySet& h,
                        const RewardParams& params) {
  if (has_correct_strategy(p, gold)) return params.alpha;
  return exploration_reward(false, exploration_score(h, params.diversity()), params);
}

/// Embeddings of the nonempty reasoning texts, in strategy order.
inline StrategySet build_strategy_set(const ParsedCompletion& p, Embedder& embedder) {
  std::vector<std::string> texts;
  for (const auto& b : p.blocks) {
    if (!b.reasoning.empty()) texts.push_back(b.reasoning);
  }
  StrategySet h;
  if (!texts.empty()) h.embeddings = embedder.embed_batch(texts);
  return h;
}

inline RewardVector reward_vector(std::string_view text, std::string_view gold, const RewardParams& params,
                                  Embedder& embedder, const ParseOptions& parse_options = {}) {
  const ParsedCompletion p = parse(text, parse_options);
  const StrategySet h = build_strategy_set(p, embedder);
  const double g = exploration_score(h, params.diversity());
  const bool chi = has_correct_strategy(p, gold);
  RewardVector r;
  r.oc = reward_oc(p, gold, params);
  r.re = chi ? params.lambda_re : 0.0;
  r.fa = reward_fa(p, params);
  r.sd = exploration_reward(chi, g, params);
  return r;
}

// ---------------------------------------------------------------------------
// Baselines
// ---------------------------------------------------------------------------

/// R_L = −scale · max(0, tokens − target).
inline double length_penalty(std::size_t token_count, const BaselineParams& bparams) {
  if (token_count <= bparams.length_target) return 0.0;
  return -bparams.length_penalty_scale * static_cast<double>(token_count - bparams.length_target);
}

inline double reward_cfl(std::string_view text, std::string_view gold, const BaselineParams& bparams,
                         const RewardParams& params, const ParseOptions& parse_options = {}) {
  const ParsedCompletion p = parse(text, parse_options);
  return bparams.w_oc * reward_oc(p, gold, params) + bparams.w_fa * reward_fa(p, params) +
         bparams.w_l * length_penalty(p.source.token_count, bparams);
}

/// Count-based explore/exploit: α·χ + (1 − χ)·min(β, ρ·n_val).
inline double reward_cfee_rd(const ParsedCompletion& p, std::string_view gold, const RewardParams& params) {
  if (has_correct_strategy(p, gold)) return params.alpha;
  return std::min(params.beta_cap, params.rho * static_cast<double>(p.n_strat));
}

/// Weighted scalar CFEE reward (unnormalized).
inline double reward_cfee(const ParsedCompletion& p, std::string_view gold, const BaselineParams& bparams,
                          const RewardParams& params) {
  return bparams.w_oc * reward_oc(p, gold, params) + bparams.w_fa * reward_fa(p, params) +
         bparams.w_re * reward_re(p, gold, params) + bparams.w_rd * reward_cfee_rd(p, gold, params);
}

// ---------------------------------------------------------------------------
// Scheme dispatch
// ---------------------------------------------------------------------------

enum class RewardScheme { sde2, cfee, cfl };

inline const char* to_string(RewardScheme s) {
  switch (s) {
    case RewardScheme::sde2: return "sde2";
    case RewardScheme::cfee: return "cfee";
    case RewardScheme::cfl: return "cfl";
  }
  return "?";
}

inline RewardScheme parse_scheme(std::string_view s) {
  if (s == "sde2") return RewardScheme::sde2;
  if (s == "cfee") return RewardScheme::cfee;
  if (s == "cfl") return RewardScheme::cfl;
  throw std::invalid_argument("unknown reward scheme: " + std::string(s));
}

/// Everything the scorer knows about one completion.
struct ScoreDetail {
  RewardVector raw;
  DiversitySummary geometry;
  bool chi = false;
  bool final_correct = false;
  std::size_t n_strat = 0;
  std::size_t n_blocks = 0;
  std::size_t tokens = 0;
};

/// Scores one completion under `scheme`. The fourth channel holds R_sd
/// (sde2), the count-based explore reward (cfee) or the length penalty (cfl);
/// the geometry is always computed so that reports stay comparable.
inline ScoreDetail score_completion(std::string_view text, std::string_view gold, RewardScheme scheme,
                                    const RewardParams& params, const BaselineParams& bparams,
                                    Embedder& embedder, const ParseOptions& parse_options = {}) {
  const ParsedCompletion p = parse(text, parse_options);
  const StrategySet h = build_strategy_set(p, embedder);
  ScoreDetail d;
  d.geometry = summarize(h, params.diversity());
  d.chi = has_correct_strategy(p, gold);
  d.final_correct = final_is_correct(p, gold);
  d.n_strat = p.n_strat;
  d.n_blocks = p.blocks.size();
  d.tokens = p.source.token_count;
  d.raw.oc = d.final_correct ? params.lambda_oc : 0.0;
  d.raw.re = d.chi ? params.lambda_re : 0.0;
  d.raw.fa = reward_fa(p, params);
  switch (scheme) {
    case RewardScheme::sde2: d.raw.sd = exploration_reward(d.chi, d.geometry.g, params); break;
    case RewardScheme::cfee: d.raw.sd = reward_cfee_rd(p, gold, params); break;
    case RewardScheme::cfl:
      d.raw.re = 0.0;
      d.raw.sd = length_penalty(d.tokens, bparams);
      break;
  }
  return d;
}

}  // namespace semdiv
