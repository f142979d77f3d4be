#pragma once

// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The semdiv Authors

/**
 * @file diversity.hpp
 * @brief Semantic geometry of a strategy set.
 *
 * For the embeddings H = (h_1, ..., h_m) of a completion's nonempty reasoning
 * texts:
 *
 *   avg similarity  mean of κ(h_i, h_j) over pairs i < j        (m >= 2)
 *   Div(H)          clamp(1 - avg similarity, 0, 1); 1 if m == 1; 0 if m == 0
 *   Uniq(H; δ)      size of the set U grown greedily in strategy order, where
 *                   h_i joins iff max_{j in U} κ(h_i, h_j) <= δ (the first
 *                   embedding always joins)
 *   g(H)            Uniq(H; δ) * Div(H)
 */

#include "embed.hpp"

#include <algorithm>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace semdiv {

struct StrategySet {
  std::vector<EmbeddingVector> embeddings;  ///< strategy order

  std::size_t m_eff() const noexcept { return embeddings.size(); }
  bool empty() const noexcept { return embeddings.empty(); }
};

struct DiversityParams {
  double delta = 0.80;

  void validate() const {
    if (!(delta > 0.0 && delta < 1.0)) throw std::invalid_argument("delta must lie in (0, 1)");
  }
};

/// Mean pairwise cosine similarity. Requires at least two embeddings.
inline double avg_pairwise_similarity(const StrategySet& h) {
  const std::size_t m = h.m_eff();
  if (m < 2) throw std::domain_error("average pairwise similarity needs at least two embeddings");
  double sum = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = i + 1; j < m; ++j) sum += cosine(h.embeddings[i], h.embeddings[j]);
  }
  return sum / (static_cast<double>(m) * static_cast<double>(m - 1) / 2.0);
}

inline double diversity(const StrategySet& h) {
  if (h.m_eff() == 0) return 0.0;
  if (h.m_eff() == 1) return 1.0;
  return std::max(0.0, std::min(1.0, 1.0 - avg_pairwise_similarity(h)));
}

/// Indices (0-based, strategy order) of the greedy δ-unique representatives.
inline std::vector<std::size_t> unique_representatives(const StrategySet& h, const DiversityParams& params) {
  params.validate();
  std::vector<std::size_t> reps;
  for (std::size_t i = 0; i < h.m_eff(); ++i) {
    bool admit = true;
    for (const std::size_t j : reps) {
      if (cosine(h.embeddings[i], h.embeddings[j]) > params.delta) {
        admit = false;
        break;
      }
    }
    if (admit) reps.push_back(i);
  }
  return reps;
}

inline std::size_t unique_count(const StrategySet& h, const DiversityParams& params) {
  return unique_representatives(h, params).size();
}

/// g(H) = Uniq(H; δ) · Div(H).
inline double exploration_score(const StrategySet& h, const DiversityParams& params) {
  return static_cast<double>(unique_count(h, params)) * diversity(h);
}

struct DiversitySummary {
  std::size_t m_eff = 0;
  std::size_t uniq = 0;
  double div = 0.0;
  double g = 0.0;
};

inline DiversitySummary summarize(const StrategySet& h, const DiversityParams& params) {
  DiversitySummary s;
  s.m_eff = h.m_eff();
  s.uniq = unique_count(h, params);
  s.div = diversity(h);
  s.g = static_cast<double>(s.uniq) * s.div;
  return s;
}

}  // namespace semdiv
