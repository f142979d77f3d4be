#pragma once

// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The semdiv Authors

/**
 * @file metrics.hpp
 * @brief ACC, S-ACC, mean strategy count and mean token count.
 */

#include "canonical.hpp"
#include "schema.hpp"

#include <json.hpp>

#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace semdiv {

/// canonical: compare canonical numeric forms; exact: compare trimmed strings.
enum class AnswerMatch { canonical, exact };

inline AnswerMatch parse_answer_match(std::string_view s) {
  if (s == "canonical") return AnswerMatch::canonical;
  if (s == "exact") return AnswerMatch::exact;
  throw std::invalid_argument("unknown answer match mode: " + std::string(s));
}

inline const char* to_string(AnswerMatch m) { return m == AnswerMatch::canonical ? "canonical" : "exact"; }

inline bool answers_match(std::string_view answer, std::string_view gold, AnswerMatch mode) {
  if (mode == AnswerMatch::canonical) return numeric_equal(answer, gold);
  return detail::trim_copy(answer) == detail::trim_copy(gold);
}

struct EvalItem {
  bool acc_hit = false;
  bool s_acc_hit = false;
  std::size_t n_strat = 0;
  std::size_t tokens = 0;
};

struct EvalReport {
  double acc = 0.0;    ///< percent
  double s_acc = 0.0;  ///< percent
  double n_str_mean = 0.0;
  double tok_mean = 0.0;
  std::size_t n_items = 0;
  std::vector<EvalItem> per_item;
};

namespace detail {

inline void check_pairs(std::size_t outputs, std::size_t golds) {
  if (outputs != golds) throw std::invalid_argument("metrics: outputs and golds differ in length");
  if (outputs == 0) throw std::invalid_argument("metrics: empty evaluation set");
}

}  // namespace detail

inline bool acc_hit(const ParsedCompletion& p, std::string_view gold, AnswerMatch mode = AnswerMatch::canonical) {
  return p.final_answer && answers_match(*p.final_answer, gold, mode);
}

inline bool s_acc_hit(const ParsedCompletion& p, std::string_view gold, AnswerMatch mode = AnswerMatch::canonical) {
  for (const auto& b : p.blocks) {
    if (answers_match(b.outcome, gold, mode)) return true;
  }
  return false;
}

inline double accuracy(std::span<const ParsedCompletion> outputs, std::span<const std::string> golds,
                       AnswerMatch mode = AnswerMatch::canonical) {
  detail::check_pairs(outputs.size(), golds.size());
  std::size_t hits = 0;
  for (std::size_t i = 0; i < outputs.size(); ++i) hits += acc_hit(outputs[i], golds[i], mode) ? 1 : 0;
  return 100.0 * static_cast<double>(hits) / static_cast<double>(outputs.size());
}

inline double strategy_accuracy(std::span<const ParsedCompletion> outputs, std::span<const std::string> golds,
                                AnswerMatch mode = AnswerMatch::canonical) {
  detail::check_pairs(outputs.size(), golds.size());
  std::size_t hits = 0;
  for (std::size_t i = 0; i < outputs.size(); ++i) hits += s_acc_hit(outputs[i], golds[i], mode) ? 1 : 0;
  return 100.0 * static_cast<double>(hits) / static_cast<double>(outputs.size());
}

inline double mean_strategies(std::span<const ParsedCompletion> outputs) {
  if (outputs.empty()) throw std::invalid_argument("metrics: empty evaluation set");
  double sum = 0.0;
  for (const auto& p : outputs) sum += static_cast<double>(p.n_strat);
  return sum / static_cast<double>(outputs.size());
}

inline double mean_tokens(std::span<const ParsedCompletion> outputs) {
  if (outputs.empty()) throw std::invalid_argument("metrics: empty evaluation set");
  double sum = 0.0;
  for (const auto& p : outputs) sum += static_cast<double>(p.source.token_count);
  return sum / static_cast<double>(outputs.size());
}

inline EvalReport evaluate(std::span<const ParsedCompletion> outputs, std::span<const std::string> golds,
                           AnswerMatch mode = AnswerMatch::canonical) {
  detail::check_pairs(outputs.size(), golds.size());
  EvalReport r;
  r.n_items = outputs.size();
  r.per_item.reserve(outputs.size());
  for (std::size_t i = 0; i < outputs.size(); ++i) {
    r.per_item.push_back({acc_hit(outputs[i], golds[i], mode), s_acc_hit(outputs[i], golds[i], mode),
                          outputs[i].n_strat, outputs[i].source.token_count});
  }
  r.acc = accuracy(outputs, golds, mode);
  r.s_acc = strategy_accuracy(outputs, golds, mode);
  r.n_str_mean = mean_strategies(outputs);
  r.tok_mean = mean_tokens(outputs);
  return r;
}

inline nlohmann::json to_json(const EvalReport& r, bool with_items = false) {
  nlohmann::json j = {{"acc", r.acc},           {"s_acc", r.s_acc},      {"n_str_mean", r.n_str_mean},
                      {"tok_mean", r.tok_mean}, {"n_items", r.n_items}};
  if (with_items) {
    nlohmann::json items = nlohmann::json::array();
    for (const auto& it : r.per_item) {
      items.push_back({{"acc_hit", it.acc_hit}, {"s_acc_hit", it.s_acc_hit}, {"n_strat", it.n_strat},
                       {"tokens", it.tokens}});
    }
    j["per_item"] = std::move(items);
  }
  return j;
}

}  // namespace semdiv
