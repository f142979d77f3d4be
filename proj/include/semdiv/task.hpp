#pragma once

// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The semdiv Authors

/**
 * @file task.hpp
 * @brief Synthetic multi-strategy tasks with controllable paraphrase clusters.
 *
 * Every task offers the same K template slots, grouped into clusters. Each
 * cluster draws its pseudo-words from its own slice of the alphabet, so
 * reasoning texts from different clusters share no character n-grams; the
 * templates inside a cluster differ only in their leading words and are
 * near-duplicates. All templates of a cluster report that cluster's outcome.
 * Separation is checked with the reference embedder before a task is
 * accepted.
 */

#include "embed.hpp"
#include "policy.hpp"
#include "schema.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <random>
#include <set>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace semdiv {

struct TemplateSpec {
  std::size_t tid = 0;
  std::size_t cluster = 0;
  std::string reasoning;
  std::string outcome;
};

struct SyntheticTask {
  std::string id;
  std::string prompt;
  std::string gold;
  std::vector<TemplateSpec> templates;  ///< indexed by tid

  std::size_t n_clusters() const {
    std::size_t n = 0;
    for (const auto& t : templates) n = std::max(n, t.cluster + 1);
    return n;
  }
};

class UnsatisfiableSpec : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct TaskFamilySpec {
  std::vector<std::size_t> cluster_sizes{4, 3, 1};
  int gold_cluster = 2;                ///< -1: drawn uniformly per task
  std::size_t gold_clusters = 1;       ///< clusters sharing the gold outcome
  double unsolvable_rate = 0.0;        ///< fraction of tasks with no gold cluster
  std::size_t words_per_reasoning = 20;
  std::size_t paraphrase_words = 1;    ///< leading words rewritten per paraphrase
  std::size_t embed_dim = 256;
  double separation_delta = 0.80;
  std::size_t max_attempts = 32;

  std::size_t n_templates() const {
    std::size_t k = 0;
    for (auto s : cluster_sizes) k += s;
    return k;
  }

  void validate() const {
    if (cluster_sizes.empty()) throw std::invalid_argument("task family needs at least one cluster");
    for (auto s : cluster_sizes) {
      if (s == 0) throw std::invalid_argument("clusters must be nonempty");
    }
    if (cluster_sizes.size() > 13) throw UnsatisfiableSpec("at most 13 clusters fit disjoint alphabets");
    if (gold_cluster >= static_cast<int>(cluster_sizes.size()) || gold_cluster < -1) {
      throw std::invalid_argument("gold_cluster out of range");
    }
    if (gold_clusters > cluster_sizes.size()) throw std::invalid_argument("gold_clusters exceeds cluster count");
    if (!(unsolvable_rate >= 0.0 && unsolvable_rate <= 1.0)) {
      throw std::invalid_argument("unsolvable_rate must lie in [0, 1]");
    }
    if (paraphrase_words == 0 || words_per_reasoning <= paraphrase_words) {
      throw std::invalid_argument("need 0 < paraphrase_words < words_per_reasoning");
    }
    if (embed_dim < 8) throw std::invalid_argument("embed_dim must be >= 8");
    if (!(separation_delta > 0.0 && separation_delta < 1.0)) {
      throw std::invalid_argument("separation_delta must lie in (0, 1)");
    }
    if (max_attempts == 0) throw std::invalid_argument("max_attempts must be positive");
  }
};

namespace detail {

inline std::string alphabet_slice(std::size_t cluster, std::size_t n_clusters) {
  std::string letters;
  for (std::size_t i = 0; i < 26; ++i) {
    if (i % n_clusters == cluster) letters.push_back(static_cast<char>('a' + i));
  }
  return letters;
}

inline std::string pseudo_word(const std::string& letters, std::mt19937_64& rng) {
  std::uniform_int_distribution<std::size_t> len(3, 7);
  std::uniform_int_distribution<std::size_t> pick(0, letters.size() - 1);
  std::string w(len(rng), ' ');
  for (char& c : w) c = letters[pick(rng)];
  return w;
}

inline std::string join_words(const std::vector<std::string>& words) {
  std::string out;
  for (const auto& w : words) {
    if (!out.empty()) out.push_back(' ');
    out += w;
  }
  return out;
}

inline bool clusters_separated(const SyntheticTask& task, HashEmbedder& embedder, double delta) {
  std::vector<std::string> texts;
  for (const auto& t : task.templates) texts.push_back(t.reasoning);
  const auto e = embedder.embed_batch(texts);
  for (std::size_t i = 0; i < e.size(); ++i) {
    for (std::size_t j = i + 1; j < e.size(); ++j) {
      const double c = cosine(e[i], e[j]);
      const bool same = task.templates[i].cluster == task.templates[j].cluster;
      if (same ? !(c > delta) : !(c < delta)) return false;
    }
  }
  return true;
}

inline std::string task_id(std::size_t index) {
  std::string digits = std::to_string(index);
  if (digits.size() < 5) digits.insert(0, 5 - digits.size(), '0');
  return "t" + digits;
}

}  // namespace detail

/// Draws one task from `rng`. Throws UnsatisfiableSpec when no draw within
/// max_attempts passes the separation check.
inline SyntheticTask generate_task(const TaskFamilySpec& spec, std::size_t index, std::mt19937_64& rng) {
  spec.validate();
  const std::size_t n_clusters = spec.cluster_sizes.size();
  HashEmbedder embedder(spec.embed_dim);

  for (std::size_t attempt = 0; attempt < spec.max_attempts; ++attempt) {
    SyntheticTask task;
    task.id = detail::task_id(index);

    // Distinct outcome per cluster plus one spare value for unsolvable tasks.
    std::set<int> used;
    std::vector<std::string> outcomes;
    std::uniform_int_distribution<int> value(10, 999);
    while (outcomes.size() < n_clusters + 1) {
      const int v = value(rng);
      if (used.insert(v).second) outcomes.push_back(std::to_string(v));
    }

    std::vector<std::size_t> golds;
    const bool unsolvable =
        spec.gold_clusters == 0 || std::uniform_real_distribution<double>(0.0, 1.0)(rng) < spec.unsolvable_rate;
    if (!unsolvable) {
      std::size_t first = spec.gold_cluster >= 0
                              ? static_cast<std::size_t>(spec.gold_cluster)
                              : std::uniform_int_distribution<std::size_t>(0, n_clusters - 1)(rng);
      for (std::size_t k = 0; k < spec.gold_clusters; ++k) golds.push_back((first + k) % n_clusters);
      for (auto c : golds) outcomes[c] = outcomes[golds.front()];
      task.gold = outcomes[golds.front()];
    } else {
      task.gold = outcomes[n_clusters];
    }

    std::size_t tid = 0;
    for (std::size_t c = 0; c < n_clusters; ++c) {
      const std::string letters = detail::alphabet_slice(c, n_clusters);
      std::vector<std::string> base;
      for (std::size_t w = 0; w < spec.words_per_reasoning; ++w) base.push_back(detail::pseudo_word(letters, rng));
      for (std::size_t k = 0; k < spec.cluster_sizes[c]; ++k) {
        std::vector<std::string> words = base;
        if (k > 0) {
          for (std::size_t w = 0; w < spec.paraphrase_words; ++w) words[w] = detail::pseudo_word(letters, rng);
        }
        task.templates.push_back({tid++, c, detail::join_words(words), outcomes[c]});
      }
    }
    task.prompt = "Task " + task.id + ": recover the hidden value using any of " +
                  std::to_string(task.templates.size()) + " approaches.";
    if (detail::clusters_separated(task, embedder, spec.separation_delta)) return task;
  }
  throw UnsatisfiableSpec("could not separate clusters at the requested embedding dimension");
}

inline std::vector<SyntheticTask> generate_tasks(std::size_t n, const TaskFamilySpec& spec, std::uint64_t seed) {
  if (n == 0) throw std::invalid_argument("generate_tasks: n must be >= 1");
  std::mt19937_64 rng(seed);
  std::vector<SyntheticTask> tasks;
  tasks.reserve(n);
  for (std::size_t i = 0; i < n; ++i) tasks.push_back(generate_task(spec, i, rng));
  return tasks;
}

/// The first `round(0.8 n)` tasks train, the rest evaluate.
inline std::pair<std::vector<SyntheticTask>, std::vector<SyntheticTask>> split_tasks(
    const std::vector<SyntheticTask>& tasks, double train_fraction = 0.8) {
  const auto n_train = static_cast<std::size_t>(std::llround(train_fraction * static_cast<double>(tasks.size())));
  const auto mid = tasks.begin() + static_cast<std::ptrdiff_t>(std::min(n_train, tasks.size()));
  return {std::vector<SyntheticTask>(tasks.begin(), mid), std::vector<SyntheticTask>(mid, tasks.end())};
}

// ---------------------------------------------------------------------------
// Rendering policy decisions
// ---------------------------------------------------------------------------

inline CompletionSpec completion_spec(const SyntheticTask& task, const Trajectory& traj, std::size_t stop_action) {
  CompletionSpec spec;
  const auto emitted = traj.emitted(stop_action);
  for (auto tid : emitted) {
    if (tid >= task.templates.size()) throw std::out_of_range("trajectory references an unknown template");
    spec.blocks.push_back({task.templates[tid].reasoning, task.templates[tid].outcome});
  }
  if (traj.final_choice < emitted.size()) spec.final_answer = task.templates[emitted[traj.final_choice]].outcome;
  return spec;
}

inline std::string render_trajectory(const SyntheticTask& task, const Trajectory& traj, std::size_t stop_action) {
  return render(completion_spec(task, traj, stop_action));
}

/// Number of distinct clusters among the emitted templates.
inline std::size_t cluster_coverage(const SyntheticTask& task, const Trajectory& traj, std::size_t stop_action) {
  std::set<std::size_t> clusters;
  for (auto tid : traj.emitted(stop_action)) clusters.insert(task.templates.at(tid).cluster);
  return clusters.size();
}

struct SampledCompletion {
  Trajectory traj;
  std::string text;
  std::vector<double> step_log_probs;  ///< one per decision, final-answer step last
  double log_prob = 0.0;
};

/// G completions of `task` drawn from `policy` with a generator seeded by `seed`.
inline std::vector<SampledCompletion> policy_sample(const TemplatePolicy& policy, const SyntheticTask& task,
                                                    std::size_t g, std::uint64_t seed) {
  if (g < 2) throw std::invalid_argument("policy_sample: group size must be >= 2");
  if (task.templates.size() != policy.n_templates()) {
    throw std::invalid_argument("policy_sample: task does not match the policy's template count");
  }
  std::mt19937_64 rng(seed);
  std::vector<SampledCompletion> out;
  out.reserve(g);
  for (std::size_t i = 0; i < g; ++i) {
    SampledCompletion c;
    c.traj = sample_trajectory(policy, rng);
    c.text = render_trajectory(task, c.traj, policy.stop_action());
    c.step_log_probs = step_log_probs(policy, c.traj);
    for (double lp : c.step_log_probs) c.log_prob += lp;
    out.push_back(std::move(c));
  }
  return out;
}

// ---------------------------------------------------------------------------
// JSON
// ---------------------------------------------------------------------------

inline nlohmann::json to_json(const SyntheticTask& task) {
  nlohmann::json templates = nlohmann::json::array();
  for (const auto& t : task.templates) {
    templates.push_back({{"tid", t.tid}, {"cluster", t.cluster}, {"reasoning", t.reasoning}, {"outcome", t.outcome}});
  }
  return {{"id", task.id}, {"prompt", task.prompt}, {"gold", task.gold}, {"templates", templates}};
}

inline SyntheticTask task_from_json(const nlohmann::json& j) {
  SyntheticTask task;
  task.id = j.at("id").get<std::string>();
  task.prompt = j.value("prompt", std::string{});
  task.gold = j.at("gold").get<std::string>();
  for (const auto& t : j.at("templates")) {
    task.templates.push_back({t.at("tid").get<std::size_t>(), t.at("cluster").get<std::size_t>(),
                              t.at("reasoning").get<std::string>(), t.at("outcome").get<std::string>()});
  }
  std::sort(task.templates.begin(), task.templates.end(),
            [](const TemplateSpec& a, const TemplateSpec& b) { return a.tid < b.tid; });
  for (std::size_t i = 0; i < task.templates.size(); ++i) {
    if (task.templates[i].tid != i) throw std::invalid_argument("task " + task.id + ": template ids must be 0..K-1");
  }
  if (task.templates.empty()) throw std::invalid_argument("task " + task.id + ": no templates");
  return task;
}

inline nlohmann::json to_json(const TaskFamilySpec& s) {
  return {{"cluster_sizes", s.cluster_sizes},       {"gold_cluster", s.gold_cluster},
          {"gold_clusters", s.gold_clusters},       {"unsolvable_rate", s.unsolvable_rate},
          {"words_per_reasoning", s.words_per_reasoning}, {"paraphrase_words", s.paraphrase_words},
          {"embed_dim", s.embed_dim},               {"separation_delta", s.separation_delta}};
}

inline void update_from_json(TaskFamilySpec& s, const nlohmann::json& j) {
  if (j.contains("cluster_sizes")) s.cluster_sizes = j.at("cluster_sizes").get<std::vector<std::size_t>>();
  if (j.contains("gold_cluster")) s.gold_cluster = j.at("gold_cluster").get<int>();
  if (j.contains("gold_clusters")) s.gold_clusters = j.at("gold_clusters").get<std::size_t>();
  if (j.contains("unsolvable_rate")) s.unsolvable_rate = j.at("unsolvable_rate").get<double>();
  if (j.contains("words_per_reasoning")) s.words_per_reasoning = j.at("words_per_reasoning").get<std::size_t>();
  if (j.contains("paraphrase_words")) s.paraphrase_words = j.at("paraphrase_words").get<std::size_t>();
  if (j.contains("embed_dim")) s.embed_dim = j.at("embed_dim").get<std::size_t>();
  if (j.contains("separation_delta")) s.separation_delta = j.at("separation_delta").get<double>();
}

}  // namespace semdiv
