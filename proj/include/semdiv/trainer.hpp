#pragma once

// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The semdiv Authors

/**
 * @file trainer.hpp
 * @brief Run configuration, GRPO training on synthetic tasks, evaluation,
 *        batch scoring and parameter sweeps.
 */

#include "grpo.hpp"
#include "io.hpp"
#include "metrics.hpp"
#include "normalize.hpp"
#include "policy.hpp"
#include "remote_embedder.hpp"
#include "rewards.hpp"
#include "task.hpp"

#include <json.hpp>

#include <array>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <random>
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace semdiv {

// ---------------------------------------------------------------------------
// Configuration
// ---------------------------------------------------------------------------

struct RunConfig {
  RewardScheme scheme = RewardScheme::sde2;
  std::array<bool, kNumComponents> components{true, true, true, true};  ///< oc, re, fa, sd (sde2 only)
  RewardParams reward;
  BaselineParams baseline;
  AggregationWeights weights;
  GrpoConfig grpo;
  EmbedderConfig embedder;
  TaskFamilySpec family;
  std::size_t n_tasks = 500;
  double train_fraction = 0.8;
  std::string tasks_path;
  std::string output_dir = ".";
  std::size_t max_slots = 3;
  Decoding eval_decoding = Decoding::greedy;
  AnswerMatch answer_match = AnswerMatch::canonical;
  std::uint64_t seed = 0;

  /// Weights actually applied to the four normalized channels.
  AggregationWeights effective_weights() const {
    switch (scheme) {
      case RewardScheme::cfee: return {weights.w_oc, weights.w_re, weights.w_fa, baseline.w_rd};
      case RewardScheme::cfl: return {weights.w_oc, 0.0, weights.w_fa, baseline.w_l};
      case RewardScheme::sde2: break;
    }
    return {components[0] ? weights.w_oc : 0.0, components[1] ? weights.w_re : 0.0,
            components[2] ? weights.w_fa : 0.0, components[3] ? weights.w_sd : 0.0};
  }

  std::string scheme_label() const {
    if (scheme != RewardScheme::sde2 || (components[0] && components[1] && components[2] && components[3])) {
      return to_string(scheme);
    }
    std::string out;
    for (std::size_t k : {0, 2, 3, 1}) {
      if (!components[k]) continue;
      if (!out.empty()) out += '+';
      out += kComponentNames[k];
    }
    return out;
  }

  void validate() const {
    if (std::none_of(components.begin(), components.end(), [](bool b) { return b; })) {
      throw std::invalid_argument("an ablation must keep at least one reward component");
    }
    reward.validate();
    weights.validate();
    grpo.validate();
    embedder.validate();
    family.validate();
    if (n_tasks == 0 && tasks_path.empty()) throw std::invalid_argument("n_tasks must be positive");
    if (!(train_fraction > 0.0 && train_fraction < 1.0)) throw std::invalid_argument("train_fraction must lie in (0, 1)");
    if (max_slots == 0) throw std::invalid_argument("max_slots must be positive");
    if (baseline.length_penalty_scale < 0.0) throw std::invalid_argument("length penalty scale must be nonnegative");
  }
};

/// Accepts "sde2", "cfee", "cfl", or an ablation such as "oc+fa+sd".
inline void set_scheme(RunConfig& c, std::string_view s) {
  if (s == "sde2" || s == "cfee" || s == "cfl") {
    c.scheme = parse_scheme(s);
    c.components = {true, true, true, true};
    return;
  }
  c.scheme = RewardScheme::sde2;
  c.components = {false, false, false, false};
  std::size_t pos = 0;
  while (pos <= s.size()) {
    const std::size_t end = std::min(s.find_first_of("+,", pos), s.size());
    const std::string_view name = s.substr(pos, end - pos);
    bool found = false;
    for (std::size_t k = 0; k < kNumComponents; ++k) {
      if (name == kComponentNames[k]) {
        c.components[k] = true;
        found = true;
      }
    }
    if (!found) throw std::invalid_argument("unknown reward scheme or component: " + std::string(name));
    pos = end + 1;
  }
}

inline nlohmann::json to_json(const RunConfig& c) {
  nlohmann::json j;
  j["scheme"] = c.scheme_label();
  j["lambda_oc"] = c.reward.lambda_oc;
  j["lambda_re"] = c.reward.lambda_re;
  j["gamma_s"] = c.reward.gamma_s;
  j["gamma_a"] = c.reward.gamma_a;
  j["gamma_c"] = c.reward.gamma_c;
  j["alpha"] = c.reward.alpha;
  j["beta_cap"] = c.reward.beta_cap;
  j["rho"] = c.reward.rho;
  j["delta"] = c.reward.delta;
  j["w_oc"] = c.weights.w_oc;
  j["w_re"] = c.weights.w_re;
  j["w_fa"] = c.weights.w_fa;
  j["w_sd"] = c.weights.w_sd;
  j["w_rd"] = c.baseline.w_rd;
  j["w_l"] = c.baseline.w_l;
  j["length_target"] = c.baseline.length_target;
  j["length_penalty_scale"] = c.baseline.length_penalty_scale;
  j["clip_epsilon"] = c.grpo.clip_epsilon;
  j["kl_coeff"] = c.grpo.kl_coeff;
  j["group_size"] = c.grpo.group_size;
  j["batch_prompts"] = c.grpo.batch_prompts;
  j["learning_rate"] = c.grpo.learning_rate;
  j["steps"] = c.grpo.steps;
  j["inner_epochs"] = c.grpo.inner_epochs;
  j["epsilon"] = c.grpo.epsilon;
  j["embedder"] = c.embedder.kind == EmbedderConfig::Kind::reference_hash ? "hash" : "remote";
  j["embed_dim"] = c.embedder.dimension;
  if (c.embedder.endpoint) j["endpoint"] = *c.embedder.endpoint;
  j["ngram_min"] = c.embedder.ngram.min_n;
  j["ngram_max"] = c.embedder.ngram.max_n;
  j["family"] = to_json(c.family);
  j["n_tasks"] = c.n_tasks;
  j["train_fraction"] = c.train_fraction;
  j["tasks_path"] = c.tasks_path;
  j["output_dir"] = c.output_dir;
  j["max_slots"] = c.max_slots;
  j["eval_decoding"] = c.eval_decoding == Decoding::greedy ? "greedy" : "sample";
  j["answer_match"] = to_string(c.answer_match);
  j["seed"] = c.seed;
  return j;
}

/// Overlays the keys present in `j` onto `c`. Unknown keys are rejected.
inline void update_from_json(RunConfig& c, const nlohmann::json& j) {
  if (!j.is_object()) throw std::invalid_argument("config must be a JSON object");
  static const std::set<std::string> known = {
      "scheme", "lambda_oc", "lambda_re", "gamma_s", "gamma_a", "gamma_c", "alpha", "beta_cap", "rho", "delta",
      "w_oc", "w_re", "w_fa", "w_sd", "w_rd", "w_l", "length_target", "length_penalty_scale", "clip_epsilon",
      "kl_coeff", "group_size", "batch_prompts", "learning_rate", "steps", "inner_epochs", "epsilon", "embedder",
      "embed_dim", "endpoint", "ngram_min", "ngram_max", "family", "n_tasks", "train_fraction", "tasks_path",
      "output_dir", "max_slots", "eval_decoding", "answer_match", "seed"};
  for (const auto& [key, _] : j.items()) {
    if (!known.contains(key)) throw std::invalid_argument("unknown config key: " + key);
  }
  const auto get = [&](const char* key, auto& field) {
    if (j.contains(key)) field = j.at(key).get<std::remove_reference_t<decltype(field)>>();
  };
  if (j.contains("scheme")) set_scheme(c, j.at("scheme").get<std::string>());
  get("lambda_oc", c.reward.lambda_oc);
  get("lambda_re", c.reward.lambda_re);
  get("gamma_s", c.reward.gamma_s);
  get("gamma_a", c.reward.gamma_a);
  get("gamma_c", c.reward.gamma_c);
  get("alpha", c.reward.alpha);
  get("beta_cap", c.reward.beta_cap);
  get("rho", c.reward.rho);
  get("delta", c.reward.delta);
  get("w_oc", c.weights.w_oc);
  get("w_re", c.weights.w_re);
  get("w_fa", c.weights.w_fa);
  get("w_sd", c.weights.w_sd);
  get("w_rd", c.baseline.w_rd);
  get("w_l", c.baseline.w_l);
  get("length_target", c.baseline.length_target);
  get("length_penalty_scale", c.baseline.length_penalty_scale);
  get("clip_epsilon", c.grpo.clip_epsilon);
  get("kl_coeff", c.grpo.kl_coeff);
  get("group_size", c.grpo.group_size);
  get("batch_prompts", c.grpo.batch_prompts);
  get("learning_rate", c.grpo.learning_rate);
  get("steps", c.grpo.steps);
  get("inner_epochs", c.grpo.inner_epochs);
  get("epsilon", c.grpo.epsilon);
  if (j.contains("embedder")) {
    const auto kind = j.at("embedder").get<std::string>();
    if (kind == "hash") {
      c.embedder.kind = EmbedderConfig::Kind::reference_hash;
    } else if (kind == "remote") {
      c.embedder.kind = EmbedderConfig::Kind::remote_service;
    } else {
      throw std::invalid_argument("embedder must be \"hash\" or \"remote\"");
    }
  }
  get("embed_dim", c.embedder.dimension);
  if (j.contains("endpoint")) c.embedder.endpoint = j.at("endpoint").get<std::string>();
  get("ngram_min", c.embedder.ngram.min_n);
  get("ngram_max", c.embedder.ngram.max_n);
  if (j.contains("family")) update_from_json(c.family, j.at("family"));
  get("n_tasks", c.n_tasks);
  get("train_fraction", c.train_fraction);
  get("tasks_path", c.tasks_path);
  get("output_dir", c.output_dir);
  get("max_slots", c.max_slots);
  if (j.contains("eval_decoding")) {
    const auto d = j.at("eval_decoding").get<std::string>();
    if (d == "greedy") {
      c.eval_decoding = Decoding::greedy;
    } else if (d == "sample") {
      c.eval_decoding = Decoding::sample;
    } else {
      throw std::invalid_argument("eval_decoding must be \"greedy\" or \"sample\"");
    }
  }
  if (j.contains("answer_match")) c.answer_match = parse_answer_match(j.at("answer_match").get<std::string>());
  get("seed", c.seed);
}

inline RunConfig config_from_json(const nlohmann::json& j) {
  RunConfig c;
  update_from_json(c, j);
  c.validate();
  return c;
}

// ---------------------------------------------------------------------------
// Scoring
// ---------------------------------------------------------------------------

using Scorer = std::function<ScoreDetail(const std::string& text, const std::string& gold)>;

inline Scorer make_scorer(const RunConfig& c, Embedder& embedder) {
  return [&c, &embedder](const std::string& text, const std::string& gold) {
    return score_completion(text, gold, c.scheme, c.reward, c.baseline, embedder);
  };
}

struct TrajectoryRecord {
  std::string task_id;
  std::string text;
  std::string gold;
};

inline TrajectoryRecord record_from_json(const nlohmann::json& j) {
  return {j.at("task_id").get<std::string>(), j.at("text").get<std::string>(), j.at("gold").get<std::string>()};
}

inline nlohmann::json to_json(const TrajectoryRecord& r) {
  return {{"task_id", r.task_id}, {"text", r.text}, {"gold", r.gold}};
}

struct ScoredRecord {
  std::string task_id;
  ScoreDetail detail;
  RewardVector normalized;
};

/// Scores every record and normalizes the batch as a whole.
inline std::vector<ScoredRecord> score_records(std::span<const TrajectoryRecord> records, const Scorer& scorer,
                                               double epsilon = 1e-8) {
  std::vector<ScoredRecord> out;
  out.reserve(records.size());
  std::vector<RewardVector> raw;
  for (const auto& r : records) {
    out.push_back({r.task_id, scorer(r.text, r.gold), {}});
    raw.push_back(out.back().detail.raw);
  }
  if (!raw.empty()) {
    const auto norm = batch_normalize(raw, epsilon);
    for (std::size_t i = 0; i < out.size(); ++i) out[i].normalized = norm.rewards[i];
  }
  return out;
}

inline constexpr std::string_view kRewardsCsvHeader = "task_id,oc,re,fa,sd,g,uniq,div,chi,n_strat,tokens";
inline constexpr std::string_view kNormalizedCsvHeader = "task_id,oc,re,fa,sd";

inline std::string rewards_csv_row(const ScoredRecord& r) {
  const auto& d = r.detail;
  return csv_row({r.task_id, format_double(d.raw.oc), format_double(d.raw.re), format_double(d.raw.fa),
                  format_double(d.raw.sd), format_double(d.geometry.g), std::to_string(d.geometry.uniq),
                  format_double(d.geometry.div), d.chi ? "1" : "0", std::to_string(d.n_strat),
                  std::to_string(d.tokens)});
}

inline std::string normalized_csv_row(const ScoredRecord& r) {
  const auto& n = r.normalized;
  return csv_row({r.task_id, format_double(n.oc), format_double(n.re), format_double(n.fa), format_double(n.sd)});
}

// ---------------------------------------------------------------------------
// Training
// ---------------------------------------------------------------------------

struct StepStats {
  std::size_t step = 0;
  double j_clip = 0.0;
  double kl = 0.0;
  double mean_oc = 0.0;
  double mean_re = 0.0;
  double mean_fa = 0.0;
  double mean_sd = 0.0;
  double acc = 0.0;    ///< percent over the sampled batch
  double s_acc = 0.0;  ///< percent over the sampled batch
  double n_str_mean = 0.0;
  double uniq_mean = 0.0;
  double tok_mean = 0.0;
  double coverage_mean = 0.0;
  std::vector<std::size_t> uniq_histogram;  ///< [u] = completions with Uniq == u
  std::uint64_t seed = 0;
};

inline nlohmann::json to_json(const StepStats& s) {
  return {{"step", s.step},       {"j_clip", s.j_clip},         {"kl", s.kl},
          {"mean_oc", s.mean_oc}, {"mean_re", s.mean_re},       {"mean_fa", s.mean_fa},
          {"mean_sd", s.mean_sd}, {"acc", s.acc},               {"s_acc", s.s_acc},
          {"n_str_mean", s.n_str_mean}, {"uniq_mean", s.uniq_mean}, {"tok_mean", s.tok_mean},
          {"coverage_mean", s.coverage_mean}, {"seed", s.seed}};
}

/// One GRPO iteration: sample G trajectories per prompt from θ_old = θ,
/// score, normalize batchwise, aggregate, form group advantages and take
/// `inner_epochs` gradient-ascent steps on J_clip − β·KL.
inline StepStats grpo_step(TemplatePolicy& policy, const TemplatePolicy& reference,
                           std::span<const SyntheticTask* const> prompts, const Scorer& scorer,
                           const AggregationWeights& weights, const GrpoConfig& cfg, std::mt19937_64& rng) {
  if (prompts.empty()) throw std::invalid_argument("grpo_step: no prompts");
  const TemplatePolicy old = policy;
  const std::size_t g = cfg.group_size;
  const std::size_t stop = policy.stop_action();

  std::vector<GrpoSample> samples;
  std::vector<RewardVector> raw;
  samples.reserve(prompts.size() * g);
  StepStats stats;
  for (const SyntheticTask* task : prompts) {
    if (task->templates.size() != policy.n_templates()) {
      throw std::invalid_argument("task " + task->id + " does not match the policy's template count");
    }
    for (std::size_t i = 0; i < g; ++i) {
      Trajectory traj = sample_trajectory(old, rng);
      const ScoreDetail d = scorer(render_trajectory(*task, traj, stop), task->gold);
      raw.push_back(d.raw);
      stats.acc += d.final_correct ? 1.0 : 0.0;
      stats.s_acc += d.chi ? 1.0 : 0.0;
      stats.n_str_mean += static_cast<double>(d.n_strat);
      stats.uniq_mean += static_cast<double>(d.geometry.uniq);
      if (stats.uniq_histogram.size() <= d.geometry.uniq) stats.uniq_histogram.resize(d.geometry.uniq + 1, 0);
      ++stats.uniq_histogram[d.geometry.uniq];
      stats.tok_mean += static_cast<double>(d.tokens);
      stats.coverage_mean += static_cast<double>(cluster_coverage(*task, traj, stop));
      const double logp = trajectory_log_prob(old, traj);
      samples.push_back({std::move(traj), logp, 0.0});
    }
  }

  const auto norm = batch_normalize(raw, cfg.epsilon);
  std::vector<double> scalar;
  scalar.reserve(raw.size());
  for (const auto& r : norm.rewards) scalar.push_back(aggregate(r, weights));
  for (std::size_t b = 0; b < prompts.size(); ++b) {
    const auto adv = group_advantages(std::span<const double>(scalar).subspan(b * g, g), cfg.epsilon);
    for (std::size_t i = 0; i < g; ++i) samples[b * g + i].advantage = adv[i];
  }

  const ObjectiveValue before = grpo_objective(old, reference, samples, cfg.clip_epsilon, cfg.kl_coeff);
  for (std::size_t e = 0; e < cfg.inner_epochs; ++e) {
    const auto grad = grpo_gradient(policy, reference, samples, cfg.clip_epsilon, cfg.kl_coeff);
    auto theta = policy.params();
    for (std::size_t k = 0; k < theta.size(); ++k) theta[k] += cfg.learning_rate * grad[k];
  }

  const double n = static_cast<double>(samples.size());
  stats.j_clip = before.j_clip;
  stats.kl = before.kl;
  stats.mean_oc = norm.stats.mean[0];
  stats.mean_re = norm.stats.mean[1];
  stats.mean_fa = norm.stats.mean[2];
  stats.mean_sd = norm.stats.mean[3];
  stats.acc *= 100.0 / n;
  stats.s_acc *= 100.0 / n;
  stats.n_str_mean /= n;
  stats.uniq_mean /= n;
  stats.tok_mean /= n;
  stats.coverage_mean /= n;
  return stats;
}

// ---------------------------------------------------------------------------
// Evaluation
// ---------------------------------------------------------------------------

struct EvalSummary {
  EvalReport report;
  double uniq_mean = 0.0;      ///< Uniq(H; δ) of the decoded completions
  double coverage_mean = 0.0;  ///< distinct ground-truth clusters emitted
};

inline nlohmann::json to_json(const EvalSummary& s) {
  auto j = to_json(s.report);
  j["uniq_mean"] = s.uniq_mean;
  j["coverage_mean"] = s.coverage_mean;
  return j;
}

inline constexpr std::string_view kEvalCsvHeader = "acc,s_acc,n_str_mean,tok_mean,n_items";

inline std::string eval_csv_row(const EvalReport& r) {
  return csv_row({format_double(r.acc), format_double(r.s_acc), format_double(r.n_str_mean),
                  format_double(r.tok_mean), std::to_string(r.n_items)});
}

/// Decodes one completion per task (greedy by default) and scores metrics.
inline EvalSummary evaluate_policy(const TemplatePolicy& policy, std::span<const SyntheticTask> tasks,
                                   Embedder& embedder, const RewardParams& params, Decoding decoding,
                                   AnswerMatch mode, std::uint64_t seed) {
  if (tasks.empty()) throw std::invalid_argument("evaluate_policy: no tasks");
  std::mt19937_64 rng(seed);
  std::vector<ParsedCompletion> outputs;
  std::vector<std::string> golds;
  EvalSummary s;
  for (const auto& task : tasks) {
    if (task.templates.size() != policy.n_templates()) {
      throw std::invalid_argument("task " + task.id + " does not match the policy's template count");
    }
    const Trajectory traj = sample_trajectory(policy, rng, decoding);
    outputs.push_back(parse(render_trajectory(task, traj, policy.stop_action())));
    golds.push_back(task.gold);
    s.uniq_mean += static_cast<double>(unique_count(build_strategy_set(outputs.back(), embedder), params.diversity()));
    s.coverage_mean += static_cast<double>(cluster_coverage(task, traj, policy.stop_action()));
  }
  s.report = evaluate(outputs, golds, mode);
  s.uniq_mean /= static_cast<double>(tasks.size());
  s.coverage_mean /= static_cast<double>(tasks.size());
  return s;
}

inline nlohmann::json to_json(const TemplatePolicy& p) {
  return {{"n_templates", p.n_templates()},
          {"max_slots", p.max_slots()},
          {"params", std::vector<double>(p.params().begin(), p.params().end())}};
}

inline TemplatePolicy policy_from_json(const nlohmann::json& j) {
  TemplatePolicy p(j.at("n_templates").get<std::size_t>(), j.at("max_slots").get<std::size_t>());
  const auto params = j.at("params").get<std::vector<double>>();
  if (params.size() != p.n_params()) throw std::invalid_argument("policy file: parameter count mismatch");
  std::copy(params.begin(), params.end(), p.params().begin());
  return p;
}

struct TrainResult {
  TemplatePolicy policy;
  std::vector<StepStats> trace;
  EvalSummary eval;
};

/// Trains from the uniform policy (which is also the KL reference) and
/// evaluates on `eval_tasks`. `on_step` sees every trace row as it is made.
inline TrainResult train(const RunConfig& c, std::span<const SyntheticTask> train_tasks,
                         std::span<const SyntheticTask> eval_tasks, Embedder& embedder,
                         const std::function<void(const StepStats&)>& on_step = {}) {
  c.validate();
  if (train_tasks.empty()) throw std::invalid_argument("train: no training tasks");
  const std::size_t k = train_tasks.front().templates.size();
  TrainResult out;
  out.policy = TemplatePolicy(k, c.max_slots);
  const TemplatePolicy reference = out.policy;
  const Scorer scorer = make_scorer(c, embedder);
  const AggregationWeights weights = c.effective_weights();

  std::mt19937_64 rng(c.seed);
  std::uniform_int_distribution<std::size_t> pick(0, train_tasks.size() - 1);
  std::vector<const SyntheticTask*> batch(c.grpo.batch_prompts);
  for (std::size_t step = 0; step < c.grpo.steps; ++step) {
    for (auto& p : batch) p = &train_tasks[pick(rng)];
    StepStats s = grpo_step(out.policy, reference, batch, scorer, weights, c.grpo, rng);
    s.step = step;
    s.seed = c.seed;
    if (on_step) on_step(s);
    out.trace.push_back(s);
  }
  out.eval = evaluate_policy(out.policy, eval_tasks.empty() ? train_tasks : eval_tasks, embedder, c.reward,
                             c.eval_decoding, c.answer_match, c.seed ^ 0x9e3779b97f4a7c15ULL);
  return out;
}

/// Loads `tasks_path` when set, otherwise generates `n_tasks` from the family.
inline std::vector<SyntheticTask> load_or_generate_tasks(const RunConfig& c, std::ostream& warn = std::cerr) {
  if (c.tasks_path.empty()) return generate_tasks(c.n_tasks, c.family, c.seed);
  std::vector<SyntheticTask> tasks;
  read_jsonl(c.tasks_path, [&](const nlohmann::json& j) { tasks.push_back(task_from_json(j)); }, warn);
  return tasks;
}

inline std::unique_ptr<Embedder> make_run_embedder(const RunConfig& c) { return make_embedder(c.embedder); }

/// Generate-or-load, split, train and evaluate.
inline TrainResult run_experiment(const RunConfig& c, const std::function<void(const StepStats&)>& on_step = {}) {
  c.validate();
  const auto tasks = load_or_generate_tasks(c);
  if (tasks.size() < 2) throw std::invalid_argument("need at least two tasks for a train/eval split");
  const auto [train_tasks, eval_tasks] = split_tasks(tasks, c.train_fraction);
  auto embedder = make_run_embedder(c);
  return train(c, train_tasks, eval_tasks, *embedder, on_step);
}

// ---------------------------------------------------------------------------
// Sweeps
// ---------------------------------------------------------------------------

inline constexpr std::size_t kMaxSweepPoints = 10000;

struct GridAxis {
  std::string key;  ///< config key; "family.x" addresses nested family fields
  std::vector<nlohmann::json> values;
};

/// Parses "key=v1,v2,...". Values are read as JSON when possible, else as strings.
inline GridAxis parse_grid_axis(std::string_view spec) {
  const auto eq = spec.find('=');
  if (eq == std::string_view::npos || eq == 0) throw std::invalid_argument("grid axis must look like key=v1,v2");
  GridAxis axis{std::string(spec.substr(0, eq)), {}};
  std::string_view rest = spec.substr(eq + 1);
  while (!rest.empty()) {
    const auto comma = rest.find(',');
    const std::string item(rest.substr(0, comma));
    if (!item.empty()) {
      auto parsed = nlohmann::json::parse(item, nullptr, false);
      axis.values.push_back(parsed.is_discarded() ? nlohmann::json(item) : parsed);
    }
    if (comma == std::string_view::npos) break;
    rest.remove_prefix(comma + 1);
  }
  if (axis.values.empty()) throw std::invalid_argument("grid axis " + axis.key + " has no values");
  return axis;
}

inline std::size_t grid_size(std::span<const GridAxis> axes) {
  std::size_t n = 1;
  for (const auto& a : axes) {
    if (a.values.empty()) return 0;
    if (n > kMaxSweepPoints * 1000 / a.values.size()) return kMaxSweepPoints * 1000;
    n *= a.values.size();
  }
  return n;
}

/// Cartesian product in row-major order (last axis fastest).
inline std::vector<std::vector<nlohmann::json>> grid_points(std::span<const GridAxis> axes) {
  std::vector<std::vector<nlohmann::json>> points{{}};
  for (const auto& a : axes) {
    std::vector<std::vector<nlohmann::json>> next;
    for (const auto& p : points) {
      for (const auto& v : a.values) {
        auto q = p;
        q.push_back(v);
        next.push_back(std::move(q));
      }
    }
    points = std::move(next);
  }
  return points;
}

inline RunConfig apply_point(const RunConfig& base, std::span<const GridAxis> axes,
                             const std::vector<nlohmann::json>& point) {
  nlohmann::json patch = nlohmann::json::object();
  for (std::size_t i = 0; i < axes.size(); ++i) {
    const auto& key = axes[i].key;
    const auto dot = key.find('.');
    if (dot == std::string::npos) {
      patch[key] = point[i];
    } else {
      patch[key.substr(0, dot)][key.substr(dot + 1)] = point[i];
    }
  }
  RunConfig c = base;
  update_from_json(c, patch);
  c.validate();
  return c;
}

struct SweepRow {
  std::vector<nlohmann::json> point;
  std::uint64_t seed = 0;
  EvalSummary eval;
};

inline std::vector<SweepRow> sweep(const RunConfig& base, std::span<const GridAxis> axes,
                                   std::span<const std::uint64_t> seeds, bool force = false,
                                   const std::function<void(const SweepRow&)>& on_row = {}) {
  if (axes.empty()) throw std::invalid_argument("sweep: empty grid");
  if (seeds.empty()) throw std::invalid_argument("sweep: no seeds");
  const std::size_t n = grid_size(axes);
  if (n == 0) throw std::invalid_argument("sweep: empty grid");
  if (n > kMaxSweepPoints && !force) {
    throw std::invalid_argument("sweep: " + std::to_string(n) + " points exceed the limit of " +
                                std::to_string(kMaxSweepPoints) + " (use --force)");
  }
  std::vector<SweepRow> rows;
  for (const auto& point : grid_points(axes)) {
    for (const auto seed : seeds) {
      RunConfig c = apply_point(base, axes, point);
      c.seed = seed;
      SweepRow row{point, seed, run_experiment(c).eval};
      if (on_row) on_row(row);
      rows.push_back(std::move(row));
    }
  }
  return rows;
}

inline std::string sweep_csv_header(std::span<const GridAxis> axes) {
  std::vector<std::string> cols;
  for (const auto& a : axes) cols.push_back(a.key);
  for (const char* c : {"seed", "acc", "s_acc", "n_str_mean", "tok_mean", "n_items", "uniq_mean", "coverage_mean"}) {
    cols.emplace_back(c);
  }
  return csv_row(cols);
}

inline std::string sweep_csv_row(const SweepRow& r) {
  std::vector<std::string> cols;
  for (const auto& v : r.point) cols.push_back(v.is_string() ? v.get<std::string>() : v.dump());
  const auto& e = r.eval;
  cols.push_back(std::to_string(r.seed));
  cols.push_back(format_double(e.report.acc));
  cols.push_back(format_double(e.report.s_acc));
  cols.push_back(format_double(e.report.n_str_mean));
  cols.push_back(format_double(e.report.tok_mean));
  cols.push_back(std::to_string(e.report.n_items));
  cols.push_back(format_double(e.uniq_mean));
  cols.push_back(format_double(e.coverage_mean));
  return csv_row(cols);
}

}  // namespace semdiv
