// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The semdiv Authors

// semdiv: generate synthetic tasks, score trajectory logs, train, evaluate
// and sweep.
//
// Exit codes: 0 success, 1 usage or configuration error, 2 empty input,
// 3 runtime failure.

#include <semdiv/semdiv.hpp>

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <string>
#include <unordered_map>
#include <vector>

namespace {

namespace fs = std::filesystem;
using semdiv::RunConfig;

constexpr int kExitUsage = 1;
constexpr int kExitEmpty = 2;
constexpr int kExitRuntime = 3;

struct EmptyInput : std::runtime_error {
  using std::runtime_error::runtime_error;
};

nlohmann::json parse_value(const std::string& s) {
  auto j = nlohmann::json::parse(s, nullptr, false);
  return j.is_discarded() ? nlohmann::json(s) : j;
}

// One string option per RunConfig key: --kl-coeff, --family-unsolvable-rate, ...
struct ConfigFlags {
  std::string config_path;
  std::map<std::string, std::string> top;
  std::map<std::string, std::string> family;

  void attach(CLI::App& app) {
    app.add_option("--config", config_path, "JSON config file")->check(CLI::ExistingFile);
    const auto defaults = semdiv::to_json(RunConfig{});
    for (const auto& [key, value] : defaults.items()) {
      if (key == "family") continue;
      std::string flag = "--" + key;
      std::replace(flag.begin(), flag.end(), '_', '-');
      app.add_option(flag, top[key], "default: " + value.dump());
    }
    for (const auto& [key, value] : defaults.at("family").items()) {
      std::string flag = "--family-" + key;
      std::replace(flag.begin(), flag.end(), '_', '-');
      app.add_option(flag, family[key], "default: " + value.dump());
    }
  }

  RunConfig resolve() const {
    RunConfig c;
    if (!config_path.empty()) semdiv::update_from_json(c, nlohmann::json::parse(semdiv::read_file(config_path)));
    nlohmann::json patch = nlohmann::json::object();
    for (const auto& [k, v] : top) {
      if (v.empty()) continue;
      // Paths and names stay strings even when they look like JSON.
      const bool text = k == "scheme" || k == "tasks_path" || k == "output_dir" || k == "endpoint" ||
                        k == "embedder" || k == "eval_decoding" || k == "answer_match";
      patch[k] = text ? nlohmann::json(v) : parse_value(v);
    }
    for (const auto& [k, v] : family) {
      if (!v.empty()) patch["family"][k] = parse_value(v);
    }
    semdiv::update_from_json(c, patch);
    c.validate();
    return c;
  }
};

void ensure_dir(const std::string& dir) {
  if (!dir.empty()) fs::create_directories(dir);
}

std::string join_path(const std::string& dir, const std::string& name) { return (fs::path(dir) / name).string(); }

void write_eval(const std::string& dir, const semdiv::EvalSummary& e) {
  semdiv::write_file(join_path(dir, "eval.json"), semdiv::to_json(e).dump(2) + "\n");
  semdiv::write_file(join_path(dir, "eval.csv"),
                     std::string(semdiv::kEvalCsvHeader) + "\n" + semdiv::eval_csv_row(e.report) + "\n");
}

// ---------------------------------------------------------------------------

int cmd_gen(std::size_t n, const std::string& out, const RunConfig& c) {
  const auto tasks = semdiv::generate_tasks(n, c.family, c.seed);
  std::vector<nlohmann::json> rows;
  for (const auto& t : tasks) rows.push_back(semdiv::to_json(t));
  semdiv::write_jsonl(out, rows);
  std::cerr << "wrote " << rows.size() << " tasks to " << out << '\n';
  return 0;
}

int cmd_score(const std::string& traj_path, const std::string& golds_path, const std::string& out,
              const std::string& normalized_out, const RunConfig& c) {
  std::unordered_map<std::string, std::string> golds;
  if (!golds_path.empty()) {
    semdiv::read_jsonl(golds_path, [&](const nlohmann::json& j) {
      golds[j.at(j.contains("task_id") ? "task_id" : "id").get<std::string>()] = j.at("gold").get<std::string>();
    });
  }
  std::vector<semdiv::TrajectoryRecord> records;
  const auto stats = semdiv::read_jsonl(traj_path, [&](const nlohmann::json& j) {
    auto r = semdiv::record_from_json(j);
    if (auto it = golds.find(r.task_id); it != golds.end()) r.gold = it->second;
    records.push_back(std::move(r));
  });

  auto embedder = semdiv::make_run_embedder(c);
  const auto scored = semdiv::score_records(records, semdiv::make_scorer(c, *embedder), c.grpo.epsilon);

  std::string csv = std::string(semdiv::kRewardsCsvHeader) + "\n";
  std::string norm = std::string(semdiv::kNormalizedCsvHeader) + "\n";
  for (const auto& s : scored) {
    csv += semdiv::rewards_csv_row(s) + "\n";
    norm += semdiv::normalized_csv_row(s) + "\n";
  }
  if (out.empty() || out == "-") {
    std::cout << csv;
  } else {
    semdiv::write_file(out, csv);
  }
  if (!normalized_out.empty()) semdiv::write_file(normalized_out, norm);

  if (scored.empty()) throw EmptyInput("no trajectories scored");
  if (stats.skipped_fraction() > 0.01) {
    std::cerr << "error: skipped " << stats.skipped << " of " << stats.records << " records\n";
    return kExitRuntime;
  }
  return 0;
}

int cmd_train(const RunConfig& c) {
  ensure_dir(c.output_dir);
  semdiv::write_file(join_path(c.output_dir, "config.json"), semdiv::to_json(c).dump(2) + "\n");
  std::ofstream trace(join_path(c.output_dir, "trace.jsonl"), std::ios::binary);
  if (!trace) throw semdiv::IoError("cannot write trace in " + c.output_dir);
  const auto result = semdiv::run_experiment(c, [&](const semdiv::StepStats& s) {
    trace << semdiv::to_json(s).dump() << '\n';
    trace.flush();
  });
  semdiv::write_file(join_path(c.output_dir, "policy.json"), semdiv::to_json(result.policy).dump() + "\n");
  write_eval(c.output_dir, result.eval);
  std::cout << semdiv::to_json(result.eval).dump() << '\n';
  return 0;
}

int cmd_eval(const std::string& policy_path, const std::string& tasks_path, const RunConfig& c) {
  const auto policy = semdiv::policy_from_json(nlohmann::json::parse(semdiv::read_file(policy_path)));
  std::vector<semdiv::SyntheticTask> tasks;
  semdiv::read_jsonl(tasks_path, [&](const nlohmann::json& j) { tasks.push_back(semdiv::task_from_json(j)); });
  if (tasks.empty()) throw EmptyInput("no tasks to evaluate");
  auto embedder = semdiv::make_run_embedder(c);
  const auto e = semdiv::evaluate_policy(policy, tasks, *embedder, c.reward, c.eval_decoding, c.answer_match, c.seed);
  ensure_dir(c.output_dir);
  write_eval(c.output_dir, e);
  std::cout << semdiv::to_json(e).dump() << '\n';
  return 0;
}

int cmd_sweep(const std::vector<std::string>& grid, const std::vector<std::uint64_t>& seeds, bool force,
              const std::string& out, const RunConfig& c) {
  std::vector<semdiv::GridAxis> axes;
  for (const auto& g : grid) axes.push_back(semdiv::parse_grid_axis(g));
  std::ostream* sink = &std::cout;
  std::ofstream file;
  if (!out.empty() && out != "-") {
    file.open(out, std::ios::binary);
    if (!file) throw semdiv::IoError("cannot write " + out);
    sink = &file;
  }
  if (axes.empty()) throw std::invalid_argument("sweep: empty grid");
  *sink << semdiv::sweep_csv_header(axes) << '\n';
  semdiv::sweep(c, axes, seeds, force, [&](const semdiv::SweepRow& r) {
    *sink << semdiv::sweep_csv_row(r) << '\n';
    sink->flush();
  });
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Semantic-diversity rewards and GRPO on synthetic multi-strategy tasks"};
  app.require_subcommand(1);

  ConfigFlags gen_flags, score_flags, train_flags, eval_flags, sweep_flags;

  auto* gen = app.add_subcommand("gen", "Generate synthetic tasks as JSONL");
  std::size_t gen_n = 0;
  std::string gen_out;
  gen->add_option("-n,--n", gen_n, "Number of tasks")->required()->check(CLI::PositiveNumber);
  gen->add_option("-o,--out", gen_out, "Output JSONL path")->required();
  gen_flags.attach(*gen);

  auto* score = app.add_subcommand("score", "Score a trajectory log into a rewards CSV");
  std::string traj_path, golds_path, score_out, norm_out;
  score->add_option("trajectories", traj_path, "Trajectory JSONL")->required()->check(CLI::ExistingFile);
  score->add_option("--golds", golds_path, "JSONL of {task_id|id, gold} overriding record golds")
      ->check(CLI::ExistingFile);
  score->add_option("-o,--out", score_out, "Rewards CSV path (default stdout)");
  score->add_option("--normalized-out", norm_out, "Batch-normalized rewards CSV path");
  score_flags.attach(*score);

  auto* train = app.add_subcommand("train", "Train a template policy with GRPO");
  train_flags.attach(*train);

  auto* eval = app.add_subcommand("eval", "Evaluate a trained policy on a task file");
  std::string policy_path, eval_tasks;
  eval->add_option("--policy", policy_path, "Policy JSON")->required()->check(CLI::ExistingFile);
  eval->add_option("--task-file", eval_tasks, "Tasks JSONL")->required()->check(CLI::ExistingFile);
  eval_flags.attach(*eval);

  auto* sweep = app.add_subcommand("sweep", "Train and evaluate over a parameter grid");
  std::vector<std::string> grid;
  std::vector<std::uint64_t> seeds{0};
  bool force = false;
  std::string sweep_out;
  sweep->add_option("--grid", grid, "Axis as key=v1,v2 (repeatable; family.key for task-family fields)");
  sweep->add_option("--seeds", seeds, "Seeds per point")->delimiter(',');
  sweep->add_flag("--force", force, "Allow more than 10,000 points");
  sweep->add_option("-o,--out", sweep_out, "CSV path (default stdout)");
  sweep_flags.attach(*sweep);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitUsage;
  }

  try {
    if (*gen) return cmd_gen(gen_n, gen_out, gen_flags.resolve());
    if (*score) return cmd_score(traj_path, golds_path, score_out, norm_out, score_flags.resolve());
    if (*train) return cmd_train(train_flags.resolve());
    if (*eval) return cmd_eval(policy_path, eval_tasks, eval_flags.resolve());
    if (*sweep) return cmd_sweep(grid, seeds, force, sweep_out, sweep_flags.resolve());
  } catch (const EmptyInput& e) {
    std::cerr << "semdiv: " << e.what() << '\n';
    return kExitEmpty;
  } catch (const semdiv::UnsatisfiableSpec& e) {
    std::cerr << "semdiv: unsatisfiable task spec: " << e.what() << '\n';
    return kExitRuntime;
  } catch (const std::invalid_argument& e) {
    std::cerr << "semdiv: " << e.what() << '\n';
    return kExitUsage;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "semdiv: bad JSON: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "semdiv: " << e.what() << '\n';
    return kExitRuntime;
  }
  return kExitUsage;
}
