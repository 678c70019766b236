// pivot command-line interface.
//
// Subcommands: gen-corpus, score, advantage, train, conflict,
// eval-translation, token-cost. Exit codes: 0 success, 2 input error,
// 3 internal invariant violation.

#include <cstdio>
#include <iostream>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "pivot/pivot.hpp"

namespace {

struct MetricFlags {
  std::string metric = "chrfpp";
  int char_order = 6;
  int word_order = 2;
  double beta = 2.0;
  std::string scale = "unit";
  std::string stub_table;

  void attach(CLI::App* cmd) {
    cmd->add_option("--metric", metric, "Translation metric: chrfpp or stub")
        ->check(CLI::IsMember({"chrfpp", "stub"}));
    cmd->add_option("--chrf-char-order", char_order,
                    "Character n-gram order for chrfpp");
    cmd->add_option("--chrf-word-order", word_order,
                    "Word n-gram order for chrfpp");
    cmd->add_option("--chrf-beta", beta, "Recall weight beta for chrfpp");
    cmd->add_option("--scale", scale, "Score scale: unit or percent")
        ->check(CLI::IsMember({"unit", "percent"}));
    cmd->add_option("--stub-table", stub_table,
                    "JSONL table {hypothesis, source, score} for --metric stub");
  }

  pivot::MetricConfig config() const {
    pivot::MetricConfig cfg;
    cfg.char_ngram_order = char_order;
    cfg.word_ngram_order = word_order;
    cfg.beta = beta;
    cfg.scale = scale == "percent" ? pivot::Scale::Percent : pivot::Scale::Unit;
    return cfg;
  }

  pivot::MetricFn build() const {
    if (metric == "chrfpp") return pivot::chrfpp_metric(config());
    if (stub_table.empty())
      throw pivot::InputError("--metric stub requires --stub-table");
    std::map<std::pair<std::string, std::string>, double> table;
    const auto lines = pivot::read_lines(stub_table);
    for (size_t i = 0; i < lines.size(); ++i) {
      if (lines[i].empty()) continue;
      pivot::Json j;
      try {
        j = pivot::Json::parse(lines[i]);
      } catch (const pivot::Json::parse_error& e) {
        throw pivot::InputError(stub_table + ":" + std::to_string(i + 1) +
                                ": " + e.what());
      }
      table[{j.at("hypothesis").get<std::string>(),
             j.at("source").get<std::string>()}] = j.at("score").get<double>();
    }
    return pivot::stub_metric("stub", std::move(table));
  }
};

pivot::RunConfig load_config(const std::string& path,
                             const std::vector<std::string>& required) {
  std::set<std::string> present;
  pivot::RunConfig cfg = pivot::parse_run_config(path, &present);
  pivot::require_sections(present, required, path);
  return cfg;
}

std::vector<double> parse_alpha_list(const std::string& csv) {
  std::vector<double> alphas;
  size_t pos = 0;
  while (pos <= csv.size()) {
    const size_t comma = csv.find(',', pos);
    const std::string piece =
        csv.substr(pos, comma == std::string::npos ? csv.size() - pos
                                                   : comma - pos);
    if (!piece.empty()) alphas.push_back(std::stod(piece));
    if (comma == std::string::npos) break;
    pos = comma + 1;
  }
  if (alphas.empty())
    throw pivot::InputError("--alpha-sweep: no alpha values given");
  return alphas;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"pivot: segment-level group-relative policy optimization "
               "for translate-then-reason rollouts"};
  app.require_subcommand(1);

  // gen-corpus
  auto* gen = app.add_subcommand(
      "gen-corpus", "Generate a cipher-math problem corpus (JSONL)");
  std::string gen_out = "problems.jsonl", gen_rollouts_out;
  int gen_n = 64, gen_g = 0;
  std::string gen_config;
  gen->add_option("--out", gen_out, "Problems JSONL output path");
  gen->add_option("--n", gen_n, "Number of problems");
  gen->add_option("--rollouts-out", gen_rollouts_out,
                  "Also emit knob-driven rollouts to this path");
  gen->add_option("--g", gen_g, "Rollouts per problem for --rollouts-out");
  gen->add_option("--config", gen_config, "Run config file (env section)");
  double gen_noise = -1.0, gen_base = -1.0, gen_gain = -1.0, gen_break = -1.0;
  uint64_t gen_seed = 0;
  bool gen_seed_set = false;
  gen->add_option("--noise-rate", gen_noise, "Override env.noise_rate");
  gen->add_option("--correctness-base", gen_base,
                  "Override env.correctness_base");
  gen->add_option("--correctness-gain", gen_gain,
                  "Override env.correctness_gain");
  gen->add_option("--format-break-rate", gen_break,
                  "Override env.format_break_rate");
  gen->add_option("--seed", gen_seed, "Override seed")
      ->each([&gen_seed_set](const std::string&) { gen_seed_set = true; });

  // score
  auto* score = app.add_subcommand(
      "score", "Score rollouts against problems into reward JSONL");
  std::string score_rollouts, score_problems, score_out = "rewards.jsonl";
  MetricFlags score_metric;
  score->add_option("--rollouts", score_rollouts, "Rollout JSONL")->required();
  score->add_option("--problems", score_problems, "Problems JSONL")->required();
  score->add_option("--out", score_out, "Reward JSONL output path");
  score_metric.attach(score);

  // advantage
  auto* advantage = app.add_subcommand(
      "advantage", "Compute group-relative advantages from reward JSONL");
  std::string adv_rewards, adv_out = "advantages.jsonl", adv_mode = "step";
  double adv_alpha = 0.25, adv_eps = 1e-6;
  advantage->add_option("--rewards", adv_rewards, "Reward JSONL")->required();
  advantage->add_option("--out", adv_out, "Advantage JSONL output path");
  advantage->add_option("--mode", adv_mode, "step or traj")
      ->check(CLI::IsMember({"step", "traj"}));
  advantage->add_option("--alpha", adv_alpha, "Fusion coefficient in [0,1]");
  advantage->add_option("--std-epsilon", adv_eps, "Degenerate-group epsilon");

  // train
  auto* train = app.add_subcommand(
      "train", "Run policy optimization on the cipher-math environment");
  std::string train_config, train_out = "run", train_mode, train_sweep;
  std::optional<double> train_alpha;
  std::optional<int> train_steps;
  std::optional<uint64_t> train_seed;
  train->add_option("--config", train_config, "Run config file")->required();
  train->add_option("--out", train_out, "Run directory");
  train->add_option("--mode", train_mode, "Override advantage.mode")
      ->check(CLI::IsMember({"step", "traj"}));
  train->add_option("--alpha", train_alpha, "Override advantage.alpha");
  train->add_option("--steps", train_steps, "Override train.steps");
  train->add_option("--seed", train_seed, "Override seed");
  train->add_option("--alpha-sweep", train_sweep,
                    "Comma-separated alphas; writes sweep.csv instead");

  // conflict
  auto* conflict = app.add_subcommand(
      "conflict", "Track advantage conflict proportions on generator rollouts");
  std::string conflict_config, conflict_out = "conflict_run", conflict_mode;
  bool conflict_svg = false;
  std::optional<uint64_t> conflict_seed;
  conflict->add_option("--config", conflict_config, "Run config file")
      ->required();
  conflict->add_option("--out", conflict_out, "Run directory");
  conflict->add_option("--mode", conflict_mode, "Override advantage.mode")
      ->check(CLI::IsMember({"step", "traj"}));
  conflict->add_option("--seed", conflict_seed, "Override seed");
  conflict->add_flag("--svg", conflict_svg, "Also render conflict.svg");

  // eval-translation
  auto* evalt = app.add_subcommand(
      "eval-translation", "Score a {source, hypothesis, reference} corpus");
  std::string evalt_corpus, evalt_rows = "eval_rows.csv",
              evalt_summary = "eval_summary.csv";
  int evalt_runs = 1;
  MetricFlags evalt_metric;
  evalt->add_option("--corpus", evalt_corpus, "Corpus JSONL")->required();
  evalt->add_option("--out", evalt_rows, "Per-row CSV output path");
  evalt->add_option("--summary", evalt_summary, "Aggregate CSV output path");
  evalt->add_option("--runs", evalt_runs, "Scoring repetitions to average");
  evalt_metric.attach(evalt);

  // token-cost
  auto* cost = app.add_subcommand(
      "token-cost", "Translation-token vs total-token accounting");
  std::string cost_rollouts, cost_problems, cost_out = "token_cost.csv";
  cost->add_option("--rollouts", cost_rollouts, "Rollout JSONL")->required();
  cost->add_option("--problems", cost_problems, "Problems JSONL")->required();
  cost->add_option("--out", cost_out, "CSV output path");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help
    app.exit(e);
    return 2;
  }

  try {
    if (gen->parsed()) {
      pivot::RunConfig cfg;
      if (!gen_config.empty()) cfg = load_config(gen_config, {"env"});
      if (gen_seed_set) cfg.seed = gen_seed;
      if (gen_noise >= 0) cfg.env.knobs.noise_rate = gen_noise;
      if (gen_base >= 0) cfg.env.knobs.correctness_base = gen_base;
      if (gen_gain >= 0) cfg.env.knobs.correctness_gain = gen_gain;
      if (gen_break >= 0) cfg.env.knobs.format_break_rate = gen_break;
      cfg.validate();
      pivot::cmd_gen_corpus(cfg, gen_n, gen_out, gen_rollouts_out, gen_g);
    } else if (score->parsed()) {
      if (score_metric.scale == "percent")
        throw pivot::InputError(
            "score: rewards are unit-scaled; --scale percent is not valid");
      pivot::cmd_score(score_rollouts, score_problems, score_metric.build(),
                       score_out);
    } else if (advantage->parsed()) {
      pivot::AdvantageConfig cfg;
      cfg.alpha = adv_alpha;
      cfg.std_epsilon = adv_eps;
      cfg.mode = adv_mode == "traj" ? pivot::AdvMode::TrajLevel
                                    : pivot::AdvMode::StepLevel;
      cfg.validate();
      pivot::cmd_advantage(adv_rewards, cfg, adv_out);
    } else if (train->parsed()) {
      pivot::RunConfig cfg = load_config(train_config, {"env", "train"});
      if (!train_mode.empty())
        cfg.advantage.mode = train_mode == "traj" ? pivot::AdvMode::TrajLevel
                                                  : pivot::AdvMode::StepLevel;
      if (train_alpha) cfg.advantage.alpha = *train_alpha;
      if (train_steps) cfg.train.steps = *train_steps;
      if (train_seed) cfg.seed = *train_seed;
      cfg.validate();
      if (!train_sweep.empty()) {
        pivot::cmd_alpha_sweep(cfg, parse_alpha_list(train_sweep), train_out);
      } else {
        const auto outcome = pivot::cmd_train(cfg, train_out);
        std::printf("final_accuracy %s\n",
                    pivot::fmt_double(outcome.final_eval.accuracy).c_str());
      }
    } else if (conflict->parsed()) {
      pivot::RunConfig cfg = load_config(conflict_config, {"env"});
      if (!conflict_mode.empty())
        cfg.advantage.mode = conflict_mode == "traj"
                                 ? pivot::AdvMode::TrajLevel
                                 : pivot::AdvMode::StepLevel;
      if (conflict_seed) cfg.seed = *conflict_seed;
      cfg.validate();
      const auto series = pivot::cmd_conflict(cfg, conflict_out, conflict_svg);
      const auto mean = series.mean();
      std::printf("mean_overall %s\n", pivot::fmt_double(mean.overall).c_str());
    } else if (evalt->parsed()) {
      const auto result = pivot::cmd_eval_translation(
          evalt_corpus, evalt_metric.build(), evalt_runs);
      pivot::write_file_atomic(evalt_rows, result.rows_csv);
      pivot::write_file_atomic(evalt_summary, result.summary_csv);
      for (size_t line : result.missing_reference_lines)
        std::fprintf(stderr, "%s:%zu: missing reference, row skipped\n",
                     evalt_corpus.c_str(), line);
    } else if (cost->parsed()) {
      pivot::write_file_atomic(
          cost_out, pivot::cmd_token_cost_to_string(cost_rollouts,
                                                    cost_problems));
    }
  } catch (const pivot::InvariantError& e) {
    std::fprintf(stderr, "invariant violation: %s\n", e.what());
    return 3;
  } catch (const pivot::InputError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  return 0;
}
