#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "pivot/advantage.hpp"
#include "pivot/config.hpp"
#include "pivot/io.hpp"
#include "pivot/jsonl.hpp"
#include "pivot/metrics.hpp"
#include "pivot/reward.hpp"
#include "pivot/simenv.hpp"
#include "pivot/svg.hpp"
#include "pivot/train.hpp"

// Command implementations shared by the CLI and the test suites: the CLI
// binary is a thin argument parser over these, so CLI outputs and direct
// library calls are identical by construction (and asserted in the tests).
namespace pivot {

inline std::string save_policy_text(const ToyPolicy& policy) {
  std::string out = "pivot-theta v1\n";
  out += "vocab_size " + std::to_string(policy.vocab_size) + "\n";
  out += "context_order " + std::to_string(policy.context_order) + "\n";
  out += "rng_seed " + std::to_string(policy.rng_seed) + "\n";
  out += "rows " + std::to_string(policy.n_contexts()) + " cols " +
         std::to_string(policy.vocab_size) + "\n";
  for (int ctx = 0; ctx < policy.n_contexts(); ++ctx) {
    const auto row = policy.row(ctx);
    for (int v = 0; v < policy.vocab_size; ++v) {
      if (v) out += ' ';
      out += fmt_double(row[v]);
    }
    out += '\n';
  }
  return out;
}

inline ToyPolicy load_policy_text(const std::string& content) {
  std::istringstream in(content);
  std::string line, word;
  if (!std::getline(in, line) || line != "pivot-theta v1")
    throw InputError("policy file: bad header");
  ToyPolicy p;
  int rows = 0, cols = 0;
  auto expect = [&](const std::string& key, auto& value) {
    std::string k;
    if (!(in >> k) || k != key)
      throw InputError("policy file: expected '" + key + "'");
    if (!(in >> value)) throw InputError("policy file: bad value for " + key);
  };
  expect("vocab_size", p.vocab_size);
  expect("context_order", p.context_order);
  expect("rng_seed", p.rng_seed);
  expect("rows", rows);
  expect("cols", cols);
  if (cols != p.vocab_size || rows != p.n_contexts())
    throw InputError("policy file: dimension mismatch");
  p.theta.resize(static_cast<size_t>(rows) * cols);
  for (auto& v : p.theta)
    if (!(in >> v)) throw InputError("policy file: truncated theta table");
  return p;
}

inline std::map<std::string, Problem> problems_by_id(
    const std::vector<Problem>& problems) {
  std::map<std::string, Problem> map;
  for (const auto& p : problems) {
    if (!map.emplace(p.id, p).second)
      throw InputError("duplicate problem id '" + p.id + "'");
  }
  return map;
}

// score: rollouts + problems -> reward JSONL, order preserved, idx counted
// per problem in order of appearance.
inline std::string cmd_score_to_string(const std::string& rollouts_path,
                                       const std::string& problems_path,
                                       const MetricFn& metric) {
  const auto problems = problems_by_id(read_problems_jsonl(problems_path));
  const auto records = read_rollouts_jsonl(rollouts_path);
  std::vector<RewardRecord> rewards;
  std::map<std::string, int> next_idx;
  rewards.reserve(records.size());
  for (const auto& record : records) {
    const auto it = problems.find(record.problem_id);
    if (it == problems.end())
      throw InputError(rollouts_path + ":" + std::to_string(record.line_no) +
                       ": unknown problem_id '" + record.problem_id + "'");
    const Trajectory t = to_trajectory(record, rollouts_path);
    RewardRecord out;
    out.problem_id = record.problem_id;
    out.idx = next_idx[record.problem_id]++;
    try {
      out.bundle = score_trajectory(t, it->second, metric);
    } catch (const InputError& e) {
      throw InputError(rollouts_path + ":" + std::to_string(record.line_no) +
                       ": " + e.what());
    }
    rewards.push_back(std::move(out));
  }
  return rewards_to_jsonl(rewards);
}

inline void cmd_score(const std::string& rollouts_path,
                      const std::string& problems_path, const MetricFn& metric,
                      const std::string& out_path) {
  write_file_atomic(out_path,
                    cmd_score_to_string(rollouts_path, problems_path, metric));
}

// advantage: reward JSONL -> advantage JSONL. Records group by problem_id;
// output preserves input order.
inline std::string cmd_advantage_to_string(const std::string& rewards_path,
                                           const AdvantageConfig& cfg) {
  const auto records = read_rewards_jsonl(rewards_path);
  // Group indices by problem id, first appearance order irrelevant since
  // output is emitted in input order.
  std::map<std::string, std::vector<size_t>> groups;
  for (size_t i = 0; i < records.size(); ++i)
    groups[records[i].problem_id].push_back(i);
  std::vector<AdvantageRecord> out(records.size());
  for (const auto& [problem_id, indices] : groups) {
    std::vector<RewardBundle> bundles;
    bundles.reserve(indices.size());
    for (size_t i : indices) bundles.push_back(records[i].bundle);
    const auto adv = group_advantages(bundles, cfg);
    const auto labels = classify_conflicts(adv, bundles);
    for (size_t k = 0; k < indices.size(); ++k) {
      AdvantageRecord& rec = out[indices[k]];
      rec.problem_id = problem_id;
      rec.idx = records[indices[k]].idx;
      rec.a_trans = adv.a_trans[k];
      rec.a_reason = adv.a_reason[k];
      rec.a_fused = adv.a_fused[k];
      rec.label = labels[k];
    }
  }
  return advantages_to_jsonl(out);
}

inline void cmd_advantage(const std::string& rewards_path,
                          const AdvantageConfig& cfg,
                          const std::string& out_path) {
  write_file_atomic(out_path, cmd_advantage_to_string(rewards_path, cfg));
}

struct TrainOutcome {
  std::vector<StepMetrics> history;  // row 0 is the pre-training probe
  EvalStats final_eval;
  ToyPolicy policy;
};

// Full training run: cipher-math corpus, structured initial policy, one
// on-policy update per step, final sampled evaluation.
inline TrainOutcome run_training(const RunConfig& cfg) {
  cfg.validate();
  const CipherTask task =
      CipherTask::standard(cfg.env.cipher_seed, cfg.env.difficulty);
  const auto problems =
      generate_problems(task, cfg.train.env.corpus_size, mix_seed(cfg.seed, 1));
  const MetricFn metric = chrfpp_metric(cfg.metric);

  TrainOutcome outcome;
  outcome.policy = make_train_policy(cfg.train.env, cfg.seed);

  auto batch_at = [&](int step) {
    std::vector<Problem> batch;
    batch.reserve(cfg.train.problems_per_step);
    const size_t base =
        static_cast<size_t>(step) * cfg.train.problems_per_step;
    for (int j = 0; j < cfg.train.problems_per_step; ++j)
      batch.push_back(problems[(base + j) % problems.size()]);
    return batch;
  };

  {
    // Step-0 probe: measure the initial policy on a discardable copy.
    ToyPolicy probe = outcome.policy;
    Rng probe_rng(mix_seed(cfg.seed, 3));
    StepMetrics row0 = train_step(probe, batch_at(0), metric, cfg.advantage,
                                  cfg.surrogate, cfg.train.env, probe_rng);
    row0.step = 0;
    outcome.history.push_back(row0);
  }

  Rng rng(mix_seed(cfg.seed, 2));
  for (int step = 1; step <= cfg.train.steps; ++step) {
    StepMetrics m = train_step(outcome.policy, batch_at(step - 1), metric,
                               cfg.advantage, cfg.surrogate, cfg.train.env,
                               rng);
    m.step = step;
    outcome.history.push_back(m);
  }

  outcome.final_eval = evaluate_policy(outcome.policy, problems, metric,
                                       cfg.train.env, mix_seed(cfg.seed, 4));
  return outcome;
}

inline std::string metrics_to_csv(std::span<const StepMetrics> history) {
  CsvBuilder csv;
  csv.row({"step", "objective", "acc", "mean_trans_reward", "fp_rate",
           "fn_rate", "clip_frac"});
  for (const auto& m : history)
    csv.row({std::to_string(m.step), fmt_double(m.objective),
             fmt_double(m.accuracy), fmt_double(m.mean_trans_reward),
             fmt_double(m.fp_rate), fmt_double(m.fn_rate),
             fmt_double(m.clip_fraction)});
  return csv.str();
}

// train run directory: config snapshot, per-step metrics, final policy table,
// and a one-row summary.
inline TrainOutcome cmd_train(const RunConfig& cfg, const std::string& out_dir) {
  TrainOutcome outcome = run_training(cfg);
  namespace fs = std::filesystem;
  fs::create_directories(out_dir);
  write_file_atomic(out_dir + "/config.cfg", serialize_run_config(cfg));
  write_file_atomic(out_dir + "/metrics.csv", metrics_to_csv(outcome.history));
  write_file_atomic(out_dir + "/theta.txt", save_policy_text(outcome.policy));
  CsvBuilder summary;
  summary.row({"final_accuracy", "final_mean_trans_reward"});
  summary.row({fmt_double(outcome.final_eval.accuracy),
               fmt_double(outcome.final_eval.mean_trans_reward)});
  write_file_atomic(out_dir + "/summary.csv", summary.str());
  return outcome;
}

// alpha sweep: one full run per alpha value, same seed, shared config.
inline std::string cmd_alpha_sweep(const RunConfig& cfg,
                                   const std::vector<double>& alphas,
                                   const std::string& out_dir) {
  CsvBuilder csv;
  csv.row({"alpha", "final_accuracy", "final_mean_trans_reward"});
  for (const double alpha : alphas) {
    RunConfig point = cfg;
    point.advantage.alpha = alpha;
    const TrainOutcome outcome = run_training(point);
    csv.row({fmt_double(alpha), fmt_double(outcome.final_eval.accuracy),
             fmt_double(outcome.final_eval.mean_trans_reward)});
  }
  namespace fs = std::filesystem;
  fs::create_directories(out_dir);
  write_file_atomic(out_dir + "/sweep.csv", csv.str());
  return csv.str();
}

inline std::string conflict_series_to_csv(const ConflictSeries& series) {
  CsvBuilder csv;
  csv.row({"batch", "fp", "fn", "overall"});
  for (size_t b = 0; b < series.batches.size(); ++b) {
    const auto& p = series.batches[b];
    csv.row({std::to_string(b), fmt_double(p.fp), fmt_double(p.fn),
             fmt_double(p.overall)});
  }
  return csv.str();
}

// conflict experiment run directory: snapshot + per-batch CSV + optional SVG.
inline ConflictSeries cmd_conflict(const RunConfig& cfg,
                                   const std::string& out_dir, bool with_svg) {
  cfg.validate();
  const CipherTask task =
      CipherTask::standard(cfg.env.cipher_seed, cfg.env.difficulty);
  RolloutKnobs knobs = cfg.env.knobs;
  knobs.seed = cfg.seed;
  const ConflictSeries series = conflict_experiment(
      task, knobs, cfg.env.batches, cfg.env.groups_per_batch,
      cfg.surrogate.group_size, cfg.advantage, cfg.metric);
  namespace fs = std::filesystem;
  fs::create_directories(out_dir);
  write_file_atomic(out_dir + "/config.cfg", serialize_run_config(cfg));
  write_file_atomic(out_dir + "/conflict.csv", conflict_series_to_csv(series));
  if (with_svg) {
    std::vector<SvgSeries> chart(3);
    chart[0] = {"false positive", "#d62728", {}};
    chart[1] = {"false negative", "#1f77b4", {}};
    chart[2] = {"overall", "#2ca02c", {}};
    for (const auto& p : series.batches) {
      chart[0].values.push_back(p.fp);
      chart[1].values.push_back(p.fn);
      chart[2].values.push_back(p.overall);
    }
    write_file_atomic(
        out_dir + "/conflict.svg",
        render_line_chart("advantage conflict proportion per batch", chart));
  }
  return series;
}

struct EvalTranslationResult {
  std::string rows_csv;
  std::string summary_csv;
  std::vector<size_t> missing_reference_lines;
};

// eval-translation: per-row scores plus per-language aggregate over --runs
// repetitions. Rows without a reference (for reference-based metrics) are
// collected and excluded from scoring.
inline EvalTranslationResult cmd_eval_translation(const std::string& corpus_path,
                                                  const MetricFn& metric,
                                                  int runs) {
  if (runs < 1) throw InputError("eval-translation: runs must be >= 1");
  const auto rows = read_eval_rows_jsonl(corpus_path);
  EvalTranslationResult result;

  struct Agg {
    size_t count = 0;
    double sum = 0.0;
  };
  std::map<std::string, Agg> by_lang;
  std::vector<double> run_means(runs, 0.0);
  size_t scored = 0;

  CsvBuilder row_csv;
  row_csv.row({"row", "lang", "score"});
  for (size_t i = 0; i < rows.size(); ++i) {
    const auto& row = rows[i];
    double sum = 0.0;
    bool ok = true;
    for (int r = 0; r < runs && ok; ++r) {
      try {
        const double s = metric.scorer(row.hypothesis, row.source,
                                       row.reference);
        sum += s;
        run_means[r] += s;
      } catch (const MissingReference&) {
        result.missing_reference_lines.push_back(row.line_no);
        ok = false;
      }
    }
    if (!ok) continue;
    const double mean = sum / runs;
    ++scored;
    auto& agg = by_lang[row.lang];
    ++agg.count;
    agg.sum += mean;
    row_csv.row({std::to_string(row.line_no), row.lang, fmt_double(mean)});
  }

  CsvBuilder summary;
  summary.row({"lang", "rows", "mean_score", "run_variance"});
  Agg all;
  for (const auto& [lang, agg] : by_lang) {
    all.count += agg.count;
    all.sum += agg.sum;
    summary.row({lang, std::to_string(agg.count),
                 fmt_double(agg.count ? agg.sum / agg.count : 0.0), "0"});
  }
  double overall_mean = all.count ? all.sum / all.count : 0.0;
  double run_var = 0.0;
  if (scored > 0) {
    double mean_of_runs = 0.0;
    for (double& m : run_means) m /= static_cast<double>(scored);
    for (double m : run_means) mean_of_runs += m;
    mean_of_runs /= runs;
    for (double m : run_means)
      run_var += (m - mean_of_runs) * (m - mean_of_runs);
    run_var /= runs;
  }
  summary.row({"all", std::to_string(all.count), fmt_double(overall_mean),
               fmt_double(run_var)});

  result.rows_csv = row_csv.str();
  result.summary_csv = summary.str();
  return result;
}

inline std::string token_cost_to_csv(std::span<const TokenCostRow> rows) {
  CsvBuilder csv;
  csv.row({"language", "trajectories", "trans_tokens", "total_tokens",
           "mean_trans_tokens", "mean_total_tokens", "ratio"});
  for (const auto& row : rows)
    csv.row({row.language, std::to_string(row.trajectories),
             std::to_string(row.trans_tokens), std::to_string(row.total_tokens),
             fmt_double(row.mean_trans_tokens),
             fmt_double(row.mean_total_tokens), fmt_double(row.ratio)});
  return csv.str();
}

inline std::string cmd_token_cost_to_string(const std::string& rollouts_path,
                                            const std::string& problems_path) {
  const auto problems = problems_by_id(read_problems_jsonl(problems_path));
  const auto records = read_rollouts_jsonl(rollouts_path);
  std::vector<Trajectory> trajectories;
  trajectories.reserve(records.size());
  for (const auto& record : records) {
    if (!problems.count(record.problem_id))
      throw InputError(rollouts_path + ":" + std::to_string(record.line_no) +
                       ": unknown problem_id '" + record.problem_id + "'");
    trajectories.push_back(to_trajectory(record, rollouts_path));
  }
  return token_cost_to_csv(token_cost_report(trajectories, problems));
}

// gen-corpus: deterministic problem set, optionally with knob-driven rollouts.
inline void cmd_gen_corpus(const RunConfig& cfg, int n,
                           const std::string& problems_out,
                           const std::string& rollouts_out = "",
                           int rollouts_per_problem = 0) {
  const CipherTask task =
      CipherTask::standard(cfg.env.cipher_seed, cfg.env.difficulty);
  const auto problems = generate_problems(task, n, cfg.seed);
  write_file_atomic(problems_out, problems_to_jsonl(problems));
  if (!rollouts_out.empty() && rollouts_per_problem > 0) {
    RolloutKnobs knobs = cfg.env.knobs;
    knobs.seed = cfg.seed;
    std::string out;
    for (const auto& problem : problems) {
      std::vector<std::vector<std::string>> token_texts;
      const auto rollouts = sample_rollouts(problem, knobs,
                                            rollouts_per_problem, cfg.metric,
                                            &token_texts);
      out += rollouts_to_jsonl(rollouts, token_texts);
    }
    write_file_atomic(rollouts_out, out);
  }
}

}  // namespace pivot
