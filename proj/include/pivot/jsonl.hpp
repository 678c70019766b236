#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "pivot/advantage.hpp"
#include "pivot/errors.hpp"
#include "pivot/io.hpp"
#include "pivot/reward.hpp"
#include "pivot/trajectory.hpp"

namespace pivot {

using Json = nlohmann::json;

// Rollout record as it appears on disk: token strings are optional; when
// absent the reference tokenizer supplies the boundaries.
struct RolloutRecord {
  std::string problem_id;
  std::string text;
  std::optional<std::vector<std::string>> token_texts;
  std::optional<std::vector<double>> old_logprobs;
  size_t line_no = 0;
};

namespace detail {

inline Json parse_line(const std::string& path, size_t line_no,
                       const std::string& line) {
  try {
    return Json::parse(line);
  } catch (const Json::parse_error& e) {
    throw InputError(path + ":" + std::to_string(line_no) + ": " + e.what());
  }
}

inline void require_field(const Json& j, const char* field,
                          const std::string& path, size_t line_no) {
  if (!j.contains(field))
    throw InputError(path + ":" + std::to_string(line_no) +
                     ": missing field '" + field + "'");
}

// Field extraction with line provenance for type mismatches.
template <typename Fn>
auto with_line(const std::string& path, size_t line_no, Fn&& fn)
    -> decltype(fn()) {
  try {
    return fn();
  } catch (const Json::exception& e) {
    throw InputError(path + ":" + std::to_string(line_no) + ": " + e.what());
  }
}

}  // namespace detail

inline std::vector<Problem> read_problems_jsonl(const std::string& path) {
  std::vector<Problem> problems;
  const auto lines = read_lines(path);
  for (size_t i = 0; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    const Json j = detail::parse_line(path, i + 1, lines[i]);
    for (const char* field : {"id", "source_text", "gold_answer"})
      detail::require_field(j, field, path, i + 1);
    Problem p = detail::with_line(path, i + 1, [&j] {
      Problem out;
      out.id = j.at("id").get<std::string>();
      out.source_text = j.at("source_text").get<std::string>();
      if (j.contains("english_reference") &&
          !j.at("english_reference").is_null())
        out.english_reference = j.at("english_reference").get<std::string>();
      out.gold_answer = j.at("gold_answer").get<std::string>();
      out.language_tag = j.value("language_tag", std::string("unknown"));
      return out;
    });
    if (p.source_text.empty())
      throw InputError(path + ":" + std::to_string(i + 1) +
                       ": source_text must be non-empty");
    problems.push_back(std::move(p));
  }
  return problems;
}

inline std::string problems_to_jsonl(std::span<const Problem> problems) {
  std::string out;
  for (const auto& p : problems) {
    Json j;
    j["id"] = p.id;
    j["source_text"] = p.source_text;
    if (p.english_reference) j["english_reference"] = *p.english_reference;
    j["gold_answer"] = p.gold_answer;
    j["language_tag"] = p.language_tag;
    out += j.dump();
    out += '\n';
  }
  return out;
}

inline std::vector<RolloutRecord> read_rollouts_jsonl(const std::string& path) {
  std::vector<RolloutRecord> records;
  const auto lines = read_lines(path);
  for (size_t i = 0; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    const Json j = detail::parse_line(path, i + 1, lines[i]);
    for (const char* field : {"problem_id", "text"})
      detail::require_field(j, field, path, i + 1);
    RolloutRecord r = detail::with_line(path, i + 1, [&j] {
      RolloutRecord out;
      out.problem_id = j.at("problem_id").get<std::string>();
      out.text = j.at("text").get<std::string>();
      if (j.contains("tokens"))
        out.token_texts = j.at("tokens").get<std::vector<std::string>>();
      if (j.contains("old_logprobs"))
        out.old_logprobs = j.at("old_logprobs").get<std::vector<double>>();
      return out;
    });
    r.line_no = i + 1;
    records.push_back(std::move(r));
  }
  return records;
}

// Materializes a disk record into a trajectory: spans located on the given
// (or reference-tokenized) token strings, ids assigned positionally, missing
// old_logprobs zero-filled.
inline Trajectory to_trajectory(const RolloutRecord& record,
                                const std::string& path = "<memory>") {
  Trajectory t;
  t.problem_id = record.problem_id;
  t.text = record.text;
  const std::vector<std::string> token_texts =
      record.token_texts ? *record.token_texts : fixture_tokenize(record.text);
  try {
    const auto layout =
        locate_spans(token_texts, t.text, parse_trajectory(t.text));
    t.trans_span = layout.trans;
    t.reason_span = layout.reason;
  } catch (const SpanMismatch& e) {
    throw InputError(path + ":" + std::to_string(record.line_no) + ": " +
                     e.what());
  }
  t.tokens.resize(token_texts.size());
  for (size_t i = 0; i < t.tokens.size(); ++i)
    t.tokens[i] = static_cast<int>(i);
  if (record.old_logprobs) {
    if (record.old_logprobs->size() != token_texts.size())
      throw InputError(path + ":" + std::to_string(record.line_no) +
                       ": old_logprobs length " +
                       std::to_string(record.old_logprobs->size()) +
                       " != token count " + std::to_string(token_texts.size()));
    t.old_logprobs = *record.old_logprobs;
  } else {
    t.old_logprobs.assign(token_texts.size(), 0.0);
  }
  return t;
}

inline std::string rollouts_to_jsonl(
    std::span<const Trajectory> trajectories,
    std::span<const std::vector<std::string>> token_texts) {
  std::string out;
  for (size_t i = 0; i < trajectories.size(); ++i) {
    Json j;
    j["problem_id"] = trajectories[i].problem_id;
    j["text"] = trajectories[i].text;
    if (i < token_texts.size()) j["tokens"] = token_texts[i];
    j["old_logprobs"] = trajectories[i].old_logprobs;
    out += j.dump();
    out += '\n';
  }
  return out;
}

struct RewardRecord {
  std::string problem_id;
  int idx = 0;
  RewardBundle bundle;
};

inline std::string rewards_to_jsonl(std::span<const RewardRecord> records) {
  std::string out;
  for (const auto& r : records) {
    Json j;
    j["problem_id"] = r.problem_id;
    j["idx"] = r.idx;
    j["format"] = r.bundle.format;
    j["trans"] = r.bundle.trans;
    j["reason"] = r.bundle.reason;
    out += j.dump();
    out += '\n';
  }
  return out;
}

inline std::vector<RewardRecord> read_rewards_jsonl(const std::string& path) {
  std::vector<RewardRecord> records;
  const auto lines = read_lines(path);
  for (size_t i = 0; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    const Json j = detail::parse_line(path, i + 1, lines[i]);
    for (const char* field : {"problem_id", "idx", "format", "trans", "reason"})
      detail::require_field(j, field, path, i + 1);
    RewardRecord r = detail::with_line(path, i + 1, [&j] {
      RewardRecord out;
      out.problem_id = j.at("problem_id").get<std::string>();
      out.idx = j.at("idx").get<int>();
      out.bundle.format = j.at("format").get<int>();
      out.bundle.trans = j.at("trans").get<double>();
      out.bundle.reason = j.at("reason").get<int>();
      return out;
    });
    records.push_back(std::move(r));
  }
  return records;
}

struct AdvantageRecord {
  std::string problem_id;
  int idx = 0;
  double a_trans = 0.0;
  double a_reason = 0.0;
  double a_fused = 0.0;
  ConflictLabel label = ConflictLabel::Zero;
};

inline std::string advantages_to_jsonl(
    std::span<const AdvantageRecord> records) {
  std::string out;
  for (const auto& r : records) {
    Json j;
    j["problem_id"] = r.problem_id;
    j["idx"] = r.idx;
    j["a_trans"] = r.a_trans;
    j["a_reason"] = r.a_reason;
    j["a_fused"] = r.a_fused;
    j["label"] = to_string(r.label);
    out += j.dump();
    out += '\n';
  }
  return out;
}

// Evaluation corpus rows for the translation scorer.
struct EvalRow {
  std::string source;
  std::string hypothesis;
  std::optional<std::string> reference;
  std::string lang;
  size_t line_no = 0;
};

inline std::vector<EvalRow> read_eval_rows_jsonl(const std::string& path) {
  std::vector<EvalRow> rows;
  const auto lines = read_lines(path);
  for (size_t i = 0; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    const Json j = detail::parse_line(path, i + 1, lines[i]);
    for (const char* field : {"source", "hypothesis"})
      detail::require_field(j, field, path, i + 1);
    EvalRow r = detail::with_line(path, i + 1, [&j] {
      EvalRow out;
      out.source = j.at("source").get<std::string>();
      out.hypothesis = j.at("hypothesis").get<std::string>();
      if (j.contains("reference") && !j.at("reference").is_null())
        out.reference = j.at("reference").get<std::string>();
      out.lang = j.value("lang", std::string("all"));
      return out;
    });
    r.line_no = i + 1;
    rows.push_back(std::move(r));
  }
  return rows;
}

}  // namespace pivot
