#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "pivot/advantage.hpp"
#include "pivot/errors.hpp"
#include "pivot/io.hpp"
#include "pivot/metrics.hpp"
#include "pivot/simenv.hpp"
#include "pivot/surrogate.hpp"
#include "pivot/text.hpp"
#include "pivot/train.hpp"

namespace pivot {

// Environment/experiment parameters beyond the per-module configs.
struct EnvConfig {
  uint64_t cipher_seed = 17;
  int difficulty = 9;
  RolloutKnobs knobs;  // knobs.seed is derived from the run seed
  int batches = 50;
  int groups_per_batch = 8;

  void validate() const {
    if (difficulty < 1) throw ConfigError("env.difficulty must be >= 1");
    if (knobs.noise_rate < 0 || knobs.noise_rate > 1)
      throw ConfigError("env.noise_rate must lie in [0, 1]");
    if (knobs.format_break_rate < 0 || knobs.format_break_rate > 1)
      throw ConfigError("env.format_break_rate must lie in [0, 1]");
    if (batches < 1) throw ConfigError("env.batches must be >= 1");
    if (groups_per_batch < 1)
      throw ConfigError("env.groups_per_batch must be >= 1");
  }
};

struct TrainSection {
  int steps = 200;
  int problems_per_step = 8;
  TrainEnvConfig env;

  void validate() const {
    if (steps < 0) throw ConfigError("train.steps must be >= 0");
    if (problems_per_step < 1)
      throw ConfigError("train.problems_per_step must be >= 1");
    env.validate();
  }
};

// Full resolved run configuration. The serialized form is the snapshot
// written into every run directory; re-running from a snapshot reproduces
// outputs byte for byte.
struct RunConfig {
  uint64_t seed = 42;
  MetricConfig metric;
  AdvantageConfig advantage;
  SurrogateConfig surrogate;
  EnvConfig env;
  TrainSection train;

  void validate() const {
    metric.validate();
    advantage.validate();
    surrogate.validate();
    env.validate();
    train.validate();
  }
};

namespace detail {

struct ConfigReader {
  std::map<std::string, std::map<std::string, std::string>> sections;
  std::set<std::string> seen_keys;
  std::string path;

  const std::string* find(const std::string& section,
                          const std::string& key) {
    auto s = sections.find(section);
    if (s == sections.end()) return nullptr;
    auto k = s->second.find(key);
    if (k == s->second.end()) return nullptr;
    seen_keys.insert(section + "." + key);
    return &k->second;
  }

  double get_double(const std::string& section, const std::string& key,
                    double fallback) {
    const std::string* v = find(section, key);
    if (!v) return fallback;
    char* end = nullptr;
    const double d = std::strtod(v->c_str(), &end);
    if (end == v->c_str() || *end != '\0')
      throw ConfigError(path + ": " + section + "." + key +
                        ": expected a number, got '" + *v + "'");
    return d;
  }

  long long get_int(const std::string& section, const std::string& key,
                    long long fallback) {
    const std::string* v = find(section, key);
    if (!v) return fallback;
    try {
      size_t used = 0;
      const long long n = std::stoll(*v, &used);
      if (used != v->size()) throw std::invalid_argument("trailing");
      return n;
    } catch (...) {
      throw ConfigError(path + ": " + section + "." + key +
                        ": expected an integer, got '" + *v + "'");
    }
  }

  std::string get_string(const std::string& section, const std::string& key,
                         const std::string& fallback) {
    const std::string* v = find(section, key);
    return v ? *v : fallback;
  }

  void check_unknown() const {
    for (const auto& [section, kv] : sections)
      for (const auto& [key, _] : kv)
        if (!seen_keys.count(section + "." + key))
          throw ConfigError(path + ": unknown key '" + section + "." + key +
                            "'");
  }
};

inline ConfigReader read_config_file(const std::string& path) {
  ConfigReader reader;
  reader.path = path;
  std::string section;  // top-level keys live in the "" section
  reader.sections[""];
  const auto lines = read_lines(path);
  for (size_t i = 0; i < lines.size(); ++i) {
    std::string line = trim(lines[i]);
    if (line.empty() || line[0] == '#') continue;
    if (line.front() == '[') {
      if (line.back() != ']')
        throw ConfigError(path + ":" + std::to_string(i + 1) +
                          ": malformed section header");
      section = trim(line.substr(1, line.size() - 2));
      reader.sections[section];
      continue;
    }
    const size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError(path + ":" + std::to_string(i + 1) +
                        ": expected 'key = value'");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty())
      throw ConfigError(path + ":" + std::to_string(i + 1) + ": empty key");
    reader.sections[section][key] = value;
  }
  return reader;
}

}  // namespace detail

inline RunConfig parse_run_config(const std::string& path,
                                  std::set<std::string>* present_sections =
                                      nullptr) {
  auto reader = detail::read_config_file(path);
  if (present_sections) {
    present_sections->clear();
    for (const auto& [name, _] : reader.sections)
      if (!name.empty()) present_sections->insert(name);
  }
  RunConfig cfg;
  cfg.seed = static_cast<uint64_t>(reader.get_int("", "seed", cfg.seed));

  cfg.metric.char_ngram_order = static_cast<int>(
      reader.get_int("metric", "char_ngram_order", cfg.metric.char_ngram_order));
  cfg.metric.word_ngram_order = static_cast<int>(
      reader.get_int("metric", "word_ngram_order", cfg.metric.word_ngram_order));
  cfg.metric.beta = reader.get_double("metric", "beta", cfg.metric.beta);
  const std::string scale = reader.get_string("metric", "scale", "unit");
  if (scale == "unit")
    cfg.metric.scale = Scale::Unit;
  else if (scale == "percent")
    cfg.metric.scale = Scale::Percent;
  else
    throw ConfigError(path + ": metric.scale must be 'unit' or 'percent'");

  cfg.advantage.alpha =
      reader.get_double("advantage", "alpha", cfg.advantage.alpha);
  cfg.advantage.std_epsilon =
      reader.get_double("advantage", "std_epsilon", cfg.advantage.std_epsilon);
  const std::string mode = reader.get_string("advantage", "mode", "step");
  if (mode == "step")
    cfg.advantage.mode = AdvMode::StepLevel;
  else if (mode == "traj")
    cfg.advantage.mode = AdvMode::TrajLevel;
  else
    throw ConfigError(path + ": advantage.mode must be 'step' or 'traj'");

  cfg.surrogate.eps_low =
      reader.get_double("surrogate", "eps_low", cfg.surrogate.eps_low);
  cfg.surrogate.eps_high =
      reader.get_double("surrogate", "eps_high", cfg.surrogate.eps_high);
  cfg.surrogate.learning_rate = reader.get_double(
      "surrogate", "learning_rate", cfg.surrogate.learning_rate);
  cfg.surrogate.group_size = static_cast<int>(
      reader.get_int("surrogate", "group_size", cfg.surrogate.group_size));

  cfg.env.cipher_seed = static_cast<uint64_t>(
      reader.get_int("env", "cipher_seed", static_cast<long long>(cfg.env.cipher_seed)));
  cfg.env.difficulty =
      static_cast<int>(reader.get_int("env", "difficulty", cfg.env.difficulty));
  cfg.env.knobs.noise_rate =
      reader.get_double("env", "noise_rate", cfg.env.knobs.noise_rate);
  cfg.env.knobs.correctness_base = reader.get_double(
      "env", "correctness_base", cfg.env.knobs.correctness_base);
  cfg.env.knobs.correctness_gain = reader.get_double(
      "env", "correctness_gain", cfg.env.knobs.correctness_gain);
  cfg.env.knobs.format_break_rate = reader.get_double(
      "env", "format_break_rate", cfg.env.knobs.format_break_rate);
  cfg.env.batches =
      static_cast<int>(reader.get_int("env", "batches", cfg.env.batches));
  cfg.env.groups_per_batch = static_cast<int>(
      reader.get_int("env", "groups_per_batch", cfg.env.groups_per_batch));

  cfg.train.steps =
      static_cast<int>(reader.get_int("train", "steps", cfg.train.steps));
  cfg.train.problems_per_step = static_cast<int>(reader.get_int(
      "train", "problems_per_step", cfg.train.problems_per_step));
  cfg.train.env.max_len = static_cast<int>(
      reader.get_int("train", "max_len", cfg.train.env.max_len));
  cfg.train.env.corpus_size = static_cast<int>(
      reader.get_int("train", "corpus_size", cfg.train.env.corpus_size));
  cfg.train.env.eval_rollouts = static_cast<int>(
      reader.get_int("train", "eval_rollouts", cfg.train.env.eval_rollouts));
  cfg.train.env.init_open_bias = reader.get_double(
      "train", "init_open_bias", cfg.train.env.init_open_bias);
  cfg.train.env.init_word_bias = reader.get_double(
      "train", "init_word_bias", cfg.train.env.init_word_bias);
  cfg.train.env.init_close_bias = reader.get_double(
      "train", "init_close_bias", cfg.train.env.init_close_bias);
  cfg.train.env.init_answer_bias = reader.get_double(
      "train", "init_answer_bias", cfg.train.env.init_answer_bias);
  cfg.train.env.init_answer_gap = reader.get_double(
      "train", "init_answer_gap", cfg.train.env.init_answer_gap);
  cfg.train.env.init_eos_bias = reader.get_double(
      "train", "init_eos_bias", cfg.train.env.init_eos_bias);
  cfg.train.env.init_other =
      reader.get_double("train", "init_other", cfg.train.env.init_other);

  reader.check_unknown();
  cfg.validate();
  return cfg;
}

inline void require_sections(const std::set<std::string>& present,
                             const std::vector<std::string>& required,
                             const std::string& path) {
  for (const auto& name : required)
    if (!present.count(name))
      throw ConfigError(path + ": missing required section [" + name + "]");
}

// Canonical snapshot form: fixed section and key order, shortest round-trip
// float formatting. Parsing a snapshot reproduces the config exactly.
inline std::string serialize_run_config(const RunConfig& cfg) {
  std::string out;
  auto kv = [&out](const char* key, const std::string& value) {
    out += key;
    out += " = ";
    out += value;
    out += '\n';
  };
  kv("seed", std::to_string(cfg.seed));
  out += "\n[metric]\n";
  kv("char_ngram_order", std::to_string(cfg.metric.char_ngram_order));
  kv("word_ngram_order", std::to_string(cfg.metric.word_ngram_order));
  kv("beta", fmt_double(cfg.metric.beta));
  kv("scale", cfg.metric.scale == Scale::Unit ? "unit" : "percent");
  out += "\n[advantage]\n";
  kv("alpha", fmt_double(cfg.advantage.alpha));
  kv("std_epsilon", fmt_double(cfg.advantage.std_epsilon));
  kv("mode", to_string(cfg.advantage.mode));
  out += "\n[surrogate]\n";
  kv("eps_low", fmt_double(cfg.surrogate.eps_low));
  kv("eps_high", fmt_double(cfg.surrogate.eps_high));
  kv("learning_rate", fmt_double(cfg.surrogate.learning_rate));
  kv("group_size", std::to_string(cfg.surrogate.group_size));
  out += "\n[env]\n";
  kv("cipher_seed", std::to_string(cfg.env.cipher_seed));
  kv("difficulty", std::to_string(cfg.env.difficulty));
  kv("noise_rate", fmt_double(cfg.env.knobs.noise_rate));
  kv("correctness_base", fmt_double(cfg.env.knobs.correctness_base));
  kv("correctness_gain", fmt_double(cfg.env.knobs.correctness_gain));
  kv("format_break_rate", fmt_double(cfg.env.knobs.format_break_rate));
  kv("batches", std::to_string(cfg.env.batches));
  kv("groups_per_batch", std::to_string(cfg.env.groups_per_batch));
  out += "\n[train]\n";
  kv("steps", std::to_string(cfg.train.steps));
  kv("problems_per_step", std::to_string(cfg.train.problems_per_step));
  kv("max_len", std::to_string(cfg.train.env.max_len));
  kv("corpus_size", std::to_string(cfg.train.env.corpus_size));
  kv("eval_rollouts", std::to_string(cfg.train.env.eval_rollouts));
  kv("init_open_bias", fmt_double(cfg.train.env.init_open_bias));
  kv("init_word_bias", fmt_double(cfg.train.env.init_word_bias));
  kv("init_close_bias", fmt_double(cfg.train.env.init_close_bias));
  kv("init_answer_bias", fmt_double(cfg.train.env.init_answer_bias));
  kv("init_answer_gap", fmt_double(cfg.train.env.init_answer_gap));
  kv("init_eos_bias", fmt_double(cfg.train.env.init_eos_bias));
  kv("init_other", fmt_double(cfg.train.env.init_other));
  return out;
}

}  // namespace pivot
