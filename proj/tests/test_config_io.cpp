#include <catch2/catch_amalgamated.hpp>

#include <unistd.h>

#include <cstdio>
#include <filesystem>
#include <string>

#include "pivot/commands.hpp"
#include "pivot/config.hpp"
#include "pivot/io.hpp"
#include "pivot/jsonl.hpp"
#include "pivot/rng.hpp"

using namespace pivot;

namespace {

struct TempDir {
  std::filesystem::path path;
  TempDir() {
    path = std::filesystem::temp_directory_path() /
           ("pivot_test_" + std::to_string(::getpid()) + "_" +
            std::to_string(counter()++));
    std::filesystem::create_directories(path);
  }
  ~TempDir() { std::filesystem::remove_all(path); }
  std::string file(const std::string& name) const {
    return (path / name).string();
  }
  static int& counter() {
    static int c = 0;
    return c;
  }
};

}  // namespace

TEST_CASE("defaults carry the reference constants", "[config]") {
  const RunConfig cfg;
  CHECK(cfg.surrogate.eps_low == 0.2);
  CHECK(cfg.surrogate.eps_high == 0.28);
  CHECK(cfg.advantage.alpha == 0.25);
  CHECK(cfg.surrogate.group_size == 8);
}

TEST_CASE("config snapshot round-trips exactly", "[config]") {
  TempDir dir;
  RunConfig cfg;
  cfg.seed = 7;
  cfg.advantage.alpha = 0.75;
  cfg.advantage.mode = AdvMode::TrajLevel;
  cfg.env.knobs.noise_rate = 0.375;
  cfg.train.steps = 13;
  const std::string snapshot = serialize_run_config(cfg);
  write_file_atomic(dir.file("config.cfg"), snapshot);
  const RunConfig back = parse_run_config(dir.file("config.cfg"));
  CHECK(back.seed == cfg.seed);
  CHECK(back.advantage.alpha == cfg.advantage.alpha);
  CHECK(back.advantage.mode == cfg.advantage.mode);
  CHECK(back.env.knobs.noise_rate == cfg.env.knobs.noise_rate);
  CHECK(back.train.steps == cfg.train.steps);
  // Serializing the parsed config reproduces the snapshot byte for byte.
  CHECK(serialize_run_config(back) == snapshot);
}

TEST_CASE("config validation failures carry field paths", "[config]") {
  TempDir dir;
  SECTION("unknown key") {
    write_file_atomic(dir.file("c.cfg"), "[advantage]\nalpa = 0.5\n");
    try {
      parse_run_config(dir.file("c.cfg"));
      FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
      CHECK(std::string(e.what()).find("advantage.alpa") != std::string::npos);
    }
  }
  SECTION("out-of-range alpha") {
    write_file_atomic(dir.file("c.cfg"), "[advantage]\nalpha = 1.5\n");
    CHECK_THROWS_AS(parse_run_config(dir.file("c.cfg")), ConfigError);
  }
  SECTION("bad number") {
    write_file_atomic(dir.file("c.cfg"), "[metric]\nbeta = two\n");
    CHECK_THROWS_AS(parse_run_config(dir.file("c.cfg")), ConfigError);
  }
  SECTION("missing required section") {
    write_file_atomic(dir.file("c.cfg"), "[metric]\nbeta = 2\n");
    std::set<std::string> present;
    parse_run_config(dir.file("c.cfg"), &present);
    try {
      require_sections(present, {"env"}, dir.file("c.cfg"));
      FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
      CHECK(std::string(e.what()).find("[env]") != std::string::npos);
    }
  }
}

TEST_CASE("fmt_double round-trips doubles", "[io][property]") {
  Rng rng(31);
  for (int i = 0; i < 2000; ++i) {
    double v;
    switch (i % 4) {
      case 0: v = rng.uniform(); break;
      case 1: v = rng.normal() * 1e6; break;
      case 2: v = rng.normal() * 1e-7; break;
      default: v = static_cast<double>(rng.index(1000)); break;
    }
    const std::string s = fmt_double(v);
    CHECK(std::strtod(s.c_str(), nullptr) == v);
  }
}

TEST_CASE("policy table save/load round-trip", "[io]") {
  Rng rng(12);
  auto policy = ToyPolicy::zeros(5, 1, 99);
  for (double& v : policy.theta) v = rng.normal();
  const auto text = save_policy_text(policy);
  const auto back = load_policy_text(text);
  CHECK(back.vocab_size == policy.vocab_size);
  CHECK(back.context_order == policy.context_order);
  CHECK(back.rng_seed == policy.rng_seed);
  REQUIRE(back.theta.size() == policy.theta.size());
  for (size_t i = 0; i < policy.theta.size(); ++i)
    CHECK(back.theta[i] == policy.theta[i]);
  CHECK_THROWS_AS(load_policy_text("not a policy"), InputError);
}

TEST_CASE("problems JSONL round-trip", "[jsonl]") {
  TempDir dir;
  const auto task = CipherTask::standard(17, 9);
  const auto problems = generate_problems(task, 6, 42);
  write_file_atomic(dir.file("problems.jsonl"), problems_to_jsonl(problems));
  const auto back = read_problems_jsonl(dir.file("problems.jsonl"));
  REQUIRE(back.size() == problems.size());
  for (size_t i = 0; i < back.size(); ++i) {
    CHECK(back[i].id == problems[i].id);
    CHECK(back[i].source_text == problems[i].source_text);
    CHECK(back[i].english_reference == problems[i].english_reference);
    CHECK(back[i].gold_answer == problems[i].gold_answer);
    CHECK(back[i].language_tag == problems[i].language_tag);
  }
}

TEST_CASE("rollout JSONL ingestion", "[jsonl]") {
  TempDir dir;
  SECTION("explicit token strings are honored") {
    write_file_atomic(
        dir.file("r.jsonl"),
        "{\"problem_id\":\"p\",\"text\":\"a b\",\"tokens\":[\"a\",\" b\"],"
        "\"old_logprobs\":[-0.5,-0.25]}\n");
    const auto records = read_rollouts_jsonl(dir.file("r.jsonl"));
    REQUIRE(records.size() == 1);
    const auto t = to_trajectory(records[0]);
    CHECK(t.tokens.size() == 2);
    CHECK(t.old_logprobs == std::vector<double>{-0.5, -0.25});
  }
  SECTION("token strings must concatenate to the text") {
    write_file_atomic(
        dir.file("bad.jsonl"),
        "{\"problem_id\":\"p\",\"text\":\"a b\",\"tokens\":[\"a\",\"b\"]}\n");
    const auto records = read_rollouts_jsonl(dir.file("bad.jsonl"));
    try {
      to_trajectory(records[0], dir.file("bad.jsonl"));
      FAIL("expected SpanMismatch -> InputError with line provenance");
    } catch (const InputError& e) {
      CHECK(std::string(e.what()).find(":1:") != std::string::npos);
    }
  }
  SECTION("old_logprobs length mismatch is rejected") {
    write_file_atomic(dir.file("bad2.jsonl"),
                      "{\"problem_id\":\"p\",\"text\":\"a b\","
                      "\"old_logprobs\":[-0.5]}\n");
    const auto records = read_rollouts_jsonl(dir.file("bad2.jsonl"));
    CHECK_THROWS_AS(to_trajectory(records[0]), InputError);
  }
  SECTION("malformed json carries the line number") {
    write_file_atomic(dir.file("bad3.jsonl"),
                      "{\"problem_id\":\"p\",\"text\":\"ok\"}\n{broken\n");
    try {
      read_rollouts_jsonl(dir.file("bad3.jsonl"));
      FAIL("expected parse failure");
    } catch (const InputError& e) {
      CHECK(std::string(e.what()).find(":2:") != std::string::npos);
    }
  }
  SECTION("wrong field type carries the line number too") {
    write_file_atomic(dir.file("bad4.jsonl"),
                      "{\"problem_id\":\"p\",\"text\":\"ok\"}\n"
                      "{\"problem_id\":\"p\",\"text\":\"ok\",\"tokens\":7}\n");
    try {
      read_rollouts_jsonl(dir.file("bad4.jsonl"));
      FAIL("expected type failure");
    } catch (const InputError& e) {
      CHECK(std::string(e.what()).find(":2:") != std::string::npos);
    }
  }
}

TEST_CASE("reward JSONL round-trip", "[jsonl]") {
  TempDir dir;
  std::vector<RewardRecord> records(2);
  records[0] = {"p", 0, {1, 0.625, 1}};
  records[1] = {"p", 1, {0, 0.0, 0}};
  write_file_atomic(dir.file("rw.jsonl"), rewards_to_jsonl(records));
  const auto back = read_rewards_jsonl(dir.file("rw.jsonl"));
  REQUIRE(back.size() == 2);
  CHECK(back[0].bundle.trans == 0.625);
  CHECK(back[0].bundle.format == 1);
  CHECK(back[1].bundle.format == 0);
}

TEST_CASE("atomic write leaves no temp file behind", "[io]") {
  TempDir dir;
  write_file_atomic(dir.file("x.txt"), "payload");
  CHECK(read_file(dir.file("x.txt")) == "payload");
  CHECK_FALSE(std::filesystem::exists(dir.file("x.txt.tmp")));
}
