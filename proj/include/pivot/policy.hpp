#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "pivot/errors.hpp"
#include "pivot/rng.hpp"

namespace pivot {

// Tabular autoregressive categorical policy. The next-token distribution is a
// softmax over one logit row per context, where a context is the previous
// context_order tokens with begin-of-sequence padding (BOS uses the extra
// symbol id vocab_size).
struct ToyPolicy {
  int vocab_size = 0;
  int context_order = 1;
  std::vector<double> theta;  // row-major [n_contexts() x vocab_size]
  uint64_t rng_seed = 0;

  static ToyPolicy zeros(int vocab, int order = 1, uint64_t seed = 0) {
    ToyPolicy p;
    p.vocab_size = vocab;
    p.context_order = order;
    p.rng_seed = seed;
    p.theta.assign(static_cast<size_t>(p.n_contexts()) * vocab, 0.0);
    return p;
  }

  int n_contexts() const {
    long long n = 1;
    for (int i = 0; i < context_order; ++i) n *= vocab_size + 1;
    return static_cast<int>(n);
  }

  int bos() const { return vocab_size; }

  // Mixed-radix context id over the previous context_order symbols, most
  // recent token in the lowest digit.
  int context_id(std::span<const int> tokens, size_t pos) const {
    long long id = 0;
    long long base = 1;
    for (int k = 1; k <= context_order; ++k) {
      const long long sym =
          pos >= static_cast<size_t>(k) ? tokens[pos - k] : bos();
      id += sym * base;
      base *= vocab_size + 1;
    }
    return static_cast<int>(id);
  }

  std::span<const double> row(int ctx) const {
    return std::span<const double>(theta).subspan(
        static_cast<size_t>(ctx) * vocab_size, vocab_size);
  }

  std::span<double> row(int ctx) {
    return std::span<double>(theta).subspan(
        static_cast<size_t>(ctx) * vocab_size, vocab_size);
  }
};

inline std::vector<double> log_softmax(std::span<const double> logits) {
  double max = logits[0];
  for (double v : logits) max = std::max(max, v);
  double sum = 0.0;
  for (double v : logits) sum += std::exp(v - max);
  const double log_z = max + std::log(sum);
  std::vector<double> out(logits.size());
  for (size_t i = 0; i < logits.size(); ++i) out[i] = logits[i] - log_z;
  return out;
}

inline std::vector<double> softmax(std::span<const double> logits) {
  auto out = log_softmax(logits);
  for (double& v : out) v = std::exp(v);
  return out;
}

// log pi_theta(token_t | previous context_order tokens) for every position.
inline std::vector<double> logprob(const ToyPolicy& policy,
                                   std::span<const int> tokens) {
  std::vector<double> out;
  out.reserve(tokens.size());
  for (size_t t = 0; t < tokens.size(); ++t) {
    if (tokens[t] < 0 || tokens[t] >= policy.vocab_size)
      throw TokenOutOfRange("logprob: token id " + std::to_string(tokens[t]) +
                            " outside vocab of size " +
                            std::to_string(policy.vocab_size));
    const auto lp = log_softmax(policy.row(policy.context_id(tokens, t)));
    out.push_back(lp[tokens[t]]);
  }
  return out;
}

// Ancestral sampling with a hard length cap; generation stops after emitting
// eos_token (which is kept in the sequence). Inverse-CDF walk over the
// softmax keeps draws identical across platforms.
inline std::vector<int> sample_tokens(const ToyPolicy& policy, Rng& rng,
                                      int max_len, int eos_token) {
  std::vector<int> tokens;
  tokens.reserve(max_len);
  for (int t = 0; t < max_len; ++t) {
    const auto probs =
        softmax(policy.row(policy.context_id(tokens, tokens.size())));
    const double u = rng.uniform();
    double acc = 0.0;
    int choice = policy.vocab_size - 1;
    for (int v = 0; v < policy.vocab_size; ++v) {
      acc += probs[v];
      if (u < acc) {
        choice = v;
        break;
      }
    }
    tokens.push_back(choice);
    if (choice == eos_token) break;
  }
  return tokens;
}

}  // namespace pivot
