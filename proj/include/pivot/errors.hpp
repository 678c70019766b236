#pragma once

#include <stdexcept>
#include <string>

namespace pivot {

// Error taxonomy mirroring the CLI exit-code contract:
// InputError -> exit 2, InvariantError -> exit 3.
class InputError : public std::runtime_error {
 public:
  explicit InputError(const std::string& msg) : std::runtime_error(msg) {}
};

class InvariantError : public std::runtime_error {
 public:
  explicit InvariantError(const std::string& msg) : std::runtime_error(msg) {}
};

struct SpanMismatch : InputError {
  using InputError::InputError;
};

struct EmptyReference : InputError {
  using InputError::InputError;
};

struct MissingReference : InputError {
  using InputError::InputError;
};

struct UnknownPair : InputError {
  using InputError::InputError;
};

struct EmptyGroup : InputError {
  using InputError::InputError;
};

struct EmptyCorpus : InputError {
  using InputError::InputError;
};

struct TokenOutOfRange : InputError {
  using InputError::InputError;
};

struct ConfigError : InputError {
  using InputError::InputError;
};

struct IoError : InputError {
  using InputError::InputError;
};

}  // namespace pivot
