#pragma once

#include <stdexcept>
#include <string>

namespace gpso {

// Invalid configuration: bad field values, unknown keys, inconsistent shapes.
// CLI maps this (and InputError) to exit code 1.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// Invalid data handed to an op: malformed token sequences, layout violations.
class InputError : public std::runtime_error {
 public:
  explicit InputError(const std::string& what) : std::runtime_error(what) {}
};

// Op called in the wrong order: scoring twice, selecting before scoring.
// CLI maps this to exit code 2.
class StateError : public std::runtime_error {
 public:
  explicit StateError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace gpso
