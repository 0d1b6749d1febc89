#pragma once

#include <stdexcept>
#include <string>

namespace pxrl {

// Bad dimensions, bad config files, bad construction arguments.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// Caller misuse at runtime (invalid action index, mismatched CLI flags).
class UsageError : public std::runtime_error {
 public:
  explicit UsageError(const std::string& what) : std::runtime_error(what) {}
};

// Non-finite values in updates. Runs abort instead of training on garbage.
class NumericalError : public std::runtime_error {
 public:
  explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace pxrl
