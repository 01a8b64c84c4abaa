#pragma once

#include <stdexcept>
#include <string>

namespace repel {

/// Two particles share a position where the drift is singular.
class DuplicatePosition : public std::domain_error {
 public:
  explicit DuplicatePosition(const std::string& what) : std::domain_error(what) {}
};

/// Invalid simulation or experiment configuration.
class ConfigError : public std::invalid_argument {
 public:
  explicit ConfigError(const std::string& what) : std::invalid_argument(what) {}
};

/// Argument outside the mathematical domain of a function.
class DomainError : public std::domain_error {
 public:
  explicit DomainError(const std::string& what) : std::domain_error(what) {}
};

class WindowOutOfRange : public std::out_of_range {
 public:
  explicit WindowOutOfRange(const std::string& what) : std::out_of_range(what) {}
};

class EmptySample : public std::invalid_argument {
 public:
  explicit EmptySample(const std::string& what) : std::invalid_argument(what) {}
};

/// The Jacobi eigensolver hit its sweep limit.
class EigenFailure : public std::runtime_error {
 public:
  explicit EigenFailure(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace repel

namespace repel {

/// A path exhausted its step budget before reaching the end time.
class StepBudgetExceeded : public std::runtime_error {
 public:
  explicit StepBudgetExceeded(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace repel
