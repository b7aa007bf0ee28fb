#pragma once

#include <stdexcept>
#include <string>

namespace gmix {

/// Base of every error thrown by the library. `origin()` names the module
/// that raised it so the CLI can report where a failure came from.
class Error : public std::runtime_error {
 public:
  Error(std::string origin, const std::string& what)
      : std::runtime_error(what), origin_(std::move(origin)) {}

  const std::string& origin() const noexcept { return origin_; }

 private:
  std::string origin_;
};

/// Argument outside the mathematical domain of an operation.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// An exact computation would exceed an explicit capacity limit.
class CapacityError : public Error {
 public:
  using Error::Error;
};

/// Bound pipeline cannot produce a guarantee (e.g. some b_k reached 1).
class PipelineError : public Error {
 public:
  using Error::Error;
};

/// Invalid or incomplete experiment configuration.
class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace gmix
