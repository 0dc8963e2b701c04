#pragma once

#include <stdexcept>
#include <string>

namespace anneal_rbm {

/// Caller broke a precondition (dimension mismatch, out-of-range index, bad value).
class ContractViolation : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Exact enumeration refused because the state space is too large.
class IntractableError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// The hardware graph cannot host the requested embedding.
class PlacementError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Bad experiment configuration. `key()` names the offending entry.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string key, const std::string& what)
      : std::runtime_error(what), key_(std::move(key)) {}
  const std::string& key() const noexcept { return key_; }

 private:
  std::string key_;
};

}  // namespace anneal_rbm
