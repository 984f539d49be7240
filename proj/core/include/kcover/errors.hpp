#pragma once

#include <stdexcept>
#include <string>

namespace kcover {

/// A value lies outside the domain an operation is defined on
/// (point outside the grid, sensor inside an obstacle, shape mismatch).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Invalid configuration, e.g. an environment with no legal sensor site.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// The external gain provider failed or violated the wire protocol.
/// A caller broke an operation's precondition contract, e.g. asked for the
/// distance-weighted gain before any sensor was placed.
class ContractError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

class ProviderError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace kcover
