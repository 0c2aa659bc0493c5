#pragma once

#include <stdexcept>
#include <string>

namespace kappa {

/// Input lies outside the domain of a chart, factorization or formula.
struct DomainError : std::domain_error {
  using std::domain_error::domain_error;
};

/// Operands of incompatible size (different n, wrong block shapes).
struct DimensionError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

/// Invalid run configuration (unknown suite, bad flag value).
struct ConfigError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

}  // namespace kappa
