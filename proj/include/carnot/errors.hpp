#pragma once

#include <stdexcept>
#include <string>

namespace carnot {

/// Unparseable input: group files, config files, id strings, malformed rationals.
struct FormatError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Structurally valid configuration with inconsistent or unknown content.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Argument outside the domain an operation is defined on (boxes, coverage, axioms).
struct DomainError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Pansu-gated operation invoked on a map whose filtration verdict is negative.
struct RefusalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

} // namespace carnot
