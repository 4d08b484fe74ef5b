#pragma once

#include <stdexcept>
#include <string>

namespace bundlesight {

// Malformed caller input: bad dimensions, invalid masks, out-of-range choices.
class InvalidInputError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Numerical breakdown that survived the jitter/retry policy (singular
// covariance, non-finite moments, LP cycling guard, ...).
class NumericFailureError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Rejection sampler exhausted its attempt budget. Carries the observed
// acceptance rate so callers can decide on the importance-sampling fallback.
class LowAcceptanceError : public std::runtime_error {
 public:
  LowAcceptanceError(const std::string& what, double rate)
      : std::runtime_error(what), acceptance_rate(rate) {}
  double acceptance_rate = 0.0;
};

// A polyhedron turned out to be infeasible where a nonempty region was needed.
class EmptyRegionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Censored-demand posterior is degenerate (estimated no-purchase probability
// at or beyond 1 - 1e-9, so the negative-binomial draw would not terminate).
class DegenerateCensoringError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A serialized file failed schema validation. `field` names the offender,
// e.g. "transactions[3].menu[0].price".
class SchemaError : public std::runtime_error {
 public:
  SchemaError(const std::string& field_path, const std::string& what)
      : std::runtime_error("schema violation at '" + field_path + "': " + what),
        field(field_path) {}
  std::string field;
};

}  // namespace bundlesight
