#pragma once

#include <stdexcept>
#include <string>

namespace specflow {

// Error taxonomy shared by the library and the CLI exit-code mapping.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct InvalidArgument : Error {
  using Error::Error;
};

// Requested precision cannot certify the computation (iterate count, value
// separation, ...).
struct PrecisionError : Error {
  using Error::Error;
};

// A growth law asks for denominators beyond the configured schedule budget.
struct InfeasibleScale : Error {
  using Error::Error;
};

// Positivity certification of the assembled ceiling failed.
struct NonpositiveCeiling : Error {
  using Error::Error;
};

// Sampling grid too small for the requested truncation radius.
struct AliasingError : Error {
  using Error::Error;
};

// Degenerate input to a measurement (constant function, empty window, ...).
struct DegenerateError : Error {
  using Error::Error;
};

// Pair schedule violates a structural precondition (e.g. gcd != 1).
struct InvalidSchedule : Error {
  using Error::Error;
};

struct ConfigError : Error {
  using Error::Error;
};

}  // namespace specflow
