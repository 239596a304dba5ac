#pragma once

#include <stdexcept>
#include <string>

namespace surf {

// Malformed input text (CSV rows, model files at the token level).
struct ParseError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Structurally valid input with invalid content (non-monotone time, too few rows).
struct DataError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Invalid arguments or configuration (bad cutoff, unknown drive id, empty split).
struct ParameterError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Tensor/feature dimension mismatch.
struct ShapeError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Versioned file format violations (magic, version, truncation, arch mismatch).
struct FormatError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Online classifier misuse (out-of-order samples).
struct StreamError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace surf
