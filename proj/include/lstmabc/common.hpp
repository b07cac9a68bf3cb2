#pragma once

#include <stdexcept>
#include <string>

namespace lstmabc {

// A caller violated an operation's preconditions.
struct ArgumentError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// Malformed or unreadable input data.
struct DataError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Training produced a non-finite loss.
struct DivergenceError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Preprocessing removed every token of a sentence.
struct EmptySentenceError : ArgumentError {
  using ArgumentError::ArgumentError;
};

// Shortest fixed-width decimal that round-trips a double exactly.
std::string fmtG17(double v);
// Compact form for report files.
std::string fmtG12(double v);

}  // namespace lstmabc
