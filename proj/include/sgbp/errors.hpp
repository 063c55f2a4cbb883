#pragma once

#include <stdexcept>

namespace sgbp {

// Exact-inference guards (node count, induced width) throw this; the CLI maps it to exit code 3.
class InfeasibleExactError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Message normalization failure and similar numeric breakdowns.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace sgbp
