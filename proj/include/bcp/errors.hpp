#pragma once

#include <stdexcept>
#include <string>

namespace bcp {

// Bad user input: parameters out of domain, malformed files, inconsistent
// run configuration. The CLI maps this to exit code 1.
struct validation_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Request exceeds an enumeration or size budget. Exit code 2.
struct capacity_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace bcp
