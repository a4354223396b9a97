#pragma once

#include <stdexcept>
#include <string>

namespace specbound {

// Bad arguments or malformed requests (CLI exit code 1).
struct usage_error : std::invalid_argument {
  explicit usage_error(const std::string& what) : std::invalid_argument(what) {}
};

// Numerical failure: non-convergence, zero-norm layers, diverging loss
// (CLI exit code 3).
struct numeric_error : std::runtime_error {
  explicit numeric_error(const std::string& what) : std::runtime_error(what) {}
};

// Malformed files: bad magic numbers, schema violations (CLI exit code 1).
struct format_error : std::runtime_error {
  explicit format_error(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace specbound
