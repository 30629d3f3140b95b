#pragma once

#include <cmath>
#include <stdexcept>
#include <string>

namespace xphase {

// Caller violated a precondition (wrong flavor, bad span, malformed config).
struct usage_error : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// Inputs are well-formed but the physics has no answer (non-finite values,
// non-confining potential, unreachable energy shell).
struct domain_error : std::domain_error {
  using std::domain_error::domain_error;
};

// An iterative numerical method failed to converge.
struct numeric_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

namespace detail {

inline void require_finite(double v, const char* what) {
  if (!std::isfinite(v)) throw domain_error(std::string(what) + " must be finite");
}

}  // namespace detail
}  // namespace xphase
