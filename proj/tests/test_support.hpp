#pragma once

// Shared helpers for the test suites.

#include <vector>

#include "xphase/checks.hpp"

namespace xphase::testing {

using xphase::fd_gradient;
using xphase::gradient_rel_error;
using xphase::random_point;

inline std::vector<Potential> catalogue() {
  return {Potential::harmonic(), Potential::inverted_harmonic(), Potential::double_well()};
}

}  // namespace xphase::testing
