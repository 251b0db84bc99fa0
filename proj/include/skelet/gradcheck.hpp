#pragma once

#include <functional>
#include <span>

#include "skelet/tape.hpp"

namespace skelet {

/// Builds a scalar objective on a fresh tape. Parameters must be bound
/// through Tape::parameter so perturbations are visible on every rebuild.
using ScalarObjective = std::function<Var(Tape&)>;

struct GradCheckReport {
  double max_rel_error = 0.0;
  std::size_t coordinates = 0;
  /// Parameter slot and flat index of the worst coordinate.
  std::size_t worst_parameter = 0;
  Index worst_index = 0;
};

/// Compares reverse-mode gradients with central differences. The error at
/// each coordinate is |analytic - numeric| / max(1, |numeric|).
GradCheckReport check_gradients(const ScalarObjective& f, std::span<Parameter* const> params,
                                double step = 1e-5);

}  // namespace skelet
