#pragma once

#include "vspinn/tape.hpp"

#include <functional>
#include <span>
#include <vector>

namespace vspinn {

/// Builds a scalar from leaves lifted at given values; used by
/// check_gradient to evaluate the same pipeline at perturbed points.
using ScalarBuilder = std::function<Var(Tape&, std::span<const Var>)>;

/// Compares the reverse-pass gradient of build(point) against central finite
/// differences with step h, leaf by leaf. Returns the maximum of
/// |analytic - fd| / max(|analytic|, 1e-12) over all leaves.
double check_gradient(const ScalarBuilder& build, std::span<const double> point, double h);

}  // namespace vspinn
