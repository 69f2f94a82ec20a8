#pragma once

#include <functional>

#include "otselect/diversity.hpp"
#include "otselect/features.hpp"
#include "otselect/selection.hpp"

namespace otselect {

// Called with (t, w) for w(0) through w(T).
using StepObserver = std::function<void(std::size_t, const SimplexWeights&)>;

// Joint OT-alignment / diversity selection over simplex weights.
//
// Starting from uniform weights, each step takes the entropic OT dual
// potential u (alignment with the validation set) and the Gram product S w
// (local crowding), z-scores both, and applies an exponentiated-gradient
// step on their sum. The k = max(1, floor(n rho)) largest final weights are
// returned.
//
// The combined direction is snapped to a 2^-26 grid before the update so
// the weights are bit-for-bit invariant to constant offsets in u.
SelectionResult evoselect(const FeatureMatrix& train, const FeatureMatrix& val,
                          const EvoParams& params, const StepObserver& observer = {});

}  // namespace otselect
