#pragma once

#include <functional>

#include "phaseloop/geometry.hpp"
#include "phaseloop/quadrature.hpp"

namespace phaseloop {

struct IntegralResult {
    double value = 0.0;
    double error_estimate = 0.0;  // |full-order - half-order| when requested
};

using ContourFn = std::function<double(Branch, double)>;
// h(branch, t, branch', t') with (branch', t') earlier in contour order.
using ContourKernel = std::function<double(Branch, double, Branch, double)>;

// Loop integral along the time contour: up the upper branch from t_initial
// to t_detect, back down the lower branch. Equals int_u f - int_l f.
// Composite Gauss-Legendre split at pulse times; the branch difference is
// evaluated on shared nodes to limit cancellation for nearly-coincident paths.
// Throws EvaluationError (with location) on non-finite integrand values.
IntegralResult contour_integrate(const PulseSequence& seq, const ContourFn& f,
                                 const QuadOptions& opts = {});

// Nested loop integral: outer point runs along the whole contour, inner point
// over everything earlier in contour order (upper ascending, then lower
// descending). Orientation signs included.
IntegralResult contour_integrate_nested(const PulseSequence& seq, const ContourKernel& h,
                                        const QuadOptions& opts = {});

// Signed node set covering the full contour once (weights carry the branch
// orientation): building block for non-nested double loops.
struct ContourNodes {
    std::vector<double> t;
    std::vector<double> weight;  // +GL weight on upper, -GL weight on lower
    std::vector<Branch> branch;
};

ContourNodes contour_nodes(const PulseSequence& seq, int nodes_per_segment);

}  // namespace phaseloop
