#pragma once

#include <vector>

namespace phaseloop {

// Gauss-Legendre rule on [-1, 1].
struct GaussLegendre {
    std::vector<double> nodes;
    std::vector<double> weights;
};

// Rules are computed once per order by Newton iteration on P_n and cached.
const GaussLegendre& gauss_legendre(int order);

struct QuadOptions {
    int nodes = 32;             // per inter-pulse segment
    bool estimate_error = true; // also evaluate with nodes/2 and report the difference
};

}  // namespace phaseloop
