#pragma once

#include <complex>
#include <vector>

#include "phaseloop/classical_oracle.hpp"
#include "phaseloop/gaussian_state.hpp"

namespace phaseloop {

struct QuantumGridOptions {
    int n_points = 1 << 15;
    double pad_widths = 10.0;   // padding in units of the final packet width
    double pad_fraction = 0.25; // ... or this fraction of the branch excursion, whichever larger
    int steps_per_segment = 4096;
    int split_order = 4;        // 2 = Strang, 4 = Forest-Ruth composition
    bool convergence_check = true;  // re-run at half resolution, report dphi
    double conv_tol = 1e-4;         // ConvergenceError beyond this phase change
    double norm_tol = 1e-8;
    std::vector<std::pair<double, std::string>> snapshot_times;  // optional |psi|^2 dumps
};

// Split-operator propagation of both branches along z and exact overlap
// <psi_l|psi_u> at detection. Pulses act as exp(+i(k z + phi)) phase masks.
// Requires a z-only sequence (kicks and gravity along z, transverse means
// zero) and a per-axis-pure Gaussian state in z.
OracleResult quantum_oracle_1d(const PulseSequence& seq, const Potential& pot,
                               const GaussianState& state, const QuantumGridOptions& opts = {});

// Wrapped distance between two phases (the overlap argument is a principal value).
double circular_distance(double a, double b);

}  // namespace phaseloop
