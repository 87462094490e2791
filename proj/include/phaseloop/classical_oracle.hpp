#pragma once

#include "phaseloop/potential.hpp"

namespace phaseloop {

struct ClassicalOracleOptions {
    int steps_per_segment = 10000;  // fixed-step RK4 aligned to pulse times
    bool richardson = true;         // extra half-step pass for an error estimate
};

struct OracleResult {
    double phase = 0.0;
    double contrast = 1.0;  // quantum oracle only; classical reports 1

    // Separation data at detection (meaningful when the geometry is open).
    Vec3 delta_r = Vec3::Zero();
    Vec3 p_mean = Vec3::Zero();
    double phi_s = 0.0;  // -p_mean . delta_r / hbar

    // Diagnostics.
    double error_estimate = 0.0;  // |full - coarse| phase difference
    long evaluations = 0;
    double norm_drift = 0.0;        // quantum only
    double convergence_dphi = 0.0;  // quantum only: refinement change
};

// Classical-action phase with fully perturbed trajectories. Integrates the
// deviation dr from the exact unperturbed polynomial path,
//   m dr'' = -grad V(r0 + dr, t),
// and assembles phase = phi0 + sum_branch +/- [m v0(t_d).dr(t_d)
//   + int (m|dr'|^2/2 - V(r0+dr))dt]/hbar + phi_s. Algebraically identical
// to the full action difference but free of the huge-phi0 cancellation.
OracleResult classical_oracle(const PulseSequence& seq, const Potential& pot,
                              const ClassicalOracleOptions& opts = {});

}  // namespace phaseloop
