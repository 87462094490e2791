#pragma once

#include <optional>

#include "phaseloop/gaussian_state.hpp"
#include "phaseloop/potential.hpp"

namespace phaseloop {

// Scale estimates probed from the actual potential along both branch
// trajectories.
struct PotentialScales {
    double delta_v_extremal = 0.0;  // max - min of V over all samples      [J]
    double delta_v_branch = 0.0;    // max_t |V_u(t) - V_l(t)|              [J]
    double xi = 0.0;                // dV / RMS|grad V|  (inf when V const) [m]
    double grad_rms = 0.0;          // RMS |grad V| over samples            [J/m]
    double hess_rms = 0.0;          // RMS Frobenius |V''|                  [J/m^2]
    // Diagnostic only: xi^2 * hess_rms / dV, the n=2 consistency ratio of
    // the single-length-scale ansatz. ~1 means one scale describes V well.
    double scale_consistency_n2 = 0.0;
};

struct ProbeOptions {
    int samples_per_segment = 1000;
    bool refine_extrema = true;  // one refinement pass around each coarse arg-max
};

PotentialScales probe_scales(const PulseSequence& seq, const Potential& pot,
                             const ProbeOptions& opts = {});

struct ValidityThresholds {
    double warn = 1e-2;
    double refuse = 1e-1;
};

struct ValidityReport {
    PotentialScales scales;
    double T = 0.0;  // characteristic time [s]
    double d = 0.0;  // wave-packet width at detection [m]

    double epsilon = 0.0;        // dV T^2/(xi^2 m): Magnus suppression factor
    double eta = 0.0;            // deltaV T/hbar: leading phase magnitude
    double d_over_xi = 0.0;
    double eta_d_over_xi = 0.0;

    ValidityThresholds thresholds;
    bool warn = false;    // any of {epsilon, d/xi, eta d/xi} above warn level
    bool refuse = false;  // ... above refuse level

    // Complementary gate: |phi1_wavepacket| in rad, filled by the engine when
    // available. eta tracks the branch *difference* of V and can miss
    // wave-packet-dominated situations.
    std::optional<double> phi1_wavepacket_magnitude;
};

// Forms the dimensionless numbers from probed (or user-supplied) scales.
// d defaults to the state's largest axis width at detection; T to the
// sequence's characteristic time.
ValidityReport validity_report(const PotentialScales& scales, const GaussianState& state,
                               const PulseSequence& seq,
                               const ValidityThresholds& thresholds = {},
                               std::optional<double> d_override = std::nullopt,
                               std::optional<double> T_override = std::nullopt);

}  // namespace phaseloop
