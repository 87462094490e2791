#pragma once

#include "phaseloop/contour.hpp"
#include "phaseloop/gaussian_state.hpp"
#include "phaseloop/potential.hpp"
#include "phaseloop/validity.hpp"

namespace phaseloop {

// How phase_total reacts to tripped validity gates.
enum class ValidityAction { Refuse, WarnOnly, Override };

struct EngineOptions {
    int max_order = 2;        // 1: first-order only; 2: include the nested term
    QuadOptions quad{};       // single loop integrals
    QuadOptions nested{32, false};
    ValidityAction validity_action = ValidityAction::Refuse;
    ValidityThresholds thresholds{};
    ProbeOptions probe{};
};

struct PhaseBreakdown {
    double phi0 = 0.0;
    double phi1_classical = 0.0;   // -(1/hbar) loop V
    double phi1_wavepacket = 0.0;  // -(1/2hbar) loop V_ij <rbar_i rbar_j>
    double phi2 = 0.0;             // nested second-order expectation
    double contrast = 1.0;
    ValidityReport validity;

    double total() const { return phi0 + phi1_classical + phi1_wavepacket + phi2; }
};

struct FirstOrderPhase {
    double classical = 0.0;
    double wavepacket = 0.0;
    double quad_error = 0.0;
};

// Leading-order phase shifts: the loop integrals of V and of the Hessian
// contracted with the equal-time wave-packet moment, both along the
// unperturbed trajectories. Requires a closed unperturbed sequence.
FirstOrderPhase phase_first_order(const PulseSequence& seq, const Potential& pot,
                                  const GaussianState& state, const QuadOptions& quad = {});

// Second-order term: expectation of the nested-commutator contribution,
//   -(1/2 hbar m) loop dt loop^t dt' (t'-t) { V_i V_i'
//       + 1/2 V_i' V_ijk G_jk(t,t) + 1/2 V_i V_ijk' G_jk(t',t')
//       + V_ik V_kj' G_ij(t,t') }.
// Same-time operator pairs take same-time moments G(t,t); only the
// Hessian-Hessian pair mixes times. Terms linear in rbar drop (<rbar> = 0).
double phase_second_order(const PulseSequence& seq, const Potential& pot,
                          const GaussianState& state, const QuadOptions& nested = {32, false});

// Contrast from the second cumulant of the leading gradient operator term:
//   ln C = -1/2 Var,  Var = (1/hbar^2) loop dt loop dt' V_i(t) V_j(t') G_ij(t,t').
// Hessian-operator contributions are dropped (suppressed by d/xi).
double contrast(const PulseSequence& seq, const Potential& pot, const GaussianState& state,
                int nodes_per_segment = 32);

// Full perturbative result: phi0 + requested orders + contrast + validity.
// Refuses (ValidityRefusal) when gates trip, unless overridden.
PhaseBreakdown phase_total(const PulseSequence& seq, const Potential& pot,
                           const GaussianState& state, const EngineOptions& opts = {});

// Closed-form references for the MZ in a pure-cubic potential: the loop
// moments of z0(t) and the end-to-end phase for a trap ground state with
// w_x = w_y = 2 w_z released at z_i with zero initial velocity.
struct MzCubicReference {
    double f_phi = 0.0;  // loop z0^3
    double f_rr = 0.0;   // loop z0      = vr T^2
    double f_rp = 0.0;   // loop z0 t    = vr T^3
    double f_pp = 0.0;   // loop z0 t^2  = 7/6 vr T^4
    double phase_eq_bracket = 0.0;  // phase - phi0 for the reference configuration
};

MzCubicReference mz_cubic_reference(double T, double v_r, double g, double z_i, double omega,
                                    double R, double mass, double hbar = constants::hbar_si);

}  // namespace phaseloop
