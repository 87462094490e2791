#include "phaseloop/verify.hpp"

#include <cmath>

namespace phaseloop {

bool is_one_dimensional(const PulseSequence& seq, const GaussianState& state) {
    for (const Pulse& p : seq.pulses)
        if (p.k_upper.head<2>().norm() != 0.0 || p.k_lower.head<2>().norm() != 0.0) return false;
    if (seq.gravity.head<2>().norm() != 0.0) return false;
    const bool decoupled = state.sigma_rr(2, 0) == 0.0 && state.sigma_rr(2, 1) == 0.0 &&
                           state.sigma_pp(2, 0) == 0.0 && state.sigma_pp(2, 1) == 0.0 &&
                           state.sigma_rp(2, 0) == 0.0 && state.sigma_rp(2, 1) == 0.0 &&
                           state.sigma_rp(0, 2) == 0.0 && state.sigma_rp(1, 2) == 0.0;
    return decoupled;
}

ComparisonTable verify_engine(const PulseSequence& seq, const Potential& pot,
                              const GaussianState& state, const EngineOptions& engine_opts,
                              const ClassicalOracleOptions& cls_opts,
                              const QuantumGridOptions& q_opts, const VerifyTolerances& tol,
                              bool run_quantum) {
    ComparisonTable table;
    table.breakdown = phase_total(seq, pot, state, engine_opts);
    const PhaseBreakdown& bd = table.breakdown;

    auto add_row = [&](std::string name, double engine, double oracle, double diff,
                       double tolerance) {
        ComparisonRow row;
        row.quantity = std::move(name);
        row.engine = engine;
        row.oracle = oracle;
        row.difference = diff;
        row.tolerance = tolerance;
        row.pass = diff <= tolerance;
        table.all_pass = table.all_pass && row.pass;
        table.rows.push_back(row);
    };

    {
        OracleResult cls = classical_oracle(seq, pot, cls_opts);
        // the classical oracle carries no wave-packet physics: compare the
        // action-level parts, referenced to the perturbation scale (with an
        // absolute floor so a vanishing perturbation compares exactly)
        const double engine_cls = bd.phi0 + bd.phi1_classical + bd.phi2;
        const double ref = std::max(std::abs(bd.phi1_classical), 1e-12);
        add_row("phase_vs_classical_rel_phi1", engine_cls, cls.phase,
                std::abs(engine_cls - cls.phase) / ref, tol.classical_phase_rel);
    }

    if (run_quantum && is_one_dimensional(seq, state)) {
        OracleResult q = quantum_oracle_1d(seq, pot, state, q_opts);
        // absolute floor: a vanishing overlap phase compares at rounding level
        const double ref = std::max(std::abs(q.phase), 1e-9);
        add_row("phase_vs_quantum_rel", bd.total(), q.phase,
                circular_distance(bd.total(), q.phase) / ref, tol.quantum_phase_rel);
        add_row("contrast_vs_quantum_abs", bd.contrast, q.contrast,
                std::abs(bd.contrast - q.contrast), tol.quantum_contrast_abs);
    }
    return table;
}

}  // namespace phaseloop
