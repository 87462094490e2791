#pragma once

#include <string>
#include <vector>

#include "phaseloop/engine.hpp"
#include "phaseloop/quantum_oracle.hpp"

namespace phaseloop {

struct VerifyTolerances {
    double classical_phase_rel = 1e-3;  // |oracle - engine|/|engine - phi0| style bound
    double quantum_phase_rel = 1e-3;
    double quantum_contrast_abs = 1e-3;
};

struct ComparisonRow {
    std::string quantity;
    double engine = 0.0;
    double oracle = 0.0;
    double difference = 0.0;
    double tolerance = 0.0;
    bool pass = false;
};

struct ComparisonTable {
    std::vector<ComparisonRow> rows;
    bool all_pass = true;
    PhaseBreakdown breakdown;
};

// Side-by-side engine vs oracle phases/contrast. The quantum comparison runs
// only when the configuration reduces to 1-D; phase distances are circular
// against the quantum oracle and plain against the classical one.
ComparisonTable verify_engine(const PulseSequence& seq, const Potential& pot,
                              const GaussianState& state, const EngineOptions& engine_opts = {},
                              const ClassicalOracleOptions& cls_opts = {},
                              const QuantumGridOptions& q_opts = {},
                              const VerifyTolerances& tol = {}, bool run_quantum = true);

bool is_one_dimensional(const PulseSequence& seq, const GaussianState& state);

}  // namespace phaseloop
