#pragma once

#include <json.hpp>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "phaseloop/engine.hpp"
#include "phaseloop/verify.hpp"

namespace phaseloop {

using json = nlohmann::ordered_json;

// A fully materialized scenario: sequence, potential, state and options.
// `canonical` is the resolved configuration (defaults filled, fixed key
// order); serializing it is deterministic and idempotent.
struct Scenario {
    json canonical;
    PulseSequence seq;
    std::shared_ptr<Potential> potential;  // null for "none"
    GaussianState state;
    EngineOptions engine;
    ClassicalOracleOptions classical;
    QuantumGridOptions quantum;
    VerifyTolerances tolerances;
    bool run_classical = false;
    bool run_quantum = false;
    std::optional<double> d_override;
    std::optional<PotentialScales> scales_override;
    std::string result_path;  // empty: stdout only
    std::string csv_path;
};

// Parses and validates a configuration. Unknown keys are rejected with their
// JSON-pointer location; all physical quantities carry unit suffixes in key
// names (T_s, k_rad_per_m, ...).
Scenario build_scenario(const json& config);
Scenario load_scenario(const std::string& path);

struct ScenarioResult {
    PhaseBreakdown breakdown;
    std::optional<OracleResult> classical;
    std::optional<OracleResult> quantum;
    std::optional<ComparisonTable> comparison;
};

// Runs the engine (+ configured oracles). Deterministic: identical configs
// produce identical results; the CLI serializes them byte-stably.
ScenarioResult run_scenario(const Scenario& sc, bool with_engine = true,
                            bool with_oracles = true);

json result_to_json(const Scenario& sc, const ScenarioResult& res);
json validity_to_json(const ValidityReport& rep);

// Validity-only run: probe scales (or use the configured override) and form
// the report without evaluating phases.
ValidityReport run_validity(const Scenario& sc);

// Evaluates the engine across `values` substituted at `param_pointer`
// (a JSON pointer to a scalar in the config). Returns CSV text with a header
// naming each column and its unit; rows are ordered by input order and may
// be computed by up to `workers` threads.
std::string run_sweep(const json& base_config, const std::string& param_pointer,
                      const std::vector<double>& values, int workers = 1);

}  // namespace phaseloop
