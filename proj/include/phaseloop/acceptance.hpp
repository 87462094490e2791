#pragma once

#include <string>
#include <vector>

namespace phaseloop {

struct CriterionResult {
    std::string id;
    bool pass = false;
    std::string detail;
    double seconds = 0.0;
};

struct AcceptanceOptions {
    bool with_quantum = true;          // the desk-scale quantum criterion
    std::string scenario_dir = "scenarios";
};

// End-to-end verification suite; one result per criterion.
std::vector<CriterionResult> run_acceptance(const AcceptanceOptions& opts = {});

// Prints one PASS/FAIL line per criterion; returns true when all pass.
bool print_acceptance(const std::vector<CriterionResult>& results);

}  // namespace phaseloop
