#pragma once

// The pinned verification battery: twelve self-contained checks, each with
// its own seed, tolerances, and wall-clock budget frozen in source.  The
// `suite` CLI subcommand and the acceptance test binary both run these, so
// a criterion means the same thing everywhere.

#include <string>
#include <vector>

namespace geofinlab {

struct CriterionResult {
    int id = 0;           // 1..12
    std::string area;     // geometry | lattice | cantor | leafwise | margulis
    std::string name;     // short label of what is checked
    bool pass = false;
    std::string detail;   // measured values against the pinned thresholds
    double wall_ms = 0.0;
    double budget_ms = 0.0;
};

// Criterion ids belonging to an area ("all" or one of the five area names);
// unknown names raise std::invalid_argument.
std::vector<int> battery_criteria(const std::string& area);

// Runs one criterion (1..12) with its pinned configuration.  `threads` is a
// parallelism hint (0 = automatic); results are byte-identical across
// thread counts.  Exceptions from the checked code are caught and reported
// as failures, never propagated.
CriterionResult run_criterion(int id, int threads = 0);

// All criteria of the area, in id order.
std::vector<CriterionResult> run_battery(const std::string& area, int threads = 0);

}  // namespace geofinlab
