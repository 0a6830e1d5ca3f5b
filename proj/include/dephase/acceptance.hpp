// acceptance.hpp: the eleven acceptance criteria, each run at its pinned
// tolerances and runtime budget.

#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace dephase {

struct CriterionResult {
    int id{0};
    std::string name;
    bool passed{false};
    std::string detail;       // measured quantities against their thresholds
    double seconds{0};
    double budget_seconds{0};
};

struct AcceptanceOptions {
    std::vector<int> only;          // empty: all criteria
    std::uint64_t seed{20240611};   // random families and the SDE ensemble
    bool enforce_budget{true};      // runtime over budget fails the criterion
};

inline constexpr int acceptance_criteria_count = 11;

CriterionResult run_criterion(int id, const AcceptanceOptions& opts = {});
std::vector<CriterionResult> run_acceptance(const AcceptanceOptions& opts = {});

// "[PASS]  3  multi-level single rate ... (1.2 s / 10 s)"
std::string format_line(const CriterionResult& r);

}  // namespace dephase
