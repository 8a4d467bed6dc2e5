#pragma once

#include <string>
#include <vector>

namespace gridforge {

struct CriterionResult {
    int id = 0;
    std::string title;
    bool passed = false;
    std::string measured;
    std::string expected;
    double runtime_s = 0.0;
    double budget_s = 0.0;
};

struct AcceptanceOptions {
    // Criteria to run; empty means all of 1..11.
    std::vector<int> only;
    // Scales the droop gains of the simulated controllers in criterion 4
    // while the prediction keeps the design values. 1 leaves them intact;
    // anything else is a negative control that must fail.
    double droop_gain_scale = 1.0;
};

inline constexpr int kCriteriaCount = 11;

CriterionResult run_criterion(int id, const AcceptanceOptions& opt = {});
std::vector<CriterionResult> run_acceptance(const AcceptanceOptions& opt = {});

// "[PASS] 4 steady-state droop equivalence | measured ... | expected ... | 1.23 s (budget 30 s)"
std::string format_result(const CriterionResult& r);

// Scenario documents the acceptance suite simulates, exposed for tests.
std::string single_inverter_scenario_json(const std::string& family, double design_R, double design_X,
                                          double gamma_d, double gamma_q);

}  // namespace gridforge
