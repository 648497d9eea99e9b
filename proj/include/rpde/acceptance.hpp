#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "rpde/experiment.hpp"

namespace rpde {

struct CriterionResult {
    int id = 0;
    std::string name;
    bool pass = false;
    std::string detail;
};

/// Criteria 1..9 in order. A criterion that throws is reported as failed with the message.
std::vector<CriterionResult> run_acceptance(const Experiment& ex, unsigned jobs, std::ostream* log,
                                            BoundConstants* calibrated = nullptr);

/// `criterion N PASS|FAIL name: detail`
std::string format_criterion(const CriterionResult& r);

/// The `accept` command: acceptance.csv plus constants.csv.
RunOutcome run_acceptance_command(const Experiment& ex, const RunOptions& opt);

}  // namespace rpde
