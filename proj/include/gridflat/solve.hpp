#pragma once

#include "gridflat/branch_bound.hpp"
#include "gridflat/core.hpp"
#include "gridflat/formulation.hpp"

namespace gridflat {

/// Builds the configured formulation, solves it (branch and bound, or the LP
/// relaxation when the config says so), decodes the schedule and attaches the
/// named validation checks. Throws ConfigError on invalid input.
SolveReport solve_config(const ProblemConfig& config, long node_limit = 100000,
                         TraceSink trace = nullptr);

/// Validation checks for a report against its config, including the voltage
/// band re-evaluated through the simplified flow for Op3.
std::vector<CheckResult> validate_report(const ProblemConfig& config,
                                         const BessSchedule& schedule,
                                         double k_kw, double theta_kw);

}  // namespace gridflat
