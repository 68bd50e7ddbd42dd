#pragma once

#include <vector>

#include "gridflat/core.hpp"
#include "gridflat/milp.hpp"

namespace gridflat {

/// Fixed-target formulation: minimize the bound K on |P_g(t) - theta| subject
/// to the battery energy recursion, SOC window, power limits and mode
/// exclusivity. Throws ConfigError on an invalid config.
MilpProblem build_op1(const ProblemConfig& config);

/// Free-target formulation: theta becomes a variable bounded by the load's
/// min/max and the objective is alpha*K + beta*theta.
MilpProblem build_op2(const ProblemConfig& config);

/// Network formulation: build_op2 plus branch-flow and voltage variables
/// linked by the linearized radial flow recursion, with the voltage band as
/// variable bounds. Per-bus active loads split the total profile by the
/// feeder's percentage shares; reactive loads are time-constant.
MilpProblem build_op3(const ProblemConfig& config);

/// Dispatches on config.formulation.
MilpProblem build_problem(const ProblemConfig& config);

struct DecodedSolution {
    BessSchedule schedule;
    double k_kw = 0.0;
    double theta_kw = 0.0;
};

/// Reads a primal vector back into schedule form through the variable map.
/// Mode values are rounded to 0/1; activities below the clamping tolerance are
/// zeroed; the energy series is recomputed from the recursion so it holds to
/// machine precision.
DecodedSolution decode_solution(const MilpProblem& problem,
                                const ProblemConfig& config,
                                const std::vector<double>& x);

}  // namespace gridflat
