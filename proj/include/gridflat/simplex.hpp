#pragma once

#include <stdexcept>
#include <vector>

#include "gridflat/milp.hpp"

namespace gridflat {

// Solver tolerances. Feasibility is checked relative to the row's right-hand
// side after equilibration.
inline constexpr double kFeasTol = 1e-7;
inline constexpr double kDualTol = 1e-9;
inline constexpr double kPivotTol = 1e-9;
inline constexpr int kStallLimit = 1000;  // degenerate pivots before Bland

enum class LpStatus { Optimal, Infeasible, Unbounded };
const char* to_string(LpStatus s);

struct LpSolution {
    LpStatus status = LpStatus::Infeasible;
    double objective = 0.0;
    std::vector<double> primal;  // structural variables only
    long iterations = 0;
};

/// Thrown on numerical breakdown; never silent.
struct SolverError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Bounded-variable primal simplex over the problem's constraint rows,
/// ignoring binary markers. Deterministic: ties in pricing and in the ratio
/// test are broken toward the lowest column index.
LpSolution solve_lp(const MilpProblem& problem);

/// Same, with per-column bound overrides (used by branch and bound to fix
/// binaries without copying the problem).
LpSolution solve_lp_bounded(const MilpProblem& problem,
                            const std::vector<double>& lower,
                            const std::vector<double>& upper);

/// Largest violation over bounds and constraint rows at x, each scaled by
/// 1 + |rhs| (or 1 + |bound|). Independent of the simplex internals.
double max_violation(const MilpProblem& problem, const std::vector<double>& x);
double max_violation(const MilpProblem& problem, const std::vector<double>& x,
                     const std::vector<double>& lower,
                     const std::vector<double>& upper);

}  // namespace gridflat
