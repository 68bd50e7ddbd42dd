#pragma once

#include <functional>
#include <string>
#include <vector>

#include "gridflat/milp.hpp"
#include "gridflat/simplex.hpp"

namespace gridflat {

struct BnbStats {
    long nodes_explored = 0;
    long nodes_pruned = 0;
    long incumbent_updates = 0;
    double gap = 0.0;  // absolute; 0 at proven optimality
};

enum class MilpStatus { Optimal, Infeasible, Unbounded, NodeLimit };
const char* to_string(MilpStatus s);

struct MilpResult {
    MilpStatus status = MilpStatus::Infeasible;
    double objective = 0.0;
    std::vector<double> primal;
    BnbStats stats;
    long lp_iterations = 0;
};

/// One line per explored node (bound, incumbent, depth), for debugging.
using TraceSink = std::function<void(const std::string&)>;

/// Best-bound branch and bound over the problem's binary columns. Branches on
/// the most fractional binary (lowest column index on ties, which orders
/// charge modes before discharge modes); if the root relaxation is already
/// integral it is returned directly. Every incumbent is re-certified against
/// the constraints before acceptance.
MilpResult solve_milp(const MilpProblem& problem, long node_limit = 100000,
                      TraceSink trace = nullptr);

struct OracleResult {
    bool feasible = false;
    double objective = 0.0;
    std::vector<double> primal;
    long patterns_solved = 0;
};

/// Exhaustive verification oracle: solves the LP restriction of every
/// admissible mode pattern (idle / charge-only / discharge-only per unit and
/// step) and returns the best. Requires the pattern space to stay within 1e6;
/// throws std::invalid_argument beyond that or when binaries are not
/// organized as mode pairs.
OracleResult enumerate_oracle(const MilpProblem& problem);

}  // namespace gridflat
