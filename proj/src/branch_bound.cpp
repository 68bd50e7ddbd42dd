#include "gridflat/branch_bound.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <queue>

namespace gridflat {

const char* to_string(MilpStatus s) {
    switch (s) {
        case MilpStatus::Optimal: return "optimal";
        case MilpStatus::Infeasible: return "infeasible";
        case MilpStatus::Unbounded: return "unbounded";
        case MilpStatus::NodeLimit: return "node_limit";
    }
    return "?";
}

namespace {

constexpr double kIntTol = 1e-6;
constexpr double kActiveTol = 1e-5;  // activity level that forces a mode on

struct Node {
    long id = 0;
    int depth = 0;
    double bound = -std::numeric_limits<double>::infinity();
    std::vector<std::pair<int, char>> fixings;  // (binary column, 0/1)
};

struct NodeOrder {
    bool operator()(const Node& a, const Node& b) const {
        if (a.bound != b.bound) return a.bound > b.bound;
        return a.id > b.id;
    }
};

std::vector<int> binary_columns(const MilpProblem& p) {
    std::vector<int> cols;
    for (int j = 0; j < p.num_variables(); ++j)
        if (p.variables[j].is_binary) cols.push_back(j);
    return cols;
}

// When no unit charges and discharges simultaneously, the LP point rounds to
// an integer-feasible point with the same objective (modes carry no cost), so
// the node is solved outright. Returns true and fills candidate on success.
bool try_mode_rounding(const MilpProblem& p, const std::vector<double>& x,
                       const std::vector<double>& lower,
                       const std::vector<double>& upper,
                       std::vector<double>& candidate) {
    if (p.mode_links.empty()) return false;
    candidate = x;
    for (const auto& link : p.mode_links) {
        double c = candidate[link.charge_col];
        double d = candidate[link.discharge_col];
        if (c > kActiveTol && d > kActiveTol) return false;
        if (c <= kActiveTol) candidate[link.charge_col] = c = 0.0;
        if (d <= kActiveTol) candidate[link.discharge_col] = d = 0.0;
        double mc = c > 0.0 ? 1.0 : 0.0;
        double md = d > 0.0 ? 1.0 : 0.0;
        mc = std::min(std::max(mc, lower[link.mode_charge_col]),
                      upper[link.mode_charge_col]);
        md = std::min(std::max(md, lower[link.mode_discharge_col]),
                      upper[link.mode_discharge_col]);
        if (mc + md > 1.5) return false;
        candidate[link.mode_charge_col] = mc;
        candidate[link.mode_discharge_col] = md;
    }
    // Any further binaries must already be integral for the rounding to apply.
    for (int j = 0; j < p.num_variables(); ++j) {
        if (!p.variables[j].is_binary) continue;
        const double f = candidate[j] - std::floor(candidate[j]);
        if (std::min(f, 1.0 - f) > kIntTol) return false;
        candidate[j] = std::round(candidate[j]);
    }
    return max_violation(p, candidate, lower, upper) <= 1e-6;
}

}  // namespace

MilpResult solve_milp(const MilpProblem& problem, long node_limit,
                      TraceSink trace) {
    if (node_limit < 1) throw std::invalid_argument("node_limit must be >= 1");
    MilpResult result;
    const std::vector<int> bins = binary_columns(problem);

    std::vector<double> base_lo(problem.num_variables());
    std::vector<double> base_up(problem.num_variables());
    for (int j = 0; j < problem.num_variables(); ++j) {
        base_lo[j] = problem.variables[j].lower;
        base_up[j] = problem.variables[j].upper;
    }

    const double inf = std::numeric_limits<double>::infinity();
    double incumbent_obj = inf;
    std::vector<double> incumbent;
    bool root_unbounded = false;

    std::priority_queue<Node, std::vector<Node>, NodeOrder> open;
    long next_id = 0;
    open.push(Node{next_id++, 0, -inf, {}});

    std::vector<double> lo = base_lo, up = base_up;
    while (!open.empty()) {
        Node node = open.top();
        open.pop();
        if (node.bound >= incumbent_obj - 1e-9 * (1.0 + std::abs(incumbent_obj))) {
            ++result.stats.nodes_pruned;
            continue;
        }
        if (result.stats.nodes_explored >= node_limit) {
            // Node limit reached; the popped node still carries the best
            // outstanding bound for the gap report.
            result.stats.gap =
                incumbent_obj == inf
                    ? inf
                    : std::max(0.0, incumbent_obj - node.bound);
            result.status = MilpStatus::NodeLimit;
            result.objective = incumbent_obj;
            result.primal = incumbent;
            return result;
        }

        lo = base_lo;
        up = base_up;
        for (const auto& [col, v] : node.fixings) {
            lo[col] = v;
            up[col] = v;
        }
        LpSolution lp = solve_lp_bounded(problem, lo, up);
        ++result.stats.nodes_explored;
        result.lp_iterations += lp.iterations;

        if (trace) {
            char buf[160];
            std::snprintf(buf, sizeof(buf),
                          "node=%ld depth=%d status=%s bound=%.9g incumbent=%.9g",
                          node.id, node.depth, to_string(lp.status),
                          lp.status == LpStatus::Optimal ? lp.objective : 0.0,
                          incumbent_obj);
            trace(buf);
        }

        if (lp.status == LpStatus::Infeasible) {
            ++result.stats.nodes_pruned;
            continue;
        }
        if (lp.status == LpStatus::Unbounded) {
            if (node.depth == 0) root_unbounded = true;
            break;
        }
        const double bound = lp.objective;
        if (bound >= incumbent_obj - 1e-9 * (1.0 + std::abs(incumbent_obj))) {
            ++result.stats.nodes_pruned;
            continue;
        }

        // Integrality check on the LP point.
        int branch_col = -1;
        double branch_frac = kIntTol;
        for (int col : bins) {
            const double v = lp.primal[col];
            const double f = v - std::floor(v);
            const double dist = std::min(f, 1.0 - f);
            if (dist > branch_frac * (1.0 + 1e-12)) {
                branch_frac = dist;
                branch_col = col;
            }
        }
        if (branch_col < 0) {
            if (bound < incumbent_obj) {
                incumbent_obj = bound;
                incumbent = lp.primal;
                for (int col : bins) incumbent[col] = std::round(incumbent[col]);
                ++result.stats.incumbent_updates;
            }
            continue;
        }

        std::vector<double> candidate;
        if (try_mode_rounding(problem, lp.primal, lo, up, candidate)) {
            const double cand_obj = problem.objective_value(candidate);
            if (cand_obj < incumbent_obj) {
                incumbent_obj = cand_obj;
                incumbent = candidate;
                ++result.stats.incumbent_updates;
            }
            if (cand_obj <= bound + 1e-9 * (1.0 + std::abs(bound))) {
                continue;  // node solved exactly; no need to branch
            }
        }

        for (char v : {char(0), char(1)}) {
            Node child;
            child.id = next_id++;
            child.depth = node.depth + 1;
            child.bound = bound;
            child.fixings = node.fixings;
            child.fixings.emplace_back(branch_col, v);
            open.push(std::move(child));
        }
    }

    if (root_unbounded) {
        result.status = MilpStatus::Unbounded;
        return result;
    }
    if (incumbent_obj == inf) {
        result.status = MilpStatus::Infeasible;
        return result;
    }
    result.status = MilpStatus::Optimal;
    result.objective = incumbent_obj;
    result.primal = incumbent;
    result.stats.gap = 0.0;
    return result;
}

OracleResult enumerate_oracle(const MilpProblem& problem) {
    const std::vector<int> bins = binary_columns(problem);
    OracleResult out;

    std::vector<double> lo(problem.num_variables());
    std::vector<double> up(problem.num_variables());
    for (int j = 0; j < problem.num_variables(); ++j) {
        lo[j] = problem.variables[j].lower;
        up[j] = problem.variables[j].upper;
    }

    if (bins.empty()) {
        LpSolution lp = solve_lp(problem);
        out.patterns_solved = 1;
        if (lp.status == LpStatus::Optimal) {
            out.feasible = true;
            out.objective = lp.objective;
            out.primal = std::move(lp.primal);
        }
        return out;
    }

    const auto& links = problem.mode_links;
    if (links.empty())
        throw std::invalid_argument(
            "enumerate_oracle needs mode links describing the binary pairs");
    std::size_t paired = 0;
    for (const auto& l : links) {
        if (!problem.variables[l.mode_charge_col].is_binary ||
            !problem.variables[l.mode_discharge_col].is_binary)
            throw std::invalid_argument("mode link does not point at binaries");
        paired += 2;
    }
    if (paired != bins.size())
        throw std::invalid_argument(
            "enumerate_oracle: binaries outside mode pairs are unsupported");

    double space = 1.0;
    for (std::size_t i = 0; i < links.size(); ++i) space *= 3.0;
    if (space > 1e6)
        throw std::invalid_argument("mode pattern space exceeds 1e6");

    const double inf = std::numeric_limits<double>::infinity();
    double best = inf;
    // Digits: 0 idle, 1 charge-only, 2 discharge-only; last pair runs fastest.
    std::vector<int> digits(links.size(), 0);
    for (;;) {
        for (std::size_t i = 0; i < links.size(); ++i) {
            const auto& l = links[i];
            const int d = digits[i];
            lo[l.mode_charge_col] = up[l.mode_charge_col] = (d == 1) ? 1.0 : 0.0;
            lo[l.mode_discharge_col] = up[l.mode_discharge_col] =
                (d == 2) ? 1.0 : 0.0;
        }
        LpSolution lp = solve_lp_bounded(problem, lo, up);
        ++out.patterns_solved;
        if (lp.status == LpStatus::Optimal && lp.objective < best - 1e-12) {
            best = lp.objective;
            out.primal = std::move(lp.primal);
            out.feasible = true;
        }
        int pos = static_cast<int>(links.size()) - 1;
        while (pos >= 0 && digits[pos] == 2) digits[pos--] = 0;
        if (pos < 0) break;
        ++digits[pos];
    }
    out.objective = out.feasible ? best : 0.0;
    return out;
}

}  // namespace gridflat
