#pragma once

#include <string>
#include <vector>

#include "gridflat/core.hpp"

namespace gridflat {

/// Per-node, per-step network state. Branch arrays are indexed by the sending
/// node (flow on the line from node i to i+1; zero at the terminal node).
/// All quantities in per unit.
struct FlowState {
    int nodes = 0;
    int steps = 0;
    std::vector<double> p_branch_pu;   // nodes x steps
    std::vector<double> q_branch_pu;
    std::vector<double> v_pu;
    std::vector<double> p_netload_pu;
    std::vector<double> q_netload_pu;

    double& at(std::vector<double>& a, int node, int t) {
        return a[static_cast<std::size_t>(node) * steps + t];
    }
    double get(const std::vector<double>& a, int node, int t) const {
        return a[static_cast<std::size_t>(node) * steps + t];
    }
    double p(int node, int t) const { return get(p_branch_pu, node, t); }
    double q(int node, int t) const { return get(q_branch_pu, node, t); }
    double v(int node, int t) const { return get(v_pu, node, t); }
};

/// Net loads, per node (0..n) and step, in per unit.
struct NetLoads {
    int nodes = 0;
    int steps = 0;
    std::vector<double> p_pu;  // nodes x steps
    std::vector<double> q_pu;

    static NetLoads zeros(int nodes, int steps);
    double& p(int node, int t) {
        return p_pu[static_cast<std::size_t>(node) * steps + t];
    }
    double& q(int node, int t) {
        return q_pu[static_cast<std::size_t>(node) * steps + t];
    }
};

/// Linearized lossless flow: branch powers accumulate net loads from the far
/// end; voltages follow V(i+1) = V(i) - (r P + x Q)/V0 with V(0) = V0.
FlowState simplified_flow(const FeederModel& feeder, const NetLoads& netloads);

/// Full quadratic branch-flow sweep, solved as a fixed point starting from the
/// simplified solution; iterates until successive branch-flow changes fall
/// under 1e-10 p.u. Throws SolverError-style runtime_error on non-convergence
/// within 100 iterations, reporting the residual.
FlowState full_flow(const FeederModel& feeder, const NetLoads& netloads,
                    double substation_v);

struct VoltageViolation {
    int node = 0;
    int step = 0;
    double magnitude = 0.0;  // distance outside the band
};

/// Every (node, step) whose voltage leaves [1-epsilon, 1+epsilon].
std::vector<VoltageViolation> check_voltage_band(const FlowState& state,
                                                 double epsilon);

/// Builds per-node net loads from a total load profile split by the feeder's
/// percentage shares, plus the battery activity of a schedule (kW converted
/// through p_base_kw). Reactive loads are the feeder's fixed values.
NetLoads netloads_from_schedule(const FeederModel& feeder,
                                const TimeSeries& load,
                                const std::vector<BessSpec>& units,
                                const BessSchedule& schedule);

/// CSV rendering: node, step, p_pu, q_pu, v_pu.
std::string flow_state_csv(const FlowState& state);

}  // namespace gridflat
