#include "gridflat/distflow.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>
#include <stdexcept>

namespace gridflat {

NetLoads NetLoads::zeros(int nodes, int steps) {
    NetLoads n;
    n.nodes = nodes;
    n.steps = steps;
    n.p_pu.assign(static_cast<std::size_t>(nodes) * steps, 0.0);
    n.q_pu.assign(static_cast<std::size_t>(nodes) * steps, 0.0);
    return n;
}

namespace {

FlowState make_state(const FeederModel& feeder, const NetLoads& netloads) {
    if (netloads.nodes != feeder.node_count())
        throw std::invalid_argument("netloads must cover every feeder node");
    FlowState s;
    s.nodes = feeder.node_count();
    s.steps = netloads.steps;
    const std::size_t sz = static_cast<std::size_t>(s.nodes) * s.steps;
    s.p_branch_pu.assign(sz, 0.0);
    s.q_branch_pu.assign(sz, 0.0);
    s.v_pu.assign(sz, 0.0);
    s.p_netload_pu = netloads.p_pu;
    s.q_netload_pu = netloads.q_pu;
    return s;
}

}  // namespace

FlowState simplified_flow(const FeederModel& feeder, const NetLoads& netloads) {
    FlowState s = make_state(feeder, netloads);
    const int n = s.nodes;
    const int L = static_cast<int>(feeder.lines.size());
    for (int t = 0; t < s.steps; ++t) {
        // Backward accumulation gives P(i) = sum of net loads beyond node i;
        // the terminal branch flow is identically zero.
        double pacc = 0.0, qacc = 0.0;
        for (int node = n - 1; node >= 0; --node) {
            s.at(s.p_branch_pu, node, t) = pacc + (node + 1 < n ? s.get(netloads.p_pu, node + 1, t) : 0.0);
            s.at(s.q_branch_pu, node, t) = qacc + (node + 1 < n ? s.get(netloads.q_pu, node + 1, t) : 0.0);
            pacc = s.p(node, t);
            qacc = s.q(node, t);
        }
        s.at(s.v_pu, 0, t) = feeder.v0_pu;
        for (int j = 0; j < L; ++j) {
            const FeederLine& ln = feeder.lines[j];
            s.at(s.v_pu, j + 1, t) =
                s.v(j, t) -
                (ln.r_pu * s.p(j, t) + ln.x_pu * s.q(j, t)) / feeder.v0_pu;
        }
    }
    return s;
}

FlowState full_flow(const FeederModel& feeder, const NetLoads& netloads,
                    double substation_v) {
    FlowState s = simplified_flow(feeder, netloads);
    const int L = static_cast<int>(feeder.lines.size());
    const int n = s.nodes;

    std::vector<double> p(n), q(n), v2(n);
    for (int t = 0; t < s.steps; ++t) {
        // Fixed point on the head injection: forward-sweep the quadratic
        // recursion and fold the terminal mismatch back into the head flow.
        // The mismatch equals the change of the head flow between sweeps, so
        // the 1e-10 test is on successive branch-flow changes.
        double p0 = s.p(0, t);
        double q0 = s.q(0, t);
        double residual = 0.0;
        bool converged = false;
        for (int it = 0; it < 100; ++it) {
            p[0] = p0;
            q[0] = q0;
            v2[0] = substation_v * substation_v;
            for (int j = 0; j < L; ++j) {
                const FeederLine& ln = feeder.lines[j];
                if (v2[j] <= 0.0)
                    throw std::runtime_error("full_flow: voltage collapse");
                const double loss = (p[j] * p[j] + q[j] * q[j]) / v2[j];
                p[j + 1] = p[j] - ln.r_pu * loss - s.get(netloads.p_pu, j + 1, t);
                q[j + 1] = q[j] - ln.x_pu * loss - s.get(netloads.q_pu, j + 1, t);
                v2[j + 1] = v2[j] - 2.0 * (ln.r_pu * p[j] + ln.x_pu * q[j]) +
                            (ln.r_pu * ln.r_pu + ln.x_pu * ln.x_pu) * loss;
            }
            residual = std::max(std::abs(p[n - 1]), std::abs(q[n - 1]));
            if (residual < 1e-10) {
                converged = true;
                break;
            }
            p0 -= p[n - 1];
            q0 -= q[n - 1];
        }
        if (!converged) {
            char buf[96];
            std::snprintf(buf, sizeof(buf),
                          "full_flow did not converge (step %d, residual %.3e)",
                          t, residual);
            throw std::runtime_error(buf);
        }
        for (int node = 0; node < n; ++node) {
            s.at(s.p_branch_pu, node, t) = node < n - 1 ? p[node] : 0.0;
            s.at(s.q_branch_pu, node, t) = node < n - 1 ? q[node] : 0.0;
            s.at(s.v_pu, node, t) = std::sqrt(v2[node]);
        }
    }
    return s;
}

std::vector<VoltageViolation> check_voltage_band(const FlowState& state,
                                                 double epsilon) {
    std::vector<VoltageViolation> out;
    for (int node = 0; node < state.nodes; ++node) {
        for (int t = 0; t < state.steps; ++t) {
            const double v = state.v(node, t);
            double mag = 0.0;
            if (v < 1.0 - epsilon) mag = (1.0 - epsilon) - v;
            if (v > 1.0 + epsilon) mag = v - (1.0 + epsilon);
            if (mag > 0.0) out.push_back({node, t, mag});
        }
    }
    return out;
}

NetLoads netloads_from_schedule(const FeederModel& feeder,
                                const TimeSeries& load,
                                const std::vector<BessSpec>& units,
                                const BessSchedule& schedule) {
    const int steps = static_cast<int>(load.size());
    NetLoads nl = NetLoads::zeros(feeder.node_count(), steps);
    for (std::size_t j = 0; j < feeder.lines.size(); ++j) {
        const FeederLine& ln = feeder.lines[j];
        for (int t = 0; t < steps; ++t) {
            nl.p(ln.to_node, t) +=
                ln.p_load_share_percent / 100.0 * load[t] / feeder.p_base_kw;
            nl.q(ln.to_node, t) += ln.q_load_pu;
        }
    }
    for (std::size_t i = 0; i < units.size() && i < schedule.units.size(); ++i) {
        const UnitSchedule& u = schedule.units[i];
        for (int t = 0; t < steps; ++t) {
            nl.p(units[i].bus, t) +=
                (u.charge_kw[t] - u.discharge_kw[t]) / feeder.p_base_kw;
        }
    }
    return nl;
}

std::string flow_state_csv(const FlowState& state) {
    std::ostringstream os;
    os << "node,step,p_pu,q_pu,v_pu\n";
    char buf[128];
    for (int node = 0; node < state.nodes; ++node) {
        for (int t = 0; t < state.steps; ++t) {
            std::snprintf(buf, sizeof(buf), "%d,%d,%.12g,%.12g,%.12g\n", node,
                          t, state.p(node, t), state.q(node, t),
                          state.v(node, t));
            os << buf;
        }
    }
    return os.str();
}

}  // namespace gridflat
