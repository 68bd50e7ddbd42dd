#include "gridflat/formulation.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace gridflat {

namespace {

std::string nm(const char* base, int i, int t) {
    return std::string(base) + "[" + std::to_string(i) + "][" +
           std::to_string(t) + "]";
}

void require_valid(const ProblemConfig& config, Formulation expected) {
    if (config.formulation != expected)
        throw ConfigError(std::vector<Violation>{
            {"formulation-mismatch",
             "config formulation does not match the builder"}});
    auto violations = validate_config(config);
    if (!violations.empty()) throw ConfigError(violations);
}

// Battery variables and constraints shared by all three formulations:
// per unit per step one energy-recursion equality, two SOC-window rows, two
// mode-coupling rows and one exclusivity row.
void add_battery_block(MilpProblem& p, const ProblemConfig& config) {
    const int T = static_cast<int>(config.load.size());
    const double step = config.load.step_hours;
    for (std::size_t i = 0; i < config.bess_units.size(); ++i) {
        const BessSpec& b = config.bess_units[i];
        const int ui = static_cast<int>(i);
        for (int t = 0; t < T; ++t) {
            const int c = p.add_variable(nm("charge", ui, t), 0.0,
                                         b.p_charge_max_kw);
            const int d = p.add_variable(nm("discharge", ui, t), 0.0,
                                         b.p_discharge_max_kw);
            const int e = p.add_variable(nm("energy", ui, t),
                                         b.energy_min_kwh(), b.energy_max_kwh());
            const int mc =
                p.add_variable(nm("mode_charge", ui, t), 0.0, 1.0, true);
            const int md =
                p.add_variable(nm("mode_discharge", ui, t), 0.0, 1.0, true);
            p.mode_links.push_back({ui, t, c, d, mc, md});
            (void)e;
        }
        for (int t = 0; t < T; ++t) {
            const int c = p.column(nm("charge", ui, t));
            const int d = p.column(nm("discharge", ui, t));
            const int e = p.column(nm("energy", ui, t));
            const int mc = p.column(nm("mode_charge", ui, t));
            const int md = p.column(nm("mode_discharge", ui, t));

            // E(t) - E(t-1) - eta*T*c(t) + T/eta*d(t) = [e_initial at t=0]
            SparseRow rec{{e, 1.0}, {c, -b.eta * step}, {d, step / b.eta}};
            double rhs = 0.0;
            if (t == 0) {
                rhs = b.e_initial_kwh;
            } else {
                rec.push_back({p.column(nm("energy", ui, t - 1)), -1.0});
            }
            p.add_constraint(std::move(rec), Relation::Equal, rhs);

            p.add_constraint({{e, 1.0}}, Relation::GreaterEq, b.energy_min_kwh());
            p.add_constraint({{e, 1.0}}, Relation::LessEq, b.energy_max_kwh());
            p.add_constraint({{c, 1.0}, {mc, -b.p_charge_max_kw}},
                             Relation::LessEq, 0.0);
            p.add_constraint({{d, 1.0}, {md, -b.p_discharge_max_kw}},
                             Relation::LessEq, 0.0);
            p.add_constraint({{mc, 1.0}, {md, 1.0}}, Relation::LessEq, 1.0);
        }
        if (config.enforce_terminal_soc && T > 0) {
            p.add_constraint({{p.column(nm("energy", ui, T - 1)), 1.0}},
                             Relation::GreaterEq, b.e_initial_kwh);
        }
    }
}

// Epigraph rows for the lumped PCC power: for each step the pair
//   sum(c) - sum(d) [- theta] - K <= [theta] - P_L(t)
//   sum(c) - sum(d) [- theta] + K >= [theta] - P_L(t)
void add_lumped_epigraph(MilpProblem& p, const ProblemConfig& config,
                         int k_col, int theta_col) {
    const int T = static_cast<int>(config.load.size());
    const int units = static_cast<int>(config.bess_units.size());
    for (int t = 0; t < T; ++t) {
        SparseRow base;
        for (int i = 0; i < units; ++i) {
            base.push_back({p.column(nm("charge", i, t)), 1.0});
            base.push_back({p.column(nm("discharge", i, t)), -1.0});
        }
        double rhs = -config.load[t];
        if (theta_col >= 0) {
            base.push_back({theta_col, -1.0});
        } else {
            rhs += *config.theta_kw;
        }
        SparseRow upper = base;
        upper.push_back({k_col, -1.0});
        p.add_constraint(std::move(upper), Relation::LessEq, rhs);
        SparseRow lower = base;
        lower.push_back({k_col, 1.0});
        p.add_constraint(std::move(lower), Relation::GreaterEq, rhs);
    }
}

void add_objective(MilpProblem& p, const ProblemConfig& config, int k_col,
                   int theta_col) {
    if (theta_col < 0) {
        p.objective.push_back({k_col, 1.0});
    } else {
        p.objective.push_back({k_col, config.alpha});
        p.objective.push_back({theta_col, config.beta});
    }
}

}  // namespace

MilpProblem build_op1(const ProblemConfig& config) {
    require_valid(config, Formulation::Op1);
    MilpProblem p;
    add_battery_block(p, config);
    const int k_col = p.add_variable("k", 0.0, kInf);
    add_lumped_epigraph(p, config, k_col, -1);
    add_objective(p, config, k_col, -1);
    return p;
}

MilpProblem build_op2(const ProblemConfig& config) {
    require_valid(config, Formulation::Op2);
    MilpProblem p;
    add_battery_block(p, config);
    const int k_col = p.add_variable("k", 0.0, kInf);
    const int theta_col = p.add_variable("theta", config.load.min_value(),
                                         config.load.max_value());
    add_lumped_epigraph(p, config, k_col, theta_col);
    add_objective(p, config, k_col, theta_col);
    return p;
}

MilpProblem build_op3(const ProblemConfig& config) {
    require_valid(config, Formulation::Op3);
    const FeederModel& feeder = *config.feeder;
    const int T = static_cast<int>(config.load.size());
    const int L = static_cast<int>(feeder.lines.size());
    const double base_kw = feeder.p_base_kw;
    const double v0 = feeder.v0_pu;

    MilpProblem p;
    add_battery_block(p, config);
    const int k_col = p.add_variable("k", 0.0, kInf);
    const int theta_col = p.add_variable("theta", config.load.min_value(),
                                         config.load.max_value());

    // Optional reactive activity of the BES units; zero unless exposed.
    for (std::size_t i = 0; config.free_bess_reactive && i < config.bess_units.size(); ++i) {
        const BessSpec& b = config.bess_units[i];
        for (int t = 0; t < T; ++t) {
            p.add_variable(nm("q_charge", static_cast<int>(i), t), 0.0,
                           b.p_charge_max_kw / base_kw);
            p.add_variable(nm("q_discharge", static_cast<int>(i), t), 0.0,
                           b.p_discharge_max_kw / base_kw);
        }
    }

    // Flow and voltage variables. p_line[j][t] is the p.u. flow on the line
    // from node j to node j+1; v_node covers nodes 1..L (node 0 is the
    // substation, held at v0). The voltage band enters as variable bounds.
    for (int t = 0; t < T; ++t) {
        for (int j = 0; j < L; ++j)
            p.add_variable(nm("p_line", j, t), -kInf, kInf);
        for (int j = 0; j < L; ++j)
            p.add_variable(nm("q_line", j, t), -kInf, kInf);
        for (int node = 1; node <= L; ++node)
            p.add_variable(nm("v_node", node, t), 1.0 - feeder.epsilon,
                           1.0 + feeder.epsilon);
    }

    // Net-load terms of a node: percentage share of the total profile plus
    // any BES activity there, all in p.u.
    auto bes_terms_at = [&](int node, int t, double scale, SparseRow& row) {
        for (std::size_t i = 0; i < config.bess_units.size(); ++i) {
            if (config.bess_units[i].bus != node) continue;
            const int ui = static_cast<int>(i);
            row.push_back({p.column(nm("charge", ui, t)), scale});
            row.push_back({p.column(nm("discharge", ui, t)), -scale});
        }
    };
    auto bes_reactive_at = [&](int node, int t, SparseRow& row) {
        if (!config.free_bess_reactive) return;
        for (std::size_t i = 0; i < config.bess_units.size(); ++i) {
            if (config.bess_units[i].bus != node) continue;
            const int ui = static_cast<int>(i);
            row.push_back({p.column(nm("q_charge", ui, t)), 1.0});
            row.push_back({p.column(nm("q_discharge", ui, t)), -1.0});
        }
    };

    for (int t = 0; t < T; ++t) {
        // Active flow recursion with terminal condition: the last line
        // delivers exactly the last node's net load.
        for (int j = 0; j < L; ++j) {
            const int to = j + 1;
            const double share_pu =
                feeder.lines[j].p_load_share_percent / 100.0 * config.load[t] /
                base_kw;
            SparseRow row{{p.column(nm("p_line", j, t)), 1.0}};
            if (j + 1 < L) row.push_back({p.column(nm("p_line", j + 1, t)), -1.0});
            bes_terms_at(to, t, -1.0 / base_kw, row);
            p.add_constraint(std::move(row), Relation::Equal, share_pu);
        }
        // Reactive flow recursion; loads are the fixed Table-style q values.
        for (int j = 0; j < L; ++j) {
            const int to = j + 1;
            SparseRow row{{p.column(nm("q_line", j, t)), 1.0}};
            if (j + 1 < L) row.push_back({p.column(nm("q_line", j + 1, t)), -1.0});
            bes_reactive_at(to, t, row);
            p.add_constraint(std::move(row), Relation::Equal,
                             feeder.lines[j].q_load_pu);
        }
        // Linearized voltage recursion: V(i+1) = V(i) - (r P + x Q)/V0.
        for (int node = 1; node <= L; ++node) {
            const FeederLine& ln = feeder.lines[node - 1];
            SparseRow row{{p.column(nm("v_node", node, t)), 1.0},
                          {p.column(nm("p_line", node - 1, t)), ln.r_pu / v0},
                          {p.column(nm("q_line", node - 1, t)), ln.x_pu / v0}};
            double rhs = 0.0;
            if (node == 1) {
                rhs = v0;
            } else {
                row.push_back({p.column(nm("v_node", node - 1, t)), -1.0});
            }
            p.add_constraint(std::move(row), Relation::Equal, rhs);
        }
        // Epigraph on the PCC power: substation inflow plus any BES sitting
        // directly on the substation bus. The load terms live in the flow
        // rows, so the right-hand side is zero.
        SparseRow base{{p.column(nm("p_line", 0, t)), base_kw}};
        bes_terms_at(0, t, 1.0, base);
        base.push_back({theta_col, -1.0});
        const double rhs = 0.0;
        SparseRow upper = base;
        upper.push_back({k_col, -1.0});
        p.add_constraint(std::move(upper), Relation::LessEq, rhs);
        SparseRow lower = base;
        lower.push_back({k_col, 1.0});
        p.add_constraint(std::move(lower), Relation::GreaterEq, rhs);
    }

    add_objective(p, config, k_col, theta_col);
    return p;
}

MilpProblem build_problem(const ProblemConfig& config) {
    switch (config.formulation) {
        case Formulation::Op1: return build_op1(config);
        case Formulation::Op2: return build_op2(config);
        case Formulation::Op3: return build_op3(config);
    }
    throw ConfigError(
        std::vector<Violation>{{"formulation-unknown", "unknown formulation"}});
}

DecodedSolution decode_solution(const MilpProblem& problem,
                                const ProblemConfig& config,
                                const std::vector<double>& x) {
    const int T = static_cast<int>(config.load.size());
    const double step = config.load.step_hours;
    DecodedSolution out;
    out.k_kw = x[problem.column("k")];
    out.theta_kw = problem.has_column("theta") ? x[problem.column("theta")]
                                               : config.theta_kw.value_or(0.0);

    const double clamp = 1e-7;
    for (std::size_t i = 0; i < config.bess_units.size(); ++i) {
        const BessSpec& b = config.bess_units[i];
        UnitSchedule u;
        u.charge_kw.step_hours = u.discharge_kw.step_hours =
            u.energy_kwh.step_hours = step;
        u.charge_kw.label = "charge_kw";
        u.discharge_kw.label = "discharge_kw";
        u.energy_kwh.label = "energy_kwh";
        double energy = b.e_initial_kwh;
        for (int t = 0; t < T; ++t) {
            double c = x[problem.column(nm("charge", static_cast<int>(i), t))];
            double d =
                x[problem.column(nm("discharge", static_cast<int>(i), t))];
            if (std::abs(c) < clamp * std::max(1.0, b.p_charge_max_kw)) c = 0.0;
            if (std::abs(d) < clamp * std::max(1.0, b.p_discharge_max_kw)) d = 0.0;
            const double mc =
                x[problem.column(nm("mode_charge", static_cast<int>(i), t))];
            const double md =
                x[problem.column(nm("mode_discharge", static_cast<int>(i), t))];
            u.charge_kw.values.push_back(c);
            u.discharge_kw.values.push_back(d);
            u.mode_charge.push_back(mc > 0.5 ? 1 : 0);
            u.mode_discharge.push_back(md > 0.5 ? 1 : 0);
            energy += b.eta * step * c - step / b.eta * d;
            u.energy_kwh.values.push_back(energy);
        }
        out.schedule.units.push_back(std::move(u));
    }
    return out;
}

}  // namespace gridflat
