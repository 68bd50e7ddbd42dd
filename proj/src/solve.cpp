#include "gridflat/solve.hpp"

#include <cmath>

#include "gridflat/distflow.hpp"

namespace gridflat {

namespace {

// PCC power seen through the feeder: substation inflow plus any unit sitting
// on the substation bus itself. This differs from the lumped sum whenever the
// feeder's load shares do not add up to exactly 100 percent.
TimeSeries network_pcc(const ProblemConfig& config,
                       const BessSchedule& schedule) {
    const FeederModel& feeder = *config.feeder;
    const NetLoads nl = netloads_from_schedule(feeder, config.load,
                                               config.bess_units, schedule);
    const FlowState flow = simplified_flow(feeder, nl);
    TimeSeries out;
    out.step_hours = config.load.step_hours;
    out.label = "pcc_kw";
    out.values.resize(config.load.size());
    for (std::size_t t = 0; t < out.values.size(); ++t) {
        double p = flow.p(0, static_cast<int>(t)) * feeder.p_base_kw;
        for (std::size_t i = 0; i < config.bess_units.size(); ++i) {
            if (config.bess_units[i].bus != 0) continue;
            p += schedule.units[i].charge_kw[t] -
                 schedule.units[i].discharge_kw[t];
        }
        out.values[t] = p;
    }
    return out;
}

}  // namespace

std::vector<CheckResult> validate_report(const ProblemConfig& config,
                                         const BessSchedule& schedule,
                                         double k_kw, double theta_kw) {
    const bool networked =
        config.formulation == Formulation::Op3 && config.feeder.has_value();
    std::vector<CheckResult> checks;
    if (networked) {
        const TimeSeries pcc = network_pcc(config, schedule);
        checks = check_schedule(config, schedule, k_kw, theta_kw, &pcc);
        const NetLoads nl = netloads_from_schedule(
            *config.feeder, config.load, config.bess_units, schedule);
        const FlowState state = simplified_flow(*config.feeder, nl);
        double worst = 0.0;
        for (const auto& v : check_voltage_band(state, config.feeder->epsilon))
            worst = std::max(worst, v.magnitude);
        checks.push_back(
            {"voltage-band", worst <= kAbsTol + kRelTol, worst, ""});
    } else {
        checks = check_schedule(config, schedule, k_kw, theta_kw);
    }
    return checks;
}

SolveReport solve_config(const ProblemConfig& config, long node_limit,
                         TraceSink trace) {
    const MilpProblem problem = build_problem(config);
    SolveReport report;

    std::vector<double> primal;
    if (config.relaxation_mode == RelaxationMode::LpRelax) {
        const MilpProblem relaxed = lp_relaxation(problem);
        LpSolution lp = solve_lp(relaxed);
        report.lp_iterations = lp.iterations;
        report.branch_nodes = 0;
        switch (lp.status) {
            case LpStatus::Optimal: report.status = SolveStatus::Optimal; break;
            case LpStatus::Infeasible:
                report.status = SolveStatus::Infeasible;
                break;
            case LpStatus::Unbounded:
                report.status = SolveStatus::Unbounded;
                break;
        }
        if (report.status != SolveStatus::Optimal) return report;
        report.objective = lp.objective;
        primal = std::move(lp.primal);
    } else {
        MilpResult milp = solve_milp(problem, node_limit, std::move(trace));
        report.lp_iterations = milp.lp_iterations;
        report.branch_nodes = milp.stats.nodes_explored;
        switch (milp.status) {
            case MilpStatus::Optimal: report.status = SolveStatus::Optimal; break;
            case MilpStatus::Infeasible:
                report.status = SolveStatus::Infeasible;
                break;
            case MilpStatus::Unbounded:
                report.status = SolveStatus::Unbounded;
                break;
            case MilpStatus::NodeLimit:
                report.status = SolveStatus::NodeLimit;
                break;
        }
        if (milp.primal.empty()) return report;
        report.objective = milp.objective;
        primal = std::move(milp.primal);
    }

    DecodedSolution decoded = decode_solution(problem, config, primal);
    report.k_kw = decoded.k_kw;
    report.theta_kw = decoded.theta_kw;
    report.schedule = std::move(decoded.schedule);
    if (config.formulation == Formulation::Op3 && config.feeder) {
        report.pcc_power_kw = network_pcc(config, report.schedule);
    } else {
        report.pcc_power_kw = pcc_power(config.load, report.schedule);
    }
    report.validation = validate_report(config, report.schedule, report.k_kw,
                                        report.theta_kw);
    return report;
}

}  // namespace gridflat
