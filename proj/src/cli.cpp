#include "gridflat/cli.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "gridflat/distflow.hpp"
#include "gridflat/io.hpp"
#include "gridflat/scenarios.hpp"
#include "gridflat/solve.hpp"

namespace gridflat {

namespace fs = std::filesystem;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInput = 1;
constexpr int kExitInfeasible = 2;

struct Overrides {
    std::optional<std::string> formulation;
    std::optional<double> theta, alpha, beta, capacity_kwh, epsilon;
    std::optional<int> bes_bus;
    bool relax = false;
    long node_limit = 100000;

    std::map<std::string, std::string> as_map() const {
        std::map<std::string, std::string> m;
        auto put = [&m](const char* k, const auto& opt) {
            if (opt) m[k] = std::to_string(*opt);
        };
        if (formulation) m["formulation"] = *formulation;
        put("theta", theta);
        put("alpha", alpha);
        put("beta", beta);
        put("capacity_kwh", capacity_kwh);
        put("epsilon", epsilon);
        put("bes_bus", bes_bus);
        if (relax) m["relax"] = "true";
        m["node_limit"] = std::to_string(node_limit);
        return m;
    }
};

void add_override_flags(CLI::App* cmd, Overrides& ov) {
    cmd->add_option("--formulation", ov.formulation,
                    "op1|op2|op3 override");
    cmd->add_option("--theta", ov.theta, "fixed target theta (kW)");
    cmd->add_option("--alpha", ov.alpha, "weight on K");
    cmd->add_option("--beta", ov.beta, "weight on theta");
    cmd->add_option("--capacity-kwh", ov.capacity_kwh,
                    "capacity applied to every BES unit");
    cmd->add_option("--bes-bus", ov.bes_bus, "bus applied to every BES unit");
    cmd->add_option("--epsilon", ov.epsilon, "voltage band half-width");
    cmd->add_option("--node-limit", ov.node_limit, "branch-and-bound node cap");
    cmd->add_flag("--relax", ov.relax, "solve the LP relaxation");
}

int apply_overrides(ProblemConfig& config, const Overrides& ov) {
    if (ov.formulation) {
        if (*ov.formulation == "op1") config.formulation = Formulation::Op1;
        else if (*ov.formulation == "op2") config.formulation = Formulation::Op2;
        else if (*ov.formulation == "op3") config.formulation = Formulation::Op3;
        else {
            std::cerr << "unknown formulation: " << *ov.formulation << "\n";
            return kExitInput;
        }
    }
    if (ov.theta) config.theta_kw = *ov.theta;
    if (ov.alpha) config.alpha = *ov.alpha;
    if (ov.beta) config.beta = *ov.beta;
    if (ov.capacity_kwh) {
        for (auto& b : config.bess_units) {
            const double frac = b.capacity_kwh > 0.0
                                    ? b.e_initial_kwh / b.capacity_kwh
                                    : b.soc_min;
            b.capacity_kwh = *ov.capacity_kwh;
            b.e_initial_kwh = frac * b.capacity_kwh;
        }
    }
    if (ov.bes_bus)
        for (auto& b : config.bess_units) b.bus = *ov.bes_bus;
    if (ov.epsilon) {
        if (!config.feeder) {
            std::cerr << "--epsilon needs a feeder in the problem\n";
            return kExitInput;
        }
        config.feeder->epsilon = *ov.epsilon;
    }
    if (ov.relax) config.relaxation_mode = RelaxationMode::LpRelax;
    return kExitOk;
}

int reject_invalid(const ProblemConfig& config) {
    const auto violations = validate_config(config);
    if (violations.empty()) return kExitOk;
    for (const auto& v : violations)
        std::cerr << "[" << v.code << "] " << v.message << "\n";
    return kExitInput;
}

int cmd_solve(const std::string& problem_file, const Overrides& ov,
              const std::string& out_dir) {
    ProblemConfig config = load_problem_json(problem_file);
    if (int rc = apply_overrides(config, ov); rc != kExitOk) return rc;
    if (int rc = reject_invalid(config); rc != kExitOk) return rc;

    fs::create_directories(out_dir);
    const SolveReport report = solve_config(config, ov.node_limit);
    write_schedule_csv(fs::path(out_dir) / "schedule.csv", report);
    write_summary_json(fs::path(out_dir) / "summary.json", report);
    write_manifest_json(fs::path(out_dir) / "manifest.json", "solve",
                        problem_input_files(problem_file), ov.as_map(), out_dir,
                        config);
    std::printf("status=%s k_kw=%.6f theta_kw=%.6f objective=%.6f nodes=%ld\n",
                to_string(report.status), report.k_kw, report.theta_kw,
                report.objective, report.branch_nodes);
    return report.status == SolveStatus::Optimal ? kExitOk : kExitInfeasible;
}

std::vector<double> parse_axis(const std::string& spec) {
    std::vector<double> axis;
    const auto colon1 = spec.find(':');
    if (colon1 != std::string::npos) {
        const auto colon2 = spec.find(':', colon1 + 1);
        if (colon2 == std::string::npos)
            throw IoError("axis spec must be start:stop:count or v1,v2,...");
        const double start = std::stod(spec.substr(0, colon1));
        const double stop = std::stod(spec.substr(colon1 + 1, colon2 - colon1 - 1));
        const int count = std::stoi(spec.substr(colon2 + 1));
        if (count < 1) throw IoError("axis count must be >= 1");
        for (int i = 0; i < count; ++i)
            axis.push_back(count == 1
                               ? start
                               : start + (stop - start) * i / (count - 1));
        return axis;
    }
    std::size_t pos = 0;
    while (pos < spec.size()) {
        auto next = spec.find(',', pos);
        if (next == std::string::npos) next = spec.size();
        axis.push_back(std::stod(spec.substr(pos, next - pos)));
        pos = next + 1;
    }
    if (axis.empty()) throw IoError("empty axis spec");
    return axis;
}

int cmd_sweep(const std::string& kind, const std::string& problem_file,
              const std::string& axis_spec, const Overrides& ov,
              const std::string& out_dir) {
    ProblemConfig config = load_problem_json(problem_file);
    if (int rc = apply_overrides(config, ov); rc != kExitOk) return rc;
    if (int rc = reject_invalid(config); rc != kExitOk) return rc;

    const std::vector<double> axis = parse_axis(axis_spec);
    SweepResult sweep;
    std::string axis_name;
    if (kind == "capacity") {
        sweep = sweep_capacity(config, axis, ov.node_limit);
        axis_name = "capacity_kwh";
    } else if (kind == "theta") {
        sweep = sweep_theta(config, axis, ov.node_limit);
        axis_name = "theta_kw";
    } else if (kind == "location") {
        std::vector<int> buses;
        for (double v : axis) buses.push_back(static_cast<int>(std::lround(v)));
        sweep = sweep_location(config, buses, ov.node_limit);
        axis_name = "bus";
    } else {
        std::cerr << "unknown sweep kind: " << kind << "\n";
        return kExitInput;
    }

    fs::create_directories(out_dir);
    write_sweep_outputs(out_dir, sweep, axis_name);
    write_manifest_json(fs::path(out_dir) / "manifest.json", "sweep " + kind,
                        problem_input_files(problem_file), ov.as_map(), out_dir,
                        config);
    long solved = 0;
    for (const auto& r : sweep.reports)
        solved += r.status == SolveStatus::Optimal ? 1 : 0;
    std::printf("points=%zu solved=%ld\n", sweep.axis.size(), solved);
    return solved > 0 ? kExitOk : kExitInfeasible;
}

int cmd_validate(const std::string& problem_file,
                 const std::string& schedule_file,
                 const std::string& summary_file) {
    const ProblemConfig config = load_problem_json(problem_file);
    if (int rc = reject_invalid(config); rc != kExitOk) return rc;

    const LoadedSchedule loaded =
        read_schedule_csv(schedule_file, config.load.step_hours);
    if (loaded.schedule.units.size() != config.bess_units.size()) {
        std::cerr << "schedule has " << loaded.schedule.units.size()
                  << " units, problem has " << config.bess_units.size() << "\n";
        return kExitInput;
    }
    if (loaded.pcc_kw.size() != config.load.size()) {
        std::cerr << "schedule horizon " << loaded.pcc_kw.size()
                  << " does not match problem horizon " << config.load.size()
                  << "\n";
        return kExitInput;
    }

    fs::path summary_path = summary_file.empty()
                                ? fs::path(schedule_file).parent_path() /
                                      "summary.json"
                                : fs::path(summary_file);
    const SummaryInfo summary = read_summary_json(summary_path);

    std::vector<CheckResult> checks;
    if (summary.found) {
        checks = validate_report(config, loaded.schedule, summary.k_kw,
                                 summary.theta_kw);
    } else {
        checks = validate_report(config, loaded.schedule, 0.0, 0.0);
        std::erase_if(checks,
                      [](const CheckResult& c) { return c.name == "epigraph"; });
        std::printf("epigraph: skipped (no summary.json with k/theta found)\n");
    }

    bool all_pass = true;
    for (const auto& c : checks) {
        std::printf("%s: %s (worst=%.3e%s%s)\n", c.name.c_str(),
                    c.pass ? "pass" : "FAIL", c.worst_violation,
                    c.detail.empty() ? "" : ", ", c.detail.c_str());
        all_pass = all_pass && c.pass;
    }
    return all_pass ? kExitOk : kExitInfeasible;
}

int cmd_gen_load(const std::string& profile, double min_kw, double max_kw,
                 int steps, double step_hours, const std::string& out_file) {
    const TimeSeries load = generate_synthetic_load(parse_profile(profile),
                                                    min_kw, max_kw, steps,
                                                    step_hours);
    write_load_csv(out_file, load);
    std::printf("wrote %s (%d steps, min=%.6g, max=%.6g)\n", out_file.c_str(),
                steps, load.min_value(), load.max_value());
    return kExitOk;
}

}  // namespace

int run_cli(int argc, const char* const* argv) {
    CLI::App app{"gridflat: battery storage scheduling for PCC load flattening"};
    app.require_subcommand(1);

    Overrides ov;
    std::string problem_file, out_dir = ".", axis_spec, kind;
    std::string schedule_file, summary_file;
    std::string profile, out_file;
    double gmin = 0.0, gmax = 0.0, gstep_hours = 1.0;
    int gsteps = 24;

    CLI::App* solve = app.add_subcommand("solve", "solve one problem file");
    solve->add_option("problem", problem_file, "problem JSON")->required();
    solve->add_option("--out", out_dir, "output directory");
    add_override_flags(solve, ov);

    CLI::App* sweep = app.add_subcommand("sweep", "parameter sweep");
    sweep->add_option("kind", kind, "capacity|theta|location")->required();
    sweep->add_option("problem", problem_file, "problem JSON")->required();
    sweep->add_option("--axis", axis_spec, "start:stop:count or v1,v2,...")
        ->required();
    sweep->add_option("--out", out_dir, "output directory");
    add_override_flags(sweep, ov);

    CLI::App* validate = app.add_subcommand("validate", "re-check a schedule");
    validate->add_option("problem", problem_file, "problem JSON")->required();
    validate->add_option("schedule", schedule_file, "schedule CSV")->required();
    validate->add_option("--summary", summary_file,
                         "summary JSON with k/theta (default: sibling)");

    CLI::App* gen = app.add_subcommand("gen-load", "write a synthetic profile");
    gen->add_option("profile", profile, "duck|triangle|flat|sine")->required();
    gen->add_option("--min", gmin, "minimum kW")->required();
    gen->add_option("--max", gmax, "maximum kW")->required();
    gen->add_option("--steps", gsteps, "sample count");
    gen->add_option("--step-hours", gstep_hours, "interval length");
    gen->add_option("--out", out_file, "output CSV")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitInput;
    }

    try {
        if (solve->parsed()) return cmd_solve(problem_file, ov, out_dir);
        if (sweep->parsed())
            return cmd_sweep(kind, problem_file, axis_spec, ov, out_dir);
        if (validate->parsed())
            return cmd_validate(problem_file, schedule_file, summary_file);
        if (gen->parsed())
            return cmd_gen_load(profile, gmin, gmax, gsteps, gstep_hours,
                                out_file);
    } catch (const ConfigError& e) {
        for (const auto& v : e.violations)
            std::cerr << "[" << v.code << "] " << v.message << "\n";
        return kExitInput;
    } catch (const IoError& e) {
        std::cerr << e.what() << "\n";
        return kExitInput;
    } catch (const std::invalid_argument& e) {
        std::cerr << e.what() << "\n";
        return kExitInput;
    } catch (const std::exception& e) {
        std::cerr << e.what() << "\n";
        return kExitInfeasible;
    }
    return kExitInput;
}

}  // namespace gridflat
