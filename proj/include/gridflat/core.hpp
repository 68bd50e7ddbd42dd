#pragma once

#include <cmath>
#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace gridflat {

// Tolerances for equality-style checks across the library.
inline constexpr double kRelTol = 1e-6;
inline constexpr double kAbsTol = 1e-9;

inline bool nearly_equal(double a, double b, double rel = kRelTol,
                         double abs = kAbsTol) {
    return std::abs(a - b) <= abs + rel * std::max(std::abs(a), std::abs(b));
}

/// Fixed-step sampled signal over the scheduling horizon.
/// Values are kW for power series and kW·h for energy series.
struct TimeSeries {
    std::vector<double> values;
    double step_hours = 1.0;
    std::string label;

    std::size_t size() const { return values.size(); }
    double operator[](std::size_t t) const { return values[t]; }
    double min_value() const;
    double max_value() const;
};

/// Per-unit battery parameters (one BES unit).
struct BessSpec {
    int bus = 0;
    double capacity_kwh = 0.0;        // rated capacity
    double soc_min = 0.05;            // state-of-charge window, fractions
    double soc_max = 0.95;
    double eta = 0.9;                 // charge/discharge efficiency, (0,1]
    double p_charge_max_kw = 0.0;
    double p_discharge_max_kw = 0.0;
    double e_initial_kwh = 0.0;

    double energy_min_kwh() const { return soc_min * capacity_kwh; }
    double energy_max_kwh() const { return soc_max * capacity_kwh; }
};

/// Scheduled trajectories for one BES unit. Mode series are 0/1 and gate the
/// corresponding power series; the energy series follows the charge/discharge
/// recursion with the unit's efficiency.
struct UnitSchedule {
    TimeSeries charge_kw;
    TimeSeries discharge_kw;
    std::vector<int> mode_charge;
    std::vector<int> mode_discharge;
    TimeSeries energy_kwh;
};

struct BessSchedule {
    std::vector<UnitSchedule> units;

    std::size_t horizon() const {
        return units.empty() ? 0 : units.front().charge_kw.size();
    }
};

/// One line of a radial feeder; nodes are 0 (substation) .. n along a single
/// path, line k running from node k to node k+1. Active load on the to-node is
/// a percentage of the total profile; reactive load is a fixed p.u. value.
struct FeederLine {
    int from_node = 0;
    int to_node = 0;
    double r_pu = 0.0;
    double x_pu = 0.0;
    double p_load_share_percent = 0.0;
    double q_load_pu = 0.0;
};

struct FeederModel {
    std::vector<FeederLine> lines;
    double v0_pu = 1.02;       // substation voltage
    double epsilon = 0.05;     // voltage band half-width
    double p_base_kw = 1000.0; // per-unit power base

    int node_count() const { return static_cast<int>(lines.size()) + 1; }
    bool has_node(int bus) const { return bus >= 0 && bus < node_count(); }
};

enum class Formulation { Op1, Op2, Op3 };
enum class RelaxationMode { Milp, LpRelax };

const char* to_string(Formulation f);
const char* to_string(RelaxationMode m);

/// Full description of one scheduling problem instance.
struct ProblemConfig {
    Formulation formulation = Formulation::Op1;
    TimeSeries load;                       // total load P_L
    std::optional<double> theta_kw;        // fixed target (Op1 only)
    double alpha = 0.0;                    // weight on the bound K (Op2/Op3)
    double beta = 0.0;                     // weight on the target (Op2/Op3)
    std::vector<BessSpec> bess_units;
    std::optional<FeederModel> feeder;     // required for Op3
    int horizon = 0;                       // number of steps; must match load
    RelaxationMode relaxation_mode = RelaxationMode::Milp;
    bool enforce_terminal_soc = false;     // optional E(T) >= E(0) constraint
    bool free_bess_reactive = false;       // expose Q_bc/Q_bd as variables
};

struct Violation {
    std::string code;
    std::string message;
};

/// Thrown by builders and IO when handed an invalid configuration.
struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::vector<Violation>& violations);
    std::vector<Violation> violations;
};

/// Checks every config invariant and returns the violated ones
/// (empty result = valid). Pure; never throws.
std::vector<Violation> validate_config(const ProblemConfig& config);

/// P_g(t) = sum of unit charging - sum of unit discharging + P_L(t).
/// Throws std::invalid_argument on horizon mismatch.
TimeSeries pcc_power(const TimeSeries& load, const BessSchedule& schedule);

struct CheckResult {
    std::string name;
    bool pass = false;
    double worst_violation = 0.0;
    std::string detail;  // e.g. the offending unit/step
};

enum class SolveStatus { Optimal, Infeasible, Unbounded, NodeLimit };
const char* to_string(SolveStatus s);

/// Outcome of solving one ProblemConfig.
struct SolveReport {
    SolveStatus status = SolveStatus::Infeasible;
    double k_kw = 0.0;       // optimal bound K
    double theta_kw = 0.0;   // fixed or optimized target
    double objective = 0.0;  // K for Op1, alpha*K + beta*theta otherwise
    BessSchedule schedule;
    TimeSeries pcc_power_kw;
    long branch_nodes = 0;
    long lp_iterations = 0;
    std::vector<CheckResult> validation;
};

/// Re-derives the named schedule checks (SOC recursion, capacity and power
/// bounds, mode exclusivity, epigraph bound) from first principles. The
/// epigraph is checked against `pcc` when given (the network PCC power for
/// feeder formulations), else against the lumped pcc_power of the schedule.
std::vector<CheckResult> check_schedule(const ProblemConfig& config,
                                        const BessSchedule& schedule,
                                        double k_kw, double theta_kw,
                                        const TimeSeries* pcc = nullptr);

}  // namespace gridflat
