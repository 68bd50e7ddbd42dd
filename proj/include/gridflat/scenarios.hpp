#pragma once

#include <map>
#include <string>
#include <vector>

#include "gridflat/core.hpp"
#include "gridflat/solve.hpp"

namespace gridflat {

// K at or below this is treated as perfect flattening (zero variance).
inline constexpr double kZeroVarianceTolKw = 1e-3;

/// One report per swept value; axis strictly increasing. Failed points are
/// recorded (status != optimal) and the sweep continues.
struct SweepResult {
    std::vector<double> axis;
    std::vector<SolveReport> reports;
    std::map<std::string, double> derived;
};

/// Standard weight pairs for "alpha much larger" / "alpha much smaller".
inline constexpr double kAlphaDominant = 1000.0;
inline constexpr double kBetaDominant = 1000.0;

/// Re-solves the config at each capacity (initial energy rescaled to keep its
/// SOC fraction). Derives critical_capacity_kwh: the smallest axis value whose
/// K falls under the zero-variance tolerance, when any does.
SweepResult sweep_capacity(const ProblemConfig& config,
                           std::vector<double> capacities,
                           long node_limit = 100000);

/// K*(theta) curve under Op1 (theta fixed per point). Derives the grid argmin
/// and, where a flat bottom exists, its endpoints:
/// theta_left_turning_point / theta_right_turning_point.
SweepResult sweep_theta(const ProblemConfig& config, std::vector<double> thetas,
                        long node_limit = 100000);

struct WeightingRow {
    double alpha = 0.0;
    double beta = 0.0;
    SolveReport report;
    bool theta_at_lower_bound = false;
};

/// Op2 solves per (alpha, beta) pair, flagging runs whose optimized target
/// landed on the load minimum.
std::vector<WeightingRow> compare_weightings(
    const ProblemConfig& config,
    const std::vector<std::pair<double, double>>& pairs,
    long node_limit = 100000);

/// Op3 with a single BES deployed at each listed bus. Derives
/// first_bus_matching_lumped: moving from the feeder end toward the
/// substation, the first bus whose objective matches the lumped Op2 optimum.
SweepResult sweep_location(const ProblemConfig& config, std::vector<int> buses,
                           long node_limit = 100000);

/// Bisection for the smallest capacity with K <= tol (zero-variance). Requires
/// K(hi) <= tol; throws std::invalid_argument otherwise or when lo >= hi.
double find_critical_capacity(const ProblemConfig& config, double lo, double hi,
                              double tol_kwh, long node_limit = 100000);

enum class LoadProfile { Duck, Triangle, Flat, Sine };
LoadProfile parse_profile(const std::string& name);

/// Deterministic profile attaining exactly min_kw and max_kw. The duck places
/// its valley midday and its single peak in the evening. Flat requires
/// min_kw == max_kw. Throws std::invalid_argument on bad bounds or steps < 2.
TimeSeries generate_synthetic_load(LoadProfile profile, double min_kw,
                                   double max_kw, int steps,
                                   double step_hours = 1.0);

/// CSV rendering of a sweep: axis,k_kw,theta_kw,status rows.
std::string sweep_csv(const SweepResult& sweep, const std::string& axis_name);

}  // namespace gridflat
