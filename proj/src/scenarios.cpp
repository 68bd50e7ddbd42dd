#include "gridflat/scenarios.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <stdexcept>

namespace gridflat {

namespace {

void sort_unique(std::vector<double>& v) {
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end(),
                        [](double a, double b) { return a == b; }),
            v.end());
}

// A point that fails to solve is recorded as infeasible rather than aborting
// the sweep.
SolveReport solve_point(const ProblemConfig& config, long node_limit) {
    try {
        return solve_config(config, node_limit);
    } catch (const std::exception&) {
        SolveReport r;
        r.status = SolveStatus::Infeasible;
        return r;
    }
}

void set_capacity(ProblemConfig& config, double capacity) {
    for (auto& b : config.bess_units) {
        const double frac =
            b.capacity_kwh > 0.0 ? b.e_initial_kwh / b.capacity_kwh : b.soc_min;
        b.capacity_kwh = capacity;
        b.e_initial_kwh = frac * capacity;
    }
}

}  // namespace

SweepResult sweep_capacity(const ProblemConfig& config,
                           std::vector<double> capacities, long node_limit) {
    sort_unique(capacities);
    SweepResult out;
    out.axis = capacities;
    for (double cap : capacities) {
        ProblemConfig point = config;
        set_capacity(point, cap);
        out.reports.push_back(solve_point(point, node_limit));
    }
    for (std::size_t i = 0; i < out.axis.size(); ++i) {
        const SolveReport& r = out.reports[i];
        if (r.status == SolveStatus::Optimal && r.k_kw <= kZeroVarianceTolKw) {
            out.derived["critical_capacity_kwh"] = out.axis[i];
            break;
        }
    }
    return out;
}

SweepResult sweep_theta(const ProblemConfig& config, std::vector<double> thetas,
                        long node_limit) {
    sort_unique(thetas);
    SweepResult out;
    out.axis = thetas;
    ProblemConfig point = config;
    point.formulation = Formulation::Op1;
    for (double theta : thetas) {
        point.theta_kw = theta;
        out.reports.push_back(solve_point(point, node_limit));
    }

    double best = std::numeric_limits<double>::infinity();
    std::size_t argmin = 0;
    for (std::size_t i = 0; i < out.reports.size(); ++i) {
        const SolveReport& r = out.reports[i];
        if (r.status == SolveStatus::Optimal && r.k_kw < best) {
            best = r.k_kw;
            argmin = i;
        }
    }
    if (std::isfinite(best)) {
        out.derived["k_min"] = best;
        out.derived["theta_argmin"] = out.axis[argmin];
        if (best <= kZeroVarianceTolKw) {
            // Flat bottom: the contiguous zero-variance run around the argmin.
            std::size_t left = argmin, right = argmin;
            auto flat = [&](std::size_t i) {
                return out.reports[i].status == SolveStatus::Optimal &&
                       out.reports[i].k_kw <= kZeroVarianceTolKw;
            };
            while (left > 0 && flat(left - 1)) --left;
            while (right + 1 < out.axis.size() && flat(right + 1)) ++right;
            out.derived["theta_left_turning_point"] = out.axis[left];
            out.derived["theta_right_turning_point"] = out.axis[right];
            out.derived["flat_bottom_width"] = out.axis[right] - out.axis[left];
        }
    }
    return out;
}

std::vector<WeightingRow> compare_weightings(
    const ProblemConfig& config,
    const std::vector<std::pair<double, double>>& pairs, long node_limit) {
    std::vector<WeightingRow> out;
    const double load_min = config.load.min_value();
    for (const auto& [alpha, beta] : pairs) {
        ProblemConfig point = config;
        point.formulation = Formulation::Op2;
        point.alpha = alpha;
        point.beta = beta;
        WeightingRow row;
        row.alpha = alpha;
        row.beta = beta;
        row.report = solve_point(point, node_limit);
        row.theta_at_lower_bound =
            row.report.status == SolveStatus::Optimal &&
            nearly_equal(row.report.theta_kw, load_min, kRelTol, 1e-6);
        out.push_back(std::move(row));
    }
    return out;
}

SweepResult sweep_location(const ProblemConfig& config, std::vector<int> buses,
                           long node_limit) {
    if (config.bess_units.size() != 1)
        throw std::invalid_argument("sweep_location needs exactly one BES unit");
    std::sort(buses.begin(), buses.end());
    buses.erase(std::unique(buses.begin(), buses.end()), buses.end());

    SweepResult out;
    for (int bus : buses) {
        out.axis.push_back(static_cast<double>(bus));
        ProblemConfig point = config;
        point.bess_units[0].bus = bus;
        out.reports.push_back(solve_point(point, node_limit));
    }

    // Lumped equivalent: the same instance with the network dropped. The
    // networked total is the share-weighted load, so the lumped load is scaled
    // by the (rounded) share sum to keep the aggregates identical.
    ProblemConfig lumped = config;
    lumped.formulation = Formulation::Op2;
    if (config.feeder) {
        double share_sum = 0.0;
        for (const auto& ln : config.feeder->lines)
            share_sum += ln.p_load_share_percent;
        for (double& v : lumped.load.values) v *= share_sum / 100.0;
    }
    lumped.feeder.reset();
    const SolveReport lumped_report = solve_point(lumped, node_limit);
    if (lumped_report.status == SolveStatus::Optimal) {
        out.derived["lumped_objective"] = lumped_report.objective;
        out.derived["lumped_k"] = lumped_report.k_kw;
        // First bus, walking from the feeder end toward the substation, that
        // achieves the lumped optimum.
        for (std::size_t i = out.axis.size(); i-- > 0;) {
            const SolveReport& r = out.reports[i];
            if (r.status == SolveStatus::Optimal &&
                nearly_equal(r.objective, lumped_report.objective, kRelTol,
                             kZeroVarianceTolKw)) {
                out.derived["first_bus_matching_lumped"] = out.axis[i];
                break;
            }
        }
    }
    return out;
}

double find_critical_capacity(const ProblemConfig& config, double lo, double hi,
                              double tol_kwh, long node_limit) {
    if (!(lo < hi)) throw std::invalid_argument("need lo < hi");
    if (!(tol_kwh > 0.0)) throw std::invalid_argument("tol_kwh must be > 0");

    auto k_at = [&](double cap) {
        ProblemConfig point = config;
        set_capacity(point, cap);
        const SolveReport r = solve_point(point, node_limit);
        if (r.status != SolveStatus::Optimal)
            return std::numeric_limits<double>::infinity();
        return r.k_kw;
    };
    if (k_at(hi) > kZeroVarianceTolKw)
        throw std::invalid_argument(
            "no critical capacity in range: K(hi) is above tolerance");
    if (k_at(lo) <= kZeroVarianceTolKw) return lo;

    // Invariant: K(lo) > tol >= K(hi).
    while (hi - lo > tol_kwh) {
        const double mid = 0.5 * (lo + hi);
        if (k_at(mid) <= kZeroVarianceTolKw) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    return hi;
}

LoadProfile parse_profile(const std::string& name) {
    if (name == "duck") return LoadProfile::Duck;
    if (name == "triangle") return LoadProfile::Triangle;
    if (name == "flat") return LoadProfile::Flat;
    if (name == "sine") return LoadProfile::Sine;
    throw std::invalid_argument("unknown load profile: " + name);
}

TimeSeries generate_synthetic_load(LoadProfile profile, double min_kw,
                                   double max_kw, int steps,
                                   double step_hours) {
    if (!(min_kw <= max_kw))
        throw std::invalid_argument("invalid bounds: min_kw > max_kw");
    if (steps < 2) throw std::invalid_argument("steps must be >= 2");
    if (!(step_hours > 0.0))
        throw std::invalid_argument("step_hours must be > 0");

    TimeSeries out;
    out.step_hours = step_hours;
    out.values.resize(steps);

    switch (profile) {
        case LoadProfile::Flat: {
            if (min_kw != max_kw)
                throw std::invalid_argument(
                    "invalid bounds: flat profile requires min_kw == max_kw");
            std::fill(out.values.begin(), out.values.end(), max_kw);
            out.label = "flat";
            return out;
        }
        case LoadProfile::Triangle: {
            const int peak = (steps - 1) / 2;
            for (int t = 0; t < steps; ++t) {
                double frac;
                if (t <= peak) {
                    frac = peak == 0 ? 1.0 : static_cast<double>(t) / peak;
                } else {
                    frac = static_cast<double>(steps - 1 - t) / (steps - 1 - peak);
                }
                out.values[t] = min_kw + (max_kw - min_kw) * frac;
            }
            out.label = "triangle";
            return out;
        }
        case LoadProfile::Sine:
        case LoadProfile::Duck: {
            const double pi = 3.14159265358979323846;
            for (int t = 0; t < steps; ++t) {
                const double u = static_cast<double>(t) / steps;
                double s;
                if (profile == LoadProfile::Sine) {
                    s = -std::cos(2.0 * pi * u);
                } else {
                    // Low overnight level, midday solar valley, single evening
                    // peak with a slow post-peak decay. The affine rescale
                    // below pins the exact extrema.
                    s = 0.45 - 0.35 * std::exp(-std::pow((u - 0.52) / 0.16, 2)) +
                        0.55 * std::exp(-std::pow((u - 0.84) / 0.17, 2)) +
                        0.08 * std::cos(2.0 * pi * (u - 0.55));
                }
                out.values[t] = s;
            }
            const double lo = *std::min_element(out.values.begin(), out.values.end());
            const double hi = *std::max_element(out.values.begin(), out.values.end());
            for (double& v : out.values) {
                v = hi > lo ? min_kw + (max_kw - min_kw) * (v - lo) / (hi - lo)
                            : min_kw;
            }
            out.label = profile == LoadProfile::Sine ? "sine" : "duck";
            return out;
        }
    }
    throw std::invalid_argument("unknown profile");
}

std::string sweep_csv(const SweepResult& sweep, const std::string& axis_name) {
    std::ostringstream os;
    os << axis_name << ",k_kw,theta_kw,status\n";
    char buf[128];
    for (std::size_t i = 0; i < sweep.axis.size(); ++i) {
        const SolveReport& r = sweep.reports[i];
        std::snprintf(buf, sizeof(buf), "%.12g,%.12g,%.12g,%s\n", sweep.axis[i],
                      r.k_kw, r.theta_kw, to_string(r.status));
        os << buf;
    }
    return os.str();
}

}  // namespace gridflat
