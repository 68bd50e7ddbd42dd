#include "gridflat/core.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace gridflat {

double TimeSeries::min_value() const {
    return *std::min_element(values.begin(), values.end());
}

double TimeSeries::max_value() const {
    return *std::max_element(values.begin(), values.end());
}

const char* to_string(Formulation f) {
    switch (f) {
        case Formulation::Op1: return "op1";
        case Formulation::Op2: return "op2";
        case Formulation::Op3: return "op3";
    }
    return "?";
}

const char* to_string(RelaxationMode m) {
    return m == RelaxationMode::Milp ? "milp" : "lp-relax";
}

const char* to_string(SolveStatus s) {
    switch (s) {
        case SolveStatus::Optimal: return "optimal";
        case SolveStatus::Infeasible: return "infeasible";
        case SolveStatus::Unbounded: return "unbounded";
        case SolveStatus::NodeLimit: return "node_limit";
    }
    return "?";
}

namespace {

std::string join_messages(const std::vector<Violation>& violations) {
    std::ostringstream os;
    os << "invalid config:";
    for (const auto& v : violations) os << " [" << v.code << "] " << v.message;
    return os.str();
}

void add(std::vector<Violation>& out, std::string code, std::string message) {
    out.push_back({std::move(code), std::move(message)});
}

}  // namespace

ConfigError::ConfigError(const std::vector<Violation>& v)
    : std::runtime_error(join_messages(v)), violations(v) {}

std::vector<Violation> validate_config(const ProblemConfig& c) {
    std::vector<Violation> out;

    if (c.load.values.empty()) {
        add(out, "load-empty", "load series must have at least one sample");
    }
    for (double v : c.load.values) {
        if (!std::isfinite(v)) {
            add(out, "load-nonfinite", "load series contains a non-finite sample");
            break;
        }
    }
    if (!(c.load.step_hours > 0.0)) {
        add(out, "step-nonpositive", "step_hours must be > 0");
    }
    if (c.horizon != static_cast<int>(c.load.size())) {
        add(out, "horizon-mismatch",
            "horizon (" + std::to_string(c.horizon) + ") != load length (" +
                std::to_string(c.load.size()) + ")");
    }

    for (std::size_t i = 0; i < c.bess_units.size(); ++i) {
        const BessSpec& b = c.bess_units[i];
        const std::string tag = "bess[" + std::to_string(i) + "]: ";
        if (!(b.soc_min < b.soc_max))
            add(out, "soc-order", tag + "soc_min must be < soc_max");
        if (b.soc_min < 0.0 || b.soc_max > 1.0)
            add(out, "soc-range", tag + "SOC limits must lie in [0,1]");
        if (!(b.eta > 0.0 && b.eta <= 1.0))
            add(out, "eta-range", tag + "efficiency must lie in (0,1]");
        if (b.capacity_kwh < 0.0)
            add(out, "capacity-negative", tag + "capacity must be >= 0");
        if (b.p_charge_max_kw < 0.0 || b.p_discharge_max_kw < 0.0)
            add(out, "power-limit-negative", tag + "power limits must be >= 0");
        if (b.soc_min < b.soc_max &&
            (b.e_initial_kwh < b.energy_min_kwh() - kAbsTol ||
             b.e_initial_kwh > b.energy_max_kwh() + kAbsTol))
            add(out, "e-initial-range",
                tag + "initial energy outside the SOC window");
    }

    const bool weighted = c.formulation != Formulation::Op1;
    if (c.formulation == Formulation::Op1) {
        if (!c.theta_kw || !std::isfinite(*c.theta_kw))
            add(out, "theta-required", "op1 needs a finite fixed target theta_kw");
    } else {
        if (!(c.alpha > 0.0))
            add(out, "alpha-positive", "alpha must be > 0");
        if (!(c.beta > 0.0))
            add(out, "beta-positive", "beta must be > 0");
    }
    if (c.formulation == Formulation::Op3 && c.alpha > 0.0 && c.beta > 0.0 &&
        !(c.alpha > c.beta)) {
        add(out, "alpha-beta-order", "op3 requires alpha > beta");
    }

    if (c.formulation == Formulation::Op3) {
        if (!c.feeder) {
            add(out, "feeder-missing", "op3 needs a feeder model");
        } else {
            const FeederModel& f = *c.feeder;
            for (std::size_t k = 0; k < f.lines.size(); ++k) {
                if (f.lines[k].from_node != static_cast<int>(k) ||
                    f.lines[k].to_node != static_cast<int>(k) + 1) {
                    add(out, "feeder-not-radial-path",
                        "lines must form the single path 0->1->...->n");
                    break;
                }
            }
            double share_sum = 0.0;
            for (const auto& ln : f.lines) {
                share_sum += ln.p_load_share_percent;
                if (ln.r_pu < 0.0 || ln.x_pu < 0.0) {
                    add(out, "impedance-negative", "line impedances must be >= 0");
                    break;
                }
            }
            if (!f.lines.empty() && std::abs(share_sum - 100.0) > 0.1)
                add(out, "share-sum", "load shares must sum to 100 +/- 0.1");
            if (!(f.epsilon > 0.0))
                add(out, "epsilon-positive", "voltage band epsilon must be > 0");
            if (!(f.p_base_kw > 0.0))
                add(out, "pbase-positive", "p_base_kw must be > 0");
            for (std::size_t i = 0; i < c.bess_units.size(); ++i) {
                if (!f.has_node(c.bess_units[i].bus))
                    add(out, "bes-bus-missing",
                        "bess[" + std::to_string(i) + "] bus " +
                            std::to_string(c.bess_units[i].bus) +
                            " is not a feeder node");
            }
        }
    }
    (void)weighted;
    return out;
}

TimeSeries pcc_power(const TimeSeries& load, const BessSchedule& schedule) {
    const std::size_t n = load.size();
    for (const auto& u : schedule.units) {
        if (u.charge_kw.size() != n || u.discharge_kw.size() != n)
            throw std::invalid_argument(
                "pcc_power: schedule horizon does not match load");
    }
    TimeSeries out;
    out.values.resize(n);
    out.step_hours = load.step_hours;
    out.label = "pcc_kw";
    for (std::size_t t = 0; t < n; ++t) {
        double p = load[t];
        for (const auto& u : schedule.units)
            p += u.charge_kw[t] - u.discharge_kw[t];
        out.values[t] = p;
    }
    return out;
}

std::vector<CheckResult> check_schedule(const ProblemConfig& config,
                                        const BessSchedule& schedule,
                                        double k_kw, double theta_kw,
                                        const TimeSeries* pcc) {
    std::vector<CheckResult> out;
    const std::size_t n = config.load.size();
    const double step = config.load.step_hours;

    struct Worst {
        double value = 0.0;
        std::string where;
        void update(double v, std::size_t unit, std::size_t t) {
            if (v > value) {
                value = v;
                where = "unit " + std::to_string(unit) + " step " +
                        std::to_string(t);
            }
        }
    };
    Worst soc_rec, soc_bound, power, excl;
    for (std::size_t i = 0; i < schedule.units.size(); ++i) {
        const UnitSchedule& u = schedule.units[i];
        const BessSpec& spec = config.bess_units.at(i);
        double prev = spec.e_initial_kwh;
        for (std::size_t t = 0; t < n; ++t) {
            const double c = u.charge_kw[t];
            const double d = u.discharge_kw[t];
            const double e = u.energy_kwh[t];
            const double expected =
                prev + spec.eta * step * c - step / spec.eta * d;
            soc_rec.update(std::abs(e - expected), i, t);
            prev = e;
            soc_bound.update(spec.energy_min_kwh() - e, i, t);
            soc_bound.update(e - spec.energy_max_kwh(), i, t);
            const int mc = u.mode_charge[t];
            const int md = u.mode_discharge[t];
            excl.update(static_cast<double>(mc + md - 1), i, t);
            power.update(c - spec.p_charge_max_kw * mc, i, t);
            power.update(d - spec.p_discharge_max_kw * md, i, t);
            power.update(-c, i, t);
            power.update(-d, i, t);
        }
    }
    auto record = [&out](const std::string& name, const Worst& w, double tol) {
        out.push_back({name, w.value <= tol, w.value,
                       w.value <= tol ? std::string() : w.where});
    };
    // Absolute 1e-9 on the recursion; everything else scales with magnitude.
    record("soc-recursion", soc_rec, 1e-9 * std::max(1.0, step));
    double e_scale = 1.0;
    for (const auto& b : config.bess_units)
        e_scale = std::max(e_scale, b.capacity_kwh);
    record("soc-bounds", soc_bound, kAbsTol + kRelTol * e_scale);
    double p_scale = std::max(1.0, config.load.max_value());
    for (const auto& b : config.bess_units)
        p_scale = std::max({p_scale, b.p_charge_max_kw, b.p_discharge_max_kw});
    record("power-bounds", power, kAbsTol + kRelTol * p_scale);
    record("simultaneous-mode", excl, 0.0);

    if (!schedule.units.empty() || n > 0) {
        const TimeSeries pg = pcc ? *pcc : pcc_power(config.load, schedule);
        Worst epi;
        for (std::size_t t = 0; t < n; ++t)
            epi.update(std::abs(pg[t] - theta_kw) - k_kw, 0, t);
        record("epigraph", epi, kAbsTol + kRelTol * p_scale);
    }
    return out;
}

}  // namespace gridflat
