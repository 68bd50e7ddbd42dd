#include "gridflat/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdint>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace gridflat {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return buf;
}

// Round-trippable rendering for files that get re-read and re-checked at
// 1e-9 absolute tolerance (schedule energies run in the thousands of kWh).
std::string fmt_exact(double v) {
    char buf[48];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ',')) {
        // trim
        const auto a = field.find_first_not_of(" \t\r");
        const auto b = field.find_last_not_of(" \t\r");
        out.push_back(a == std::string::npos ? "" : field.substr(a, b - a + 1));
    }
    return out;
}

std::vector<std::vector<std::string>> read_csv(const fs::path& path,
                                               const std::string& header) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot read " + path.string());
    std::string line;
    if (!std::getline(in, line)) throw IoError("empty file: " + path.string());
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != header)
        throw IoError("unexpected CSV header in " + path.string() +
                      " (want `" + header + "`, got `" + line + "`)");
    std::vector<std::vector<std::string>> rows;
    while (std::getline(in, line)) {
        if (line.empty() || line == "\r") continue;
        rows.push_back(split_csv_line(line));
    }
    return rows;
}

double to_double(const std::string& s, const fs::path& path) {
    try {
        std::size_t pos = 0;
        const double v = std::stod(s, &pos);
        if (pos != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw IoError("bad number `" + s + "` in " + path.string());
    }
}

json load_to_json(const TimeSeries& t) {
    return json{{"values", t.values},
                {"step_hours", t.step_hours},
                {"label", t.label}};
}

}  // namespace

std::vector<FeederLine> read_feeder_lines_csv(const fs::path& path) {
    const auto rows = read_csv(path, "from,to,r_pu,x_pu,p_share_pct,q_pu");
    std::vector<FeederLine> lines;
    for (const auto& r : rows) {
        if (r.size() != 6)
            throw IoError("feeder rows need 6 fields: " + path.string());
        FeederLine ln;
        ln.from_node = static_cast<int>(to_double(r[0], path));
        ln.to_node = static_cast<int>(to_double(r[1], path));
        ln.r_pu = to_double(r[2], path);
        ln.x_pu = to_double(r[3], path);
        ln.p_load_share_percent = to_double(r[4], path);
        ln.q_load_pu = to_double(r[5], path);
        lines.push_back(ln);
    }
    return lines;
}

void write_feeder_lines_csv(const fs::path& path,
                            const std::vector<FeederLine>& lines) {
    std::ostringstream os;
    os << "from,to,r_pu,x_pu,p_share_pct,q_pu\n";
    for (const auto& ln : lines)
        os << ln.from_node << "," << ln.to_node << "," << fmt(ln.r_pu) << ","
           << fmt(ln.x_pu) << "," << fmt(ln.p_load_share_percent) << ","
           << fmt(ln.q_load_pu) << "\n";
    write_text_file(path, os.str());
}

TimeSeries read_load_csv(const fs::path& path, double step_hours) {
    const auto rows = read_csv(path, "t,kw");
    TimeSeries out;
    out.step_hours = step_hours;
    out.label = path.stem().string();
    for (const auto& r : rows) {
        if (r.size() != 2) throw IoError("load rows need 2 fields");
        out.values.push_back(to_double(r[1], path));
    }
    return out;
}

void write_load_csv(const fs::path& path, const TimeSeries& load) {
    std::ostringstream os;
    os << "t,kw\n";
    for (std::size_t t = 0; t < load.size(); ++t)
        os << t << "," << fmt(load[t]) << "\n";
    write_text_file(path, os.str());
}

ProblemConfig load_problem_json(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot read " + path.string());
    json j;
    try {
        in >> j;
    } catch (const std::exception& e) {
        throw IoError("bad JSON in " + path.string() + ": " + e.what());
    }
    const fs::path dir = path.parent_path();

    ProblemConfig c;
    const std::string form = j.value("formulation", "op1");
    if (form == "op1") c.formulation = Formulation::Op1;
    else if (form == "op2") c.formulation = Formulation::Op2;
    else if (form == "op3") c.formulation = Formulation::Op3;
    else throw IoError("unknown formulation: " + form);

    if (j.contains("load")) {
        const json& l = j.at("load");
        c.load.values = l.at("values").get<std::vector<double>>();
        c.load.step_hours = l.value("step_hours", 1.0);
        c.load.label = l.value("label", "");
    } else if (j.contains("load_csv")) {
        c.load = read_load_csv(dir / j.at("load_csv").get<std::string>(),
                               j.value("step_hours", 1.0));
    } else {
        throw IoError("problem needs `load` or `load_csv`");
    }

    if (j.contains("theta_kw")) c.theta_kw = j.at("theta_kw").get<double>();
    c.alpha = j.value("alpha", 0.0);
    c.beta = j.value("beta", 0.0);
    c.horizon = j.value("horizon", static_cast<int>(c.load.size()));
    const std::string relax = j.value("relaxation_mode", "milp");
    if (relax == "milp") c.relaxation_mode = RelaxationMode::Milp;
    else if (relax == "lp-relax") c.relaxation_mode = RelaxationMode::LpRelax;
    else throw IoError("unknown relaxation_mode: " + relax);
    c.enforce_terminal_soc = j.value("enforce_terminal_soc", false);
    c.free_bess_reactive = j.value("free_bess_reactive", false);

    const double default_limit =
        c.load.values.empty() ? 0.0 : 10.0 * c.load.max_value();
    for (const json& bj : j.value("bess_units", json::array())) {
        BessSpec b;
        b.bus = bj.value("bus", 0);
        b.capacity_kwh = bj.value("capacity_kwh", 0.0);
        b.soc_min = bj.value("soc_min", 0.05);
        b.soc_max = bj.value("soc_max", 0.95);
        b.eta = bj.value("eta", 0.9);
        b.p_charge_max_kw = bj.value("p_charge_max_kw", default_limit);
        b.p_discharge_max_kw = bj.value("p_discharge_max_kw", default_limit);
        b.e_initial_kwh =
            bj.value("e_initial_kwh", b.soc_min * b.capacity_kwh);
        c.bess_units.push_back(b);
    }

    if (j.contains("feeder")) {
        const json& fj = j.at("feeder");
        FeederModel f;
        f.v0_pu = fj.value("v0_pu", 1.02);
        f.epsilon = fj.value("epsilon", 0.05);
        f.p_base_kw = fj.value("p_base_kw", 1000.0);
        if (fj.contains("lines_csv")) {
            f.lines =
                read_feeder_lines_csv(dir / fj.at("lines_csv").get<std::string>());
        } else if (fj.contains("lines")) {
            for (const json& lj : fj.at("lines")) {
                FeederLine ln;
                ln.from_node = lj.at(0).get<int>();
                ln.to_node = lj.at(1).get<int>();
                ln.r_pu = lj.at(2).get<double>();
                ln.x_pu = lj.at(3).get<double>();
                ln.p_load_share_percent = lj.at(4).get<double>();
                ln.q_load_pu = lj.at(5).get<double>();
                f.lines.push_back(ln);
            }
        } else {
            throw IoError("feeder needs `lines` or `lines_csv`");
        }
        c.feeder = std::move(f);
    }
    return c;
}

std::vector<std::string> problem_input_files(const fs::path& path) {
    std::vector<std::string> out{path.string()};
    std::ifstream in(path);
    if (!in) return out;
    json j;
    try {
        in >> j;
    } catch (const std::exception&) {
        return out;
    }
    const fs::path dir = path.parent_path();
    if (j.contains("load_csv"))
        out.push_back((dir / j.at("load_csv").get<std::string>()).string());
    if (j.contains("feeder") && j.at("feeder").contains("lines_csv"))
        out.push_back(
            (dir / j.at("feeder").at("lines_csv").get<std::string>()).string());
    return out;
}

std::string config_canonical_json(const ProblemConfig& c) {
    json j;
    j["formulation"] = to_string(c.formulation);
    j["load"] = load_to_json(c.load);
    if (c.theta_kw) j["theta_kw"] = *c.theta_kw;
    j["alpha"] = c.alpha;
    j["beta"] = c.beta;
    j["horizon"] = c.horizon;
    j["relaxation_mode"] = to_string(c.relaxation_mode);
    j["enforce_terminal_soc"] = c.enforce_terminal_soc;
    j["free_bess_reactive"] = c.free_bess_reactive;
    json units = json::array();
    for (const auto& b : c.bess_units) {
        units.push_back(json{{"bus", b.bus},
                             {"capacity_kwh", b.capacity_kwh},
                             {"soc_min", b.soc_min},
                             {"soc_max", b.soc_max},
                             {"eta", b.eta},
                             {"p_charge_max_kw", b.p_charge_max_kw},
                             {"p_discharge_max_kw", b.p_discharge_max_kw},
                             {"e_initial_kwh", b.e_initial_kwh}});
    }
    j["bess_units"] = std::move(units);
    if (c.feeder) {
        json lines = json::array();
        for (const auto& ln : c.feeder->lines)
            lines.push_back(json::array({ln.from_node, ln.to_node, ln.r_pu,
                                         ln.x_pu, ln.p_load_share_percent,
                                         ln.q_load_pu}));
        j["feeder"] = json{{"v0_pu", c.feeder->v0_pu},
                           {"epsilon", c.feeder->epsilon},
                           {"p_base_kw", c.feeder->p_base_kw},
                           {"lines", std::move(lines)}};
    }
    return j.dump();  // object keys are sorted, so the text is canonical
}

std::string config_hash(const ProblemConfig& config) {
    const std::string text = config_canonical_json(config);
    std::uint64_t h = 1469598103934665603ull;  // FNV-1a 64
    for (unsigned char ch : text) {
        h ^= ch;
        h *= 1099511628211ull;
    }
    char buf[32];
    std::snprintf(buf, sizeof(buf), "fnv1a:%016llx",
                  static_cast<unsigned long long>(h));
    return buf;
}

void write_schedule_csv(const fs::path& path, const SolveReport& report) {
    const std::size_t units = report.schedule.units.size();
    std::ostringstream os;
    os << "t";
    for (std::size_t i = 0; i < units; ++i) os << ",charge_kw_u" << i;
    for (std::size_t i = 0; i < units; ++i) os << ",discharge_kw_u" << i;
    for (std::size_t i = 0; i < units; ++i) os << ",energy_kwh_u" << i;
    os << ",pcc_kw\n";
    for (std::size_t t = 0; t < report.pcc_power_kw.size(); ++t) {
        os << t;
        for (std::size_t i = 0; i < units; ++i)
            os << "," << fmt_exact(report.schedule.units[i].charge_kw[t]);
        for (std::size_t i = 0; i < units; ++i)
            os << "," << fmt_exact(report.schedule.units[i].discharge_kw[t]);
        for (std::size_t i = 0; i < units; ++i)
            os << "," << fmt_exact(report.schedule.units[i].energy_kwh[t]);
        os << "," << fmt_exact(report.pcc_power_kw[t]) << "\n";
    }
    write_text_file(path, os.str());
}

LoadedSchedule read_schedule_csv(const fs::path& path, double step_hours) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot read " + path.string());
    std::string line;
    if (!std::getline(in, line)) throw IoError("empty file: " + path.string());
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto header = split_csv_line(line);
    std::size_t units = 0;
    for (const auto& h : header)
        if (h.rfind("charge_kw_u", 0) == 0) ++units;
    if (header.size() != 2 + 3 * units || header.front() != "t" ||
        header.back() != "pcc_kw")
        throw IoError("unexpected schedule header in " + path.string());

    LoadedSchedule out;
    out.schedule.units.resize(units);
    for (auto& u : out.schedule.units) {
        u.charge_kw.step_hours = u.discharge_kw.step_hours =
            u.energy_kwh.step_hours = step_hours;
    }
    out.pcc_kw.step_hours = step_hours;
    out.pcc_kw.label = "pcc_kw";
    while (std::getline(in, line)) {
        if (line.empty() || line == "\r") continue;
        const auto r = split_csv_line(line);
        if (r.size() != header.size())
            throw IoError("ragged schedule row in " + path.string());
        std::size_t col = 1;
        for (std::size_t i = 0; i < units; ++i) {
            const double c = to_double(r[col++], path);
            auto& u = out.schedule.units[i];
            u.charge_kw.values.push_back(c);
            u.mode_charge.push_back(c > 1e-9 ? 1 : 0);
        }
        for (std::size_t i = 0; i < units; ++i) {
            const double d = to_double(r[col++], path);
            auto& u = out.schedule.units[i];
            u.discharge_kw.values.push_back(d);
            u.mode_discharge.push_back(d > 1e-9 ? 1 : 0);
        }
        for (std::size_t i = 0; i < units; ++i)
            out.schedule.units[i].energy_kwh.values.push_back(
                to_double(r[col++], path));
        out.pcc_kw.values.push_back(to_double(r[col], path));
    }
    return out;
}

void write_summary_json(const fs::path& path, const SolveReport& report) {
    json checks = json::array();
    for (const auto& c : report.validation)
        checks.push_back(json{{"check", c.name},
                              {"pass", c.pass},
                              {"worst_violation", c.worst_violation}});
    const json j{{"status", to_string(report.status)},
                 {"k_kw", report.k_kw},
                 {"theta_kw", report.theta_kw},
                 {"objective", report.objective},
                 {"branch_nodes", report.branch_nodes},
                 {"lp_iterations", report.lp_iterations},
                 {"validation", std::move(checks)}};
    write_text_file(path, j.dump(2) + "\n");
}

SummaryInfo read_summary_json(const fs::path& path) {
    SummaryInfo info;
    std::ifstream in(path);
    if (!in) return info;
    json j;
    try {
        in >> j;
        info.k_kw = j.at("k_kw").get<double>();
        info.theta_kw = j.at("theta_kw").get<double>();
        info.found = true;
    } catch (const std::exception&) {
        info.found = false;
    }
    return info;
}

void write_manifest_json(const fs::path& path, const std::string& command,
                         const std::vector<std::string>& inputs,
                         const std::map<std::string, std::string>& overrides,
                         const std::string& out_dir,
                         const ProblemConfig& config) {
    const json j{{"command", command},
                 {"inputs", inputs},
                 {"overrides", overrides},
                 {"out_dir", out_dir},
                 {"tool_version", "gridflat 0.1.0"},
                 {"config_hash", config_hash(config)}};
    write_text_file(path, j.dump(2) + "\n");
}

void write_sweep_outputs(const fs::path& out_dir, const SweepResult& sweep,
                         const std::string& axis_name) {
    write_text_file(out_dir / "sweep.csv", sweep_csv(sweep, axis_name));
    json j{{"axis_name", axis_name}, {"points", sweep.axis.size()}};
    for (const auto& [name, value] : sweep.derived) j[name] = value;
    write_text_file(out_dir / "sweep_summary.json", j.dump(2) + "\n");
}

void write_text_file(const fs::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path.string());
    out << content;
    if (!out) throw IoError("write failed: " + path.string());
}

}  // namespace gridflat
