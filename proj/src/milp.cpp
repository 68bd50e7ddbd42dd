#include "gridflat/milp.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>
#include <stdexcept>

namespace gridflat {

namespace {

std::string num(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return buf;
}

}  // namespace

int MilpProblem::num_binaries() const {
    int n = 0;
    for (const auto& v : variables) n += v.is_binary ? 1 : 0;
    return n;
}

int MilpProblem::add_variable(const std::string& name, double lower,
                              double upper, bool is_binary) {
    const int col = num_variables();
    variables.push_back({name, lower, upper, is_binary});
    if (!variable_map.emplace(name, col).second)
        throw std::invalid_argument("duplicate variable name: " + name);
    return col;
}

void MilpProblem::add_constraint(SparseRow row, Relation relation, double rhs) {
    for (const auto& e : row) {
        if (e.col < 0 || e.col >= num_variables())
            throw std::out_of_range("constraint references unknown column");
    }
    constraints.push_back({std::move(row), relation, rhs});
}

void MilpProblem::set_objective(const std::string& name, double coefficient) {
    objective.push_back({column(name), coefficient});
}

int MilpProblem::column(const std::string& name) const {
    auto it = variable_map.find(name);
    if (it == variable_map.end())
        throw std::out_of_range("unknown variable: " + name);
    return it->second;
}

double MilpProblem::objective_value(const std::vector<double>& x) const {
    double obj = 0.0;
    for (const auto& e : objective) obj += e.value * x[e.col];
    return obj;
}

MilpProblem lp_relaxation(const MilpProblem& problem) {
    MilpProblem relaxed = problem;
    for (auto& v : relaxed.variables) v.is_binary = false;
    return relaxed;
}

std::string to_lp_text(const MilpProblem& p) {
    std::ostringstream os;
    os << "min:";
    for (const auto& e : p.objective)
        os << " " << (e.value >= 0 ? "+" : "") << num(e.value) << " "
           << p.variables[e.col].name;
    os << ";\n";
    for (int r = 0; r < p.num_constraints(); ++r) {
        const MilpConstraint& c = p.constraints[r];
        os << "r" << r << ":";
        for (const auto& e : c.row)
            os << " " << (e.value >= 0 ? "+" : "") << num(e.value) << " "
               << p.variables[e.col].name;
        switch (c.relation) {
            case Relation::LessEq: os << " <= "; break;
            case Relation::Equal: os << " = "; break;
            case Relation::GreaterEq: os << " >= "; break;
        }
        os << num(c.rhs) << ";\n";
    }
    for (const auto& v : p.variables) {
        os << "bounds: ";
        os << (std::isinf(v.lower) ? std::string("-inf") : num(v.lower));
        os << " <= " << v.name << " <= ";
        os << (std::isinf(v.upper) ? std::string("+inf") : num(v.upper));
        os << ";\n";
    }
    bool first = true;
    for (const auto& v : p.variables) {
        if (!v.is_binary) continue;
        os << (first ? "binary: " : ", ") << v.name;
        first = false;
    }
    if (!first) os << ";\n";
    return os.str();
}

}  // namespace gridflat
