#pragma once

#include <limits>
#include <string>
#include <unordered_map>
#include <vector>

namespace gridflat {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

enum class Relation { LessEq, Equal, GreaterEq };

struct SparseEntry {
    int col = 0;
    double value = 0.0;
};
using SparseRow = std::vector<SparseEntry>;

struct MilpVariable {
    std::string name;
    double lower = 0.0;
    double upper = kInf;
    bool is_binary = false;
};

struct MilpConstraint {
    SparseRow row;
    Relation relation = Relation::LessEq;
    double rhs = 0.0;
};

/// Ties one (unit, step) pair of charge/discharge activities to its gating
/// mode binaries. Produced by the formulation builders; consumed by the
/// branch-and-bound rounding step and the enumeration oracle.
struct ModeLink {
    int unit = 0;
    int step = 0;
    int charge_col = 0;
    int discharge_col = 0;
    int mode_charge_col = 0;
    int mode_discharge_col = 0;
};

/// Sparse standard-form model: minimize objective subject to the constraint
/// rows and variable bounds. Binary columns carry bounds [0,1].
struct MilpProblem {
    std::vector<MilpVariable> variables;
    SparseRow objective;  // minimization
    std::vector<MilpConstraint> constraints;
    std::unordered_map<std::string, int> variable_map;
    std::vector<ModeLink> mode_links;

    int num_variables() const { return static_cast<int>(variables.size()); }
    int num_constraints() const { return static_cast<int>(constraints.size()); }
    int num_binaries() const;

    int add_variable(const std::string& name, double lower, double upper,
                     bool is_binary = false);
    void add_constraint(SparseRow row, Relation relation, double rhs);
    void set_objective(const std::string& name, double coefficient);

    /// Column index for a semantic name; throws std::out_of_range if missing.
    int column(const std::string& name) const;
    bool has_column(const std::string& name) const {
        return variable_map.count(name) != 0;
    }

    double objective_value(const std::vector<double>& x) const;
};

/// Same problem with binary markers cleared; bounds [0,1] are retained.
MilpProblem lp_relaxation(const MilpProblem& problem);

/// Plain-text LP-style rendering (one constraint per line, named variables)
/// for external cross-checking. Grammar documented in the README.
std::string to_lp_text(const MilpProblem& problem);

}  // namespace gridflat
