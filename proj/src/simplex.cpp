#include "gridflat/simplex.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <limits>

namespace gridflat {

const char* to_string(LpStatus s) {
    switch (s) {
        case LpStatus::Optimal: return "optimal";
        case LpStatus::Infeasible: return "infeasible";
        case LpStatus::Unbounded: return "unbounded";
    }
    return "?";
}

namespace {

constexpr double kInfty = std::numeric_limits<double>::infinity();

// Nonbasic rest states; basic columns are tracked through the basis array.
enum : char { kBasic = 0, kAtLower = 1, kAtUpper = 2, kFreeZero = 3 };

double pow2_scale(double max_abs) {
    // Power-of-two factor bringing max_abs into [0.5, 1); exact in binary
    // floating point, so scaling never perturbs the data.
    if (!(max_abs > 0.0) || !std::isfinite(max_abs)) return 1.0;
    int exp = 0;
    std::frexp(max_abs, &exp);
    return std::ldexp(1.0, -exp);
}

// Dense bounded-variable primal simplex working on an equilibrated copy.
// Artificial variables initialize phase 1: every row whose slack cannot sit
// within its bounds gets one, kept implicit (its tableau column is the unit
// vector of its row, so it never needs storage and never re-enters).
class SimplexTableau {
  public:
    SimplexTableau(const MilpProblem& problem, const std::vector<double>& lower,
                   const std::vector<double>& upper)
        : prob_(problem),
          m_(problem.num_constraints()),
          ns_(problem.num_variables()),
          ncols_(ns_ + m_),
          width_(ncols_ + 1) {
        build(lower, upper);
    }

    LpSolution run() {
        LpSolution out;
        if (!phase1()) {
            out.status = LpStatus::Infeasible;
            out.iterations = iterations_;
            return out;
        }
        const LpStatus st = phase2();
        out.status = st;
        out.iterations = iterations_;
        if (st == LpStatus::Optimal) {
            out.primal.resize(ns_);
            for (int j = 0; j < ns_; ++j) out.primal[j] = val_[j] * cscale_[j];
            out.objective = prob_.objective_value(out.primal);
        }
        return out;
    }

  private:
    const MilpProblem& prob_;
    int m_, ns_, ncols_, width_;
    std::vector<double> tab_;     // m_ rows by width_ (last column: B^-1 b)
    std::vector<double> lo_, up_, val_, cost_;  // per real column, scaled
    std::vector<double> d1_, d2_;               // reduced-cost rows
    std::vector<int> basis_;       // >= ncols_ means artificial of row r
    std::vector<char> state_;
    std::vector<char> art_alive_;  // per row
    std::vector<double> art_val_;  // per row
    std::vector<double> cscale_;   // structural column scales
    double rhs_scale_ = 1.0;
    long iterations_ = 0;
    int stall_ = 0;
    bool bland_ = false;

    double* row(int r) { return tab_.data() + static_cast<std::size_t>(r) * width_; }

    void build(const std::vector<double>& lower, const std::vector<double>& upper) {
        tab_.assign(static_cast<std::size_t>(m_) * width_, 0.0);
        lo_.resize(ncols_);
        up_.resize(ncols_);
        val_.assign(ncols_, 0.0);
        cost_.assign(ncols_, 0.0);
        d1_.assign(ncols_, 0.0);
        d2_.assign(ncols_, 0.0);
        basis_.resize(m_);
        state_.assign(ncols_, kAtLower);
        art_alive_.assign(m_, 0);
        art_val_.assign(m_, 0.0);
        cscale_.assign(ns_, 1.0);

        std::vector<double> rscale(m_, 1.0);
        for (int r = 0; r < m_; ++r) {
            double mx = 0.0;
            for (const auto& e : prob_.constraints[r].row)
                mx = std::max(mx, std::abs(e.value));
            rscale[r] = pow2_scale(mx);
        }
        std::vector<double> colmax(ns_, 0.0);
        for (int r = 0; r < m_; ++r)
            for (const auto& e : prob_.constraints[r].row)
                colmax[e.col] =
                    std::max(colmax[e.col], std::abs(e.value) * rscale[r]);
        for (int j = 0; j < ns_; ++j) cscale_[j] = 1.0 / pow2_scale(colmax[j]);

        for (int r = 0; r < m_; ++r) {
            double* a = row(r);
            for (const auto& e : prob_.constraints[r].row)
                a[e.col] += e.value * rscale[r] * cscale_[e.col];
            a[ns_ + r] = 1.0;  // slack
            a[ncols_] = prob_.constraints[r].rhs * rscale[r];
            rhs_scale_ = std::max(rhs_scale_, std::abs(a[ncols_]));
        }
        for (const auto& e : prob_.objective) cost_[e.col] += e.value * cscale_[e.col];

        for (int j = 0; j < ns_; ++j) {
            lo_[j] = lower[j] / cscale_[j];
            up_[j] = upper[j] / cscale_[j];
            if (std::isfinite(lo_[j])) {
                state_[j] = kAtLower;
                val_[j] = lo_[j];
            } else if (std::isfinite(up_[j])) {
                state_[j] = kAtUpper;
                val_[j] = up_[j];
            } else {
                state_[j] = kFreeZero;
                val_[j] = 0.0;
            }
        }
        for (int r = 0; r < m_; ++r) {
            const int s = ns_ + r;
            switch (prob_.constraints[r].relation) {
                case Relation::LessEq: lo_[s] = 0.0; up_[s] = kInfty; break;
                case Relation::Equal: lo_[s] = 0.0; up_[s] = 0.0; break;
                case Relation::GreaterEq: lo_[s] = -kInfty; up_[s] = 0.0; break;
            }
        }

        // Slack basis; rows whose slack value violates its bounds receive an
        // artificial, with the row negated so the artificial column is +e_r.
        for (int r = 0; r < m_; ++r) {
            double* a = row(r);
            double sval = a[ncols_];
            for (int j = 0; j < ns_; ++j)
                if (val_[j] != 0.0) sval -= a[j] * val_[j];
            const int s = ns_ + r;
            const double tol = kFeasTol * (1.0 + std::abs(a[ncols_]));
            if (sval >= lo_[s] - tol && sval <= up_[s] + tol) {
                basis_[r] = s;
                state_[s] = kBasic;
                val_[s] = sval;
            } else {
                const double snap = (sval < lo_[s]) ? lo_[s] : up_[s];
                state_[s] = (sval < lo_[s]) ? kAtLower : kAtUpper;
                val_[s] = snap;
                double resid = sval - snap;
                if (resid < 0.0) {
                    for (int j = 0; j <= ncols_; ++j) a[j] = -a[j];
                    resid = -resid;
                }
                basis_[r] = ncols_ + r;
                art_alive_[r] = 1;
                art_val_[r] = resid;
            }
        }
        refresh_duals();
    }

    double basis_cost(int r) const {
        const int b = basis_[r];
        return b < ncols_ ? cost_[b] : 0.0;
    }

    void refresh_duals() {
        std::copy(cost_.begin(), cost_.end(), d2_.begin());
        std::fill(d1_.begin(), d1_.end(), 0.0);
        for (int r = 0; r < m_; ++r) {
            const double cb = basis_cost(r);
            const double* a = row(r);
            if (cb != 0.0)
                for (int j = 0; j < ncols_; ++j) d2_[j] -= cb * a[j];
            if (art_alive_[r])
                for (int j = 0; j < ncols_; ++j) d1_[j] -= a[j];
        }
    }

    void refresh_values() {
        std::vector<double> bv(m_);
        for (int r = 0; r < m_; ++r) bv[r] = row(r)[ncols_];
        for (int j = 0; j < ncols_; ++j) {
            if (state_[j] == kBasic || val_[j] == 0.0) continue;
            const double v = val_[j];
            for (int r = 0; r < m_; ++r) bv[r] -= row(r)[j] * v;
        }
        for (int r = 0; r < m_; ++r) {
            if (basis_[r] >= ncols_) {
                art_val_[r] = bv[r];
            } else {
                val_[basis_[r]] = bv[r];
            }
        }
    }

    double total_infeasibility() const {
        double s = 0.0;
        for (int r = 0; r < m_; ++r)
            if (art_alive_[r]) s += art_val_[r];
        return s;
    }

    // Returns the entering column and writes its movement direction, or -1 at
    // optimality for the given cost row.
    int price(const std::vector<double>& d, int& dir_out) {
        int best = -1;
        double best_mag = kDualTol;
        for (int j = 0; j < ncols_; ++j) {
            const char st = state_[j];
            if (st == kBasic) continue;
            if (up_[j] - lo_[j] <= 1e-12) continue;  // fixed columns never move
            const double dj = d[j];
            int dir = 0;
            if (st == kAtLower && dj < -kDualTol) dir = 1;
            else if (st == kAtUpper && dj > kDualTol) dir = -1;
            else if (st == kFreeZero && std::abs(dj) > kDualTol)
                dir = dj < 0.0 ? 1 : -1;
            if (dir == 0) continue;
            if (bland_) {
                dir_out = dir;
                return j;
            }
            const double mag = std::abs(dj);
            if (mag > best_mag * (1.0 + 1e-12)) {
                best_mag = mag;
                best = j;
                dir_out = dir;
            }
        }
        return best;
    }

    struct Ratio {
        double step = kInfty;
        int leave_row = -1;
        bool flip = false;
    };

    Ratio ratio_test(int q, int dir) {
        Ratio rt;
        int best_id = std::numeric_limits<int>::max();
        for (int r = 0; r < m_; ++r) {
            const double a = row(r)[q];
            if (std::abs(a) <= kPivotTol) continue;
            const double rate = -dir * a;  // movement of this row's basic var
            const int b = basis_[r];
            const bool art = b >= ncols_;
            const double vb = art ? art_val_[r] : val_[b];
            const double lob = art ? 0.0 : lo_[b];
            const double upb = art ? kInfty : up_[b];
            double limit;
            if (rate > 0.0) {
                if (upb == kInfty) continue;
                limit = (upb - vb) / rate;
            } else {
                if (lob == -kInfty) continue;
                limit = (vb - lob) / (-rate);
            }
            if (limit < 0.0) limit = 0.0;
            const int id = b;  // lowest basic column index wins ties
            if (limit < rt.step - 1e-12 ||
                (limit <= rt.step + 1e-12 && id < best_id)) {
                rt.step = limit;
                rt.leave_row = r;
                best_id = id;
            }
        }
        const double range = up_[q] - lo_[q];
        if (std::isfinite(range) && range < rt.step - 1e-12) {
            rt.step = range;
            rt.leave_row = -1;
            rt.flip = true;
        }
        return rt;
    }

    void shift_values(int q, int dir, double step) {
        if (step == 0.0) return;
        val_[q] += dir * step;
        for (int r = 0; r < m_; ++r) {
            const double a = row(r)[q];
            if (a == 0.0) continue;
            const double delta = -dir * a * step;
            const int b = basis_[r];
            if (b >= ncols_) art_val_[r] += delta;
            else val_[b] += delta;
        }
    }

    void pivot(int r, int q) {
        const int leaving = basis_[r];
        double* pr = row(r);
        const double piv = pr[q];
        const double inv = 1.0 / piv;
        for (int j = 0; j <= ncols_; ++j) pr[j] *= inv;
        pr[q] = 1.0;
        for (int i = 0; i < m_; ++i) {
            if (i == r) continue;
            double* ri = row(i);
            const double f = ri[q];
            if (f == 0.0) continue;
            for (int j = 0; j <= ncols_; ++j) ri[j] -= f * pr[j];
            ri[q] = 0.0;
        }
        const double f1 = d1_[q];
        if (f1 != 0.0) {
            for (int j = 0; j < ncols_; ++j) d1_[j] -= f1 * pr[j];
            d1_[q] = 0.0;
        }
        const double f2 = d2_[q];
        if (f2 != 0.0) {
            for (int j = 0; j < ncols_; ++j) d2_[j] -= f2 * pr[j];
            d2_[q] = 0.0;
        }
        basis_[r] = q;
        state_[q] = kBasic;
        if (leaving >= ncols_) {
            art_alive_[leaving - ncols_] = 0;
            art_val_[leaving - ncols_] = 0.0;
        }
    }

    // Executes one simplex step for the entering column; returns false when
    // the step is unbounded.
    bool step_with(int q, int dir, const Ratio& rt) {
        ++iterations_;
        if (rt.flip) {
            shift_values(q, dir, rt.step);
            val_[q] = dir > 0 ? up_[q] : lo_[q];
            state_[q] = dir > 0 ? kAtUpper : kAtLower;
        } else {
            if (rt.leave_row < 0) return false;
            const int r = rt.leave_row;
            const int leaving = basis_[r];
            const double rate = -dir * row(r)[q];
            shift_values(q, dir, rt.step);
            if (leaving < ncols_) {
                if (rate > 0.0) {
                    val_[leaving] = up_[leaving];
                    state_[leaving] = kAtUpper;
                } else {
                    val_[leaving] = lo_[leaving];
                    state_[leaving] = kAtLower;
                }
            }
            pivot(r, q);
        }
        if (rt.step <= 1e-10) {
            if (++stall_ > kStallLimit) bland_ = true;
        } else {
            stall_ = 0;
            bland_ = false;
        }
        if ((iterations_ & 511) == 0) {
            refresh_values();
            refresh_duals();
        }
        check_iteration_budget();
        return true;
    }

    void check_iteration_budget() const {
        const long budget =
            500000 + 200L * (static_cast<long>(m_) + ncols_);
        if (iterations_ > budget)
            throw SolverError("simplex iteration budget exceeded");
    }

    bool phase1() {
        bool any = false;
        for (int r = 0; r < m_; ++r) any = any || art_alive_[r];
        const double tol = kFeasTol * (1.0 + rhs_scale_);
        while (any && total_infeasibility() > tol) {
            int dir = 0;
            const int q = price(d1_, dir);
            if (q < 0) break;
            const Ratio rt = ratio_test(q, dir);
            if (!std::isfinite(rt.step))
                throw SolverError("phase-1 step unbounded (numerical breakdown)");
            if (!step_with(q, dir, rt)) return false;
        }
        if (total_infeasibility() > tol) return false;

        // Drive leftover zero-level artificials out of the basis where a
        // usable pivot exists; dependent rows keep a fixed artificial that the
        // pivot tolerance then ignores.
        for (int r = 0; r < m_; ++r) {
            if (basis_[r] < ncols_) continue;
            const double* a = row(r);
            int col = -1;
            for (int j = 0; j < ncols_; ++j) {
                if (state_[j] == kBasic) continue;
                if (std::abs(a[j]) > 1e-7) {
                    col = j;
                    break;
                }
            }
            if (col >= 0) pivot(r, col);
        }
        refresh_values();
        refresh_duals();
        stall_ = 0;
        bland_ = false;
        return true;
    }

    LpStatus phase2() {
        for (;;) {
            int dir = 0;
            const int q = price(d2_, dir);
            if (q < 0) return LpStatus::Optimal;
            const Ratio rt = ratio_test(q, dir);
            if (!std::isfinite(rt.step) && !rt.flip) return LpStatus::Unbounded;
            if (!step_with(q, dir, rt)) return LpStatus::Unbounded;
        }
    }
};

}  // namespace

double max_violation(const MilpProblem& problem, const std::vector<double>& x,
                     const std::vector<double>& lower,
                     const std::vector<double>& upper) {
    double worst = 0.0;
    for (int j = 0; j < problem.num_variables(); ++j) {
        const double scale_lo = 1.0 + std::abs(lower[j]);
        const double scale_up = 1.0 + std::abs(upper[j]);
        if (std::isfinite(lower[j]))
            worst = std::max(worst, (lower[j] - x[j]) / scale_lo);
        if (std::isfinite(upper[j]))
            worst = std::max(worst, (x[j] - upper[j]) / scale_up);
    }
    for (const auto& c : problem.constraints) {
        double lhs = 0.0;
        for (const auto& e : c.row) lhs += e.value * x[e.col];
        const double scale = 1.0 + std::abs(c.rhs);
        switch (c.relation) {
            case Relation::LessEq:
                worst = std::max(worst, (lhs - c.rhs) / scale);
                break;
            case Relation::GreaterEq:
                worst = std::max(worst, (c.rhs - lhs) / scale);
                break;
            case Relation::Equal:
                worst = std::max(worst, std::abs(lhs - c.rhs) / scale);
                break;
        }
    }
    return worst;
}

double max_violation(const MilpProblem& problem, const std::vector<double>& x) {
    std::vector<double> lower(problem.num_variables());
    std::vector<double> upper(problem.num_variables());
    for (int j = 0; j < problem.num_variables(); ++j) {
        lower[j] = problem.variables[j].lower;
        upper[j] = problem.variables[j].upper;
    }
    return max_violation(problem, x, lower, upper);
}

LpSolution solve_lp_bounded(const MilpProblem& problem,
                            const std::vector<double>& lower,
                            const std::vector<double>& upper) {
    for (int j = 0; j < problem.num_variables(); ++j) {
        if (lower[j] > upper[j])
            return LpSolution{LpStatus::Infeasible, 0.0, {}, 0};
    }
    SimplexTableau tableau(problem, lower, upper);
    LpSolution sol = tableau.run();
    if (sol.status == LpStatus::Optimal) {
        const double viol = max_violation(problem, sol.primal, lower, upper);
        if (viol > 1e-6)
            throw SolverError("solution failed feasibility certification (" +
                              std::to_string(viol) + ")");
    }
    return sol;
}

LpSolution solve_lp(const MilpProblem& problem) {
    std::vector<double> lower(problem.num_variables());
    std::vector<double> upper(problem.num_variables());
    for (int j = 0; j < problem.num_variables(); ++j) {
        lower[j] = problem.variables[j].lower;
        upper[j] = problem.variables[j].upper;
    }
    return solve_lp_bounded(problem, lower, upper);
}

}  // namespace gridflat
