#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "gridflat/branch_bound.hpp"
#include "gridflat/formulation.hpp"
#include "gridflat/io.hpp"
#include "gridflat/scenarios.hpp"
#include "gridflat/simplex.hpp"
#include "gridflat/solve.hpp"
#include "test_util.hpp"

using namespace gridflat;
using namespace gridflat::testing;

namespace {

FeederModel tiny_feeder(double r = 0.001, double x = 0.0005) {
    FeederModel f;
    f.lines.push_back({0, 1, r, x, 40.0, 0.02});
    f.lines.push_back({1, 2, r, x, 60.0, 0.03});
    f.v0_pu = 1.02;
    f.epsilon = 0.05;
    f.p_base_kw = 1000.0;
    return f;
}

}  // namespace

TEST_CASE("op1 variable and constraint counts for T=2, one unit") {
    const ProblemConfig c = op1_config({100.0, 200.0}, 150.0, {bess(50.0)});
    const MilpProblem p = build_op1(c);
    // 5 per unit-step plus K.
    CHECK(p.num_variables() == 2 * 5 + 1);
    CHECK(p.num_binaries() == 4);
    // Per unit-step: SOC equality, two SOC bounds, two couplings, one
    // exclusivity; plus two epigraph rows per step.
    CHECK(p.num_constraints() == 2 * 6 + 2 * 2);
}

TEST_CASE("op1 row census matches the per-step formula for several sizes") {
    Rng rng(3);
    for (int rep = 0; rep < 6; ++rep) {
        const int T = rng.uniform_int(1, 5);
        const int units = rng.uniform_int(1, 3);
        std::vector<double> load;
        for (int t = 0; t < T; ++t) load.push_back(rng.uniform(50, 150));
        std::vector<BessSpec> specs;
        for (int u = 0; u < units; ++u) specs.push_back(bess(40.0, 0.9, 10.0));
        for (auto& b : specs) {
            b.soc_min = 0.1;
            b.soc_max = 0.9;
            b.e_initial_kwh = 10.0;
        }
        const MilpProblem p = build_op1(op1_config(load, 100.0, specs));
        CHECK(p.num_variables() == units * T * 5 + 1);
        CHECK(p.num_constraints() == units * T * 6 + 2 * T);
        CHECK(p.num_binaries() == 2 * units * T);
    }
}

TEST_CASE("lossless two-step instance flattens completely") {
    const ProblemConfig c = op1_config({100.0, 200.0}, 150.0,
                                       {bess(50.0, 1.0, 0.0)});
    const MilpProblem p = build_op1(c);
    const MilpResult milp = solve_milp(p);
    REQUIRE(milp.status == MilpStatus::Optimal);
    CHECK(milp.objective == doctest::Approx(0.0).epsilon(1e-9));
    // Oracle agreement and the (charge, discharge) mode pattern.
    const OracleResult oracle = enumerate_oracle(p);
    REQUIRE(oracle.feasible);
    CHECK(oracle.objective == doctest::Approx(milp.objective).epsilon(1e-9));
    const DecodedSolution d = decode_solution(p, c, milp.primal);
    CHECK(d.schedule.units[0].mode_charge[0] == 1);
    CHECK(d.schedule.units[0].mode_discharge[1] == 1);
}

TEST_CASE("zero capacity forces the no-battery bound") {
    Rng rng(17);
    for (int rep = 0; rep < 5; ++rep) {
        const int T = rng.uniform_int(2, 5);
        std::vector<double> load;
        for (int t = 0; t < T; ++t) load.push_back(rng.uniform(50, 250));
        const double theta = rng.uniform(50, 250);
        BessSpec b = bess(0.0, 0.9, 0.0);
        const MilpProblem p = build_op1(op1_config(load, theta, {b}));
        const MilpResult r = solve_milp(p);
        REQUIRE(r.status == MilpStatus::Optimal);
        double expect = 0.0;
        for (double v : load) expect = std::max(expect, std::abs(v - theta));
        CHECK(r.objective == doctest::Approx(expect).epsilon(1e-9));
    }
}

TEST_CASE("op2 with a flat load pins theta and zeroes K") {
    const ProblemConfig c = op2_config({120.0, 120.0, 120.0}, 1.0, 1.0,
                                       {bess(50.0, 0.9, 5.0)});
    const SolveReport r = solve_config(c);
    REQUIRE(r.status == SolveStatus::Optimal);
    CHECK(r.k_kw == doctest::Approx(0.0).epsilon(1e-9));
    CHECK(r.theta_kw == doctest::Approx(120.0));
}

TEST_CASE("op2 weight ordering moves theta") {
    std::vector<double> load{100.0, 200.0, 100.0};
    SUBCASE("beta dominant drives theta to the load minimum") {
        const ProblemConfig c = op2_config(load, 1.0, 1000.0,
                                           {bess(50.0, 1.0, 0.0)});
        const SolveReport r = solve_config(c);
        REQUIRE(r.status == SolveStatus::Optimal);
        CHECK(r.theta_kw == doctest::Approx(100.0));
    }
    SUBCASE("alpha dominant flattens at the balanced target") {
        // SOC feasibility forces theta >= 150 on the triangle; the capacity
        // cap forces theta <= 150, so the optimum sits exactly there.
        const ProblemConfig c = op2_config(load, 1000.0, 1.0,
                                           {bess(50.0, 1.0, 0.0)});
        const SolveReport r = solve_config(c);
        REQUIRE(r.status == SolveStatus::Optimal);
        CHECK(r.k_kw == doctest::Approx(0.0).epsilon(1e-9));
        CHECK(r.theta_kw == doctest::Approx(150.0));
    }
}

TEST_CASE("op3 with a zero-impedance feeder matches op2") {
    ProblemConfig op3 = op2_config({100.0, 200.0, 150.0}, 1000.0, 1.0,
                                   {bess(40.0, 0.9, 4.0)});
    op3.formulation = Formulation::Op3;
    op3.feeder = tiny_feeder(0.0, 0.0);
    op3.bess_units[0].bus = 2;
    const SolveReport r3 = solve_config(op3);

    ProblemConfig op2 = op3;
    op2.formulation = Formulation::Op2;
    op2.feeder.reset();
    const SolveReport r2 = solve_config(op2);

    REQUIRE(r3.status == SolveStatus::Optimal);
    REQUIRE(r2.status == SolveStatus::Optimal);
    CHECK(r3.objective == doctest::Approx(r2.objective).epsilon(1e-7));
}

TEST_CASE("op3 with a huge voltage band matches op2") {
    ProblemConfig op3 = op2_config({100.0, 200.0, 150.0}, 1000.0, 1.0,
                                   {bess(40.0, 0.9, 4.0)});
    op3.formulation = Formulation::Op3;
    op3.feeder = tiny_feeder(0.004, 0.002);
    op3.feeder->epsilon = 1e6;
    op3.bess_units[0].bus = 2;
    const SolveReport r3 = solve_config(op3);

    ProblemConfig op2 = op3;
    op2.formulation = Formulation::Op2;
    op2.feeder.reset();
    const SolveReport r2 = solve_config(op2);

    REQUIRE(r3.status == SolveStatus::Optimal);
    REQUIRE(r2.status == SolveStatus::Optimal);
    CHECK(r3.objective == doctest::Approx(r2.objective).epsilon(1e-7));
}

TEST_CASE("table feeder: a last-bus unit cannot beat a substation unit") {
    ProblemConfig c = op2_config({}, 1000.0, 1.0, {});
    c.formulation = Formulation::Op3;
    c.load = generate_synthetic_load(LoadProfile::Duck, 1442.0, 1950.0, 24);
    c.horizon = 24;
    FeederModel f;
    f.lines = read_feeder_lines_csv(std::string(GRIDFLAT_DATA_DIR) +
                                    "/feeder_18bus.csv");
    f.v0_pu = 1.02;
    f.epsilon = 0.05;
    f.p_base_kw = 1000.0;
    c.feeder = f;
    BessSpec b;
    b.capacity_kwh = 2200.0;
    b.soc_min = 0.05;
    b.soc_max = 0.95;
    b.eta = 0.9;
    b.e_initial_kwh = 0.05 * 2200.0;
    b.p_charge_max_kw = b.p_discharge_max_kw = 10.0 * c.load.max_value();

    b.bus = 17;
    c.bess_units = {b};
    const SolveReport deep = solve_config(c);
    c.bess_units[0].bus = 0;
    const SolveReport front = solve_config(c);
    REQUIRE(deep.status == SolveStatus::Optimal);
    REQUIRE(front.status == SolveStatus::Optimal);
    CHECK(deep.k_kw >= front.k_kw - 1e-6);
}

TEST_CASE("freeing the BES reactive power can only help") {
    ProblemConfig c = op2_config({100.0, 200.0, 150.0}, 1000.0, 1.0,
                                 {bess(40.0, 0.9, 4.0)});
    c.formulation = Formulation::Op3;
    c.feeder = tiny_feeder(0.004, 0.003);
    c.feeder->epsilon = 0.02;  // tight enough that voltage matters
    c.bess_units[0].bus = 2;
    const SolveReport fixed_q = solve_config(c);
    c.free_bess_reactive = true;
    const SolveReport free_q = solve_config(c);
    REQUIRE(fixed_q.status == SolveStatus::Optimal);
    REQUIRE(free_q.status == SolveStatus::Optimal);
    CHECK(free_q.objective <= fixed_q.objective + 1e-6);
}

TEST_CASE("lp_relaxation clears binary markers and lower-bounds the milp") {
    const ProblemConfig c = op1_config({100.0, 200.0, 60.0}, 140.0,
                                       {bess(30.0, 0.9, 3.0)});
    const MilpProblem p = build_op1(c);
    CHECK(p.num_binaries() == 6);
    const MilpProblem relaxed = lp_relaxation(p);
    CHECK(relaxed.num_binaries() == 0);
    CHECK(relaxed.num_variables() == p.num_variables());
    const LpSolution lp = solve_lp(relaxed);
    const MilpResult milp = solve_milp(p);
    REQUIRE(lp.status == LpStatus::Optimal);
    REQUIRE(milp.status == MilpStatus::Optimal);
    CHECK(lp.objective <= milp.objective + 1e-9);
}

TEST_CASE("lossless instances have integral relaxations") {
    Rng rng(41);
    for (int rep = 0; rep < 10; ++rep) {
        ProblemConfig c = random_small_instance(rng);
        for (auto& b : c.bess_units) b.eta = 1.0;
        const MilpProblem p = build_problem(c);
        const LpSolution lp = solve_lp(lp_relaxation(p));
        const OracleResult oracle = enumerate_oracle(p);
        if (lp.status != LpStatus::Optimal) {
            CHECK_FALSE(oracle.feasible);
            continue;
        }
        REQUIRE(oracle.feasible);
        CHECK(lp.objective == doctest::Approx(oracle.objective).epsilon(1e-7));
    }
}

TEST_CASE("decoded milp points satisfy the schedule invariants") {
    Rng rng(47);
    for (int rep = 0; rep < 8; ++rep) {
        const ProblemConfig c = random_small_instance(rng);
        const MilpProblem p = build_problem(c);
        const MilpResult r = solve_milp(p);
        if (r.status != MilpStatus::Optimal) continue;
        const DecodedSolution d = decode_solution(p, c, r.primal);
        for (const auto& check :
             check_schedule(c, d.schedule, d.k_kw, d.theta_kw)) {
            INFO(check.name, " worst=", check.worst_violation);
            CHECK(check.pass);
        }
    }
}

TEST_CASE("jointly scaling the instance scales K") {
    Rng rng(53);
    const std::vector<double> load{80.0, 190.0, 130.0, 70.0};
    BessSpec b = bess(45.0, 0.9, 9.0, 150.0);
    b.soc_min = 0.1;
    b.soc_max = 0.9;
    b.e_initial_kwh = 9.0;
    const double theta = 120.0;
    const MilpResult base = solve_milp(build_op1(op1_config(load, theta, {b})));
    REQUIRE(base.status == MilpStatus::Optimal);

    const double scale = 2.5;
    std::vector<double> load2;
    for (double v : load) load2.push_back(scale * v);
    BessSpec b2 = b;
    b2.capacity_kwh *= scale;
    b2.e_initial_kwh *= scale;
    b2.p_charge_max_kw *= scale;
    b2.p_discharge_max_kw *= scale;
    const MilpResult scaled =
        solve_milp(build_op1(op1_config(load2, scale * theta, {b2})));
    REQUIRE(scaled.status == MilpStatus::Optimal);
    CHECK(scaled.objective == doctest::Approx(scale * base.objective));
    (void)rng;
}

TEST_CASE("op2 with dominant alpha equals the best op1 over theta") {
    const std::vector<double> load{100.0, 200.0, 140.0};
    BessSpec b = bess(30.0, 0.9, 6.0);
    b.soc_min = 0.2;
    b.soc_max = 1.0;
    b.e_initial_kwh = 6.0;
    const ProblemConfig weighted = op2_config(load, 1000.0, 1.0, {b});
    const SolveReport r = solve_config(weighted);
    REQUIRE(r.status == SolveStatus::Optimal);

    double best = 1e30;
    for (int i = 0; i <= 200; ++i) {
        const double theta = 100.0 + i * 0.5;
        const MilpResult g =
            solve_milp(build_op1(op1_config(load, theta, {b})));
        REQUIRE(g.status == MilpStatus::Optimal);
        best = std::min(best, g.objective);
    }
    // Grid minimum upper-bounds the free-theta optimum; K*(theta) moves at
    // unit slope at most, so half a grid cell bounds the gap.
    CHECK(r.k_kw <= best + 1e-9);
    CHECK(best - r.k_kw <= 0.5 + 1e-9);
}

TEST_CASE("relaxed op1 value is convex in theta") {
    const std::vector<double> load{90.0, 210.0, 160.0, 80.0};
    BessSpec b = bess(35.0, 0.9, 7.0);
    b.soc_min = 0.2;
    b.soc_max = 1.0;
    b.e_initial_kwh = 7.0;
    std::vector<double> ks;
    for (int i = 0; i < 41; ++i) {
        const double theta = 80.0 + i * (130.0 / 40.0);
        const MilpProblem p = build_op1(op1_config(load, theta, {b}));
        const LpSolution lp = solve_lp(lp_relaxation(p));
        REQUIRE(lp.status == LpStatus::Optimal);
        ks.push_back(lp.objective);
    }
    for (std::size_t i = 1; i + 1 < ks.size(); ++i)
        CHECK(ks[i] <= 0.5 * (ks[i - 1] + ks[i + 1]) + 1e-6);
}

TEST_CASE("builders reject invalid configs") {
    ProblemConfig c = op1_config({100.0, 200.0}, 150.0, {bess(50.0)});
    c.bess_units[0].soc_min = 0.9;
    c.bess_units[0].soc_max = 0.1;
    CHECK_THROWS_AS(build_op1(c), ConfigError);
}

TEST_CASE("lp text export names variables and rows") {
    const ProblemConfig c = op1_config({100.0, 200.0}, 150.0, {bess(50.0)});
    const std::string text = to_lp_text(build_op1(c));
    CHECK(text.find("min:") != std::string::npos);
    CHECK(text.find("charge[0][0]") != std::string::npos);
    CHECK(text.find("binary:") != std::string::npos);
    CHECK(text.find("mode_discharge[0][1]") != std::string::npos);
}
