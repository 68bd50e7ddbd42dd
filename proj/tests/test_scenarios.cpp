#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "gridflat/io.hpp"
#include "gridflat/scenarios.hpp"
#include "test_util.hpp"

using namespace gridflat;
using namespace gridflat::testing;

namespace {

ProblemConfig triangle_op2() {
    return op2_config({100.0, 200.0, 100.0}, 1000.0, 1.0,
                      {bess(50.0, 1.0, 0.0)});
}

}  // namespace

TEST_CASE("capacity sweep: zero capacity hits the no-battery bound") {
    ProblemConfig c = op1_config({100.0, 200.0, 100.0}, 150.0,
                                 {bess(0.0, 1.0, 0.0)});
    const SweepResult s = sweep_capacity(c, {0.0});
    REQUIRE(s.reports.size() == 1);
    REQUIRE(s.reports[0].status == SolveStatus::Optimal);
    CHECK(s.reports[0].k_kw == doctest::Approx(50.0));
    CHECK(s.derived.count("critical_capacity_kwh") == 0);
}

TEST_CASE("triangle capacity sweep finds the critical value") {
    const SweepResult s = sweep_capacity(triangle_op2(), {40.0, 50.0, 60.0});
    REQUIRE(s.reports.size() == 3);
    CHECK(s.reports[0].k_kw > kZeroVarianceTolKw);
    CHECK(s.reports[1].k_kw <= kZeroVarianceTolKw);
    CHECK(s.reports[2].k_kw <= kZeroVarianceTolKw);
    REQUIRE(s.derived.count("critical_capacity_kwh") == 1);
    CHECK(s.derived.at("critical_capacity_kwh") == doctest::Approx(50.0));
}

TEST_CASE("K is non-increasing along any capacity sweep") {
    Rng rng(61);
    std::vector<double> load;
    for (int t = 0; t < 6; ++t) load.push_back(rng.uniform(80, 220));
    BessSpec b = bess(0.0, 0.9, 0.0);
    b.soc_min = 0.05;
    b.soc_max = 0.95;
    ProblemConfig c = op2_config(load, 1000.0, 1.0, {b});
    const SweepResult s =
        sweep_capacity(c, {0.0, 15.0, 30.0, 60.0, 120.0, 240.0});
    double prev = 1e30;
    for (const auto& r : s.reports) {
        REQUIRE(r.status == SolveStatus::Optimal);
        CHECK(r.k_kw <= prev + 1e-9);
        prev = r.k_kw;
    }
}

TEST_CASE("theta sweep without a battery is the V-shaped deviation curve") {
    ProblemConfig c = op1_config({100.0, 200.0, 100.0}, 150.0,
                                 {bess(0.0, 1.0, 0.0)});
    std::vector<double> thetas;
    for (int i = 0; i <= 20; ++i) thetas.push_back(100.0 + 5.0 * i);
    const SweepResult s = sweep_theta(c, thetas);
    for (std::size_t i = 0; i < s.axis.size(); ++i) {
        const double theta = s.axis[i];
        const double expect =
            std::max(std::abs(100.0 - theta), std::abs(200.0 - theta));
        REQUIRE(s.reports[i].status == SolveStatus::Optimal);
        CHECK(s.reports[i].k_kw == doctest::Approx(expect).epsilon(1e-9));
    }
}

TEST_CASE("theta sweep above critical capacity has a flat bottom") {
    ProblemConfig c = triangle_op2();
    c.bess_units[0].capacity_kwh = 80.0;  // well above the critical 50
    std::vector<double> thetas;
    for (int i = 0; i <= 40; ++i) thetas.push_back(100.0 + 2.5 * i);
    const SweepResult s = sweep_theta(c, thetas);
    REQUIRE(s.derived.count("theta_left_turning_point") == 1);
    REQUIRE(s.derived.count("theta_right_turning_point") == 1);
    CHECK(s.derived.at("theta_right_turning_point") >
          s.derived.at("theta_left_turning_point"));
}

TEST_CASE("relaxed theta sweep is midpoint convex") {
    ProblemConfig c = op1_config({90.0, 210.0, 160.0, 80.0}, 150.0,
                                 {bess(35.0, 0.9, 7.0)});
    c.bess_units[0].soc_min = 0.2;
    c.bess_units[0].soc_max = 1.0;
    c.bess_units[0].e_initial_kwh = 7.0;
    c.relaxation_mode = RelaxationMode::LpRelax;
    std::vector<double> thetas;
    for (int i = 0; i < 30; ++i) thetas.push_back(80.0 + i * (130.0 / 29.0));
    const SweepResult s = sweep_theta(c, thetas);
    for (std::size_t i = 1; i + 1 < s.axis.size(); ++i) {
        REQUIRE(s.reports[i].status == SolveStatus::Optimal);
        CHECK(s.reports[i].k_kw <=
              0.5 * (s.reports[i - 1].k_kw + s.reports[i + 1].k_kw) + 1e-6);
    }
}

TEST_CASE("weighting comparison matches the paper's structure") {
    const std::vector<std::pair<double, double>> pairs{{1000.0, 1.0},
                                                       {1.0, 1000.0}};
    SUBCASE("above critical capacity both flatten to the turning point") {
        ProblemConfig c = triangle_op2();
        const auto rows = compare_weightings(c, pairs);
        REQUIRE(rows.size() == 2);
        CHECK(rows[0].report.k_kw == doctest::Approx(0.0).epsilon(1e-9));
        CHECK(rows[0].report.theta_kw == doctest::Approx(150.0));
        CHECK_FALSE(rows[0].theta_at_lower_bound);
        CHECK(rows[1].theta_at_lower_bound);
        CHECK(rows[1].report.theta_kw == doctest::Approx(100.0));
    }
}

TEST_CASE("location sweep is flat on a zero-impedance feeder") {
    FeederModel f;
    for (int i = 0; i < 4; ++i)
        f.lines.push_back({i, i + 1, 0.0, 0.0, 25.0, 0.01});
    f.v0_pu = 1.02;
    f.epsilon = 0.05;
    f.p_base_kw = 1000.0;
    ProblemConfig c = op2_config({100.0, 200.0, 150.0}, 1000.0, 1.0,
                                 {bess(40.0, 0.9, 4.0)});
    c.formulation = Formulation::Op3;
    c.feeder = f;
    const SweepResult s = sweep_location(c, {1, 2, 3, 4});
    REQUIRE(s.reports.size() == 4);
    for (const auto& r : s.reports) {
        REQUIRE(r.status == SolveStatus::Optimal);
        CHECK(r.objective == doctest::Approx(s.reports[0].objective));
    }
    REQUIRE(s.derived.count("first_bus_matching_lumped") == 1);
    CHECK(s.derived.at("first_bus_matching_lumped") == doctest::Approx(4.0));
}

TEST_CASE("find_critical_capacity nails the triangle instance") {
    const double crit = find_critical_capacity(triangle_op2(), 0.0, 80.0, 0.1);
    CHECK(crit == doctest::Approx(50.0).epsilon(0.01));

    // Definition check at the bisection tolerance.
    ProblemConfig at = triangle_op2();
    at.bess_units[0].capacity_kwh = crit;
    CHECK(solve_config(at).k_kw <= kZeroVarianceTolKw);
    ProblemConfig below = triangle_op2();
    below.bess_units[0].capacity_kwh = crit - 0.2;
    CHECK(solve_config(below).k_kw > kZeroVarianceTolKw);
}

TEST_CASE("critical capacity agrees with the sweep within one grid cell") {
    const std::vector<double> grid{30.0, 40.0, 50.0, 60.0, 70.0};
    const SweepResult s = sweep_capacity(triangle_op2(), grid);
    REQUIRE(s.derived.count("critical_capacity_kwh") == 1);
    const double from_sweep = s.derived.at("critical_capacity_kwh");
    const double from_bisect =
        find_critical_capacity(triangle_op2(), 0.0, 80.0, 0.1);
    CHECK(std::abs(from_sweep - from_bisect) <= 10.0 + 0.1);  // one grid cell
}

TEST_CASE("find_critical_capacity rejects an unreachable bracket") {
    ProblemConfig c = triangle_op2();
    CHECK_THROWS_AS(find_critical_capacity(c, 0.0, 10.0, 0.1),
                    std::invalid_argument);
}

TEST_CASE("synthetic load generator") {
    SUBCASE("flat") {
        const TimeSeries t =
            generate_synthetic_load(LoadProfile::Flat, 100.0, 100.0, 24);
        CHECK(t.size() == 24);
        for (double v : t.values) CHECK(v == doctest::Approx(100.0));
    }
    SUBCASE("flat with a band is rejected") {
        CHECK_THROWS_AS(
            generate_synthetic_load(LoadProfile::Flat, 90.0, 100.0, 24),
            std::invalid_argument);
    }
    SUBCASE("duck hits the paper's band with one evening peak") {
        const TimeSeries t =
            generate_synthetic_load(LoadProfile::Duck, 1442.0, 2290.0, 24);
        CHECK(t.min_value() == doctest::Approx(1442.0));
        CHECK(t.max_value() == doctest::Approx(2290.0));
        int peak_at = 0, peaks = 0;
        for (int i = 0; i < 24; ++i)
            if (t[i] == t.max_value()) {
                peak_at = i;
                ++peaks;
            }
        CHECK(peaks == 1);
        CHECK(peak_at >= 16);
        CHECK(peak_at <= 22);
        // Valley around midday.
        int valley_at = 0;
        for (int i = 0; i < 24; ++i)
            if (t[i] == t.min_value()) valley_at = i;
        CHECK(valley_at >= 10);
        CHECK(valley_at <= 14);
    }
    SUBCASE("triangle with three steps") {
        const TimeSeries t =
            generate_synthetic_load(LoadProfile::Triangle, 100.0, 200.0, 3);
        REQUIRE(t.size() == 3);
        CHECK(t[0] == doctest::Approx(100.0));
        CHECK(t[1] == doctest::Approx(200.0));
        CHECK(t[2] == doctest::Approx(100.0));
    }
    SUBCASE("sine attains both bounds") {
        const TimeSeries t =
            generate_synthetic_load(LoadProfile::Sine, 10.0, 20.0, 7);
        CHECK(t.min_value() == doctest::Approx(10.0));
        CHECK(t.max_value() == doctest::Approx(20.0));
    }
    SUBCASE("invalid bounds are rejected") {
        CHECK_THROWS_AS(
            generate_synthetic_load(LoadProfile::Duck, 200.0, 100.0, 24),
            std::invalid_argument);
    }
}

TEST_CASE("sweeps rerun byte-identically") {
    ProblemConfig c = triangle_op2();
    const SweepResult a = sweep_capacity(c, {30.0, 50.0, 70.0});
    const SweepResult b = sweep_capacity(c, {30.0, 50.0, 70.0});
    const std::string csv_a = sweep_csv(a, "capacity_kwh");
    const std::string csv_b = sweep_csv(b, "capacity_kwh");
    CHECK(csv_a == csv_b);
}

TEST_CASE("sweep grid minimum upper-bounds the free optimum") {
    ProblemConfig c = triangle_op2();
    std::vector<double> thetas;
    for (int i = 0; i <= 25; ++i) thetas.push_back(100.0 + 4.0 * i);
    const SweepResult s = sweep_theta(c, thetas);
    const SolveReport free = solve_config(c);
    REQUIRE(free.status == SolveStatus::Optimal);
    REQUIRE(s.derived.count("k_min") == 1);
    CHECK(s.derived.at("k_min") >= free.k_kw - 1e-9);
}
