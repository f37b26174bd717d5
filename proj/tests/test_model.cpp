#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "mfg/game_spec.hpp"
#include "support.hpp"

using namespace mfg;

TEST_CASE("reference spec passes validation") {
    auto spec = testsup::s1();
    TimeGrid grid(spec.horizon, 64);
    auto report = validate_lq(spec, grid);
    CHECK(report.pass);
    CHECK(report.violations.empty());
}

TEST_CASE("nonpositive control weight is reported, not thrown") {
    auto spec = testsup::s1();
    spec.m1 = 0.0;
    TimeGrid grid(spec.horizon, 16);
    auto report = validate_lq(spec, grid);
    CHECK_FALSE(report.pass);
    bool found = false;
    for (const auto& v : report.violations)
        if (v.constraint == "m1 > 0") found = true;
    CHECK(found);
}

TEST_CASE("negative state weights and terminal weights are flagged") {
    auto spec = testsup::s1();
    spec.g2 = -0.25;
    spec.hbar1 = -1.0;
    TimeGrid grid(spec.horizon, 16);
    auto report = validate_lq(spec, grid);
    CHECK_FALSE(report.pass);
    int g2_hits = 0, hbar_hits = 0;
    for (const auto& v : report.violations) {
        if (v.constraint == "g2 >= 0") ++g2_hits;
        if (v.constraint == "hbar1 >= 0") ++hbar_hits;
    }
    CHECK(g2_hits == grid.n_nodes());  // constant violation shows at every node
    CHECK(hbar_hits == 1);
}

TEST_CASE("vanishing control coefficient is flagged") {
    auto spec = testsup::s1();
    spec.b2 = 0.0;
    TimeGrid grid(spec.horizon, 8);
    auto report = validate_lq(spec, grid);
    CHECK_FALSE(report.pass);
    CHECK(report.violations.front().constraint == "b1 * b2 != 0");
}

TEST_CASE("symmetry condition b1^2/m1 == b2^2/m2") {
    auto spec = testsup::s1();
    TimeGrid grid(spec.horizon, 16);

    SUBCASE("violated for mismatched effectiveness") {
        spec.b2 = 2.0;  // b2^2/m2 = 4 vs b1^2/m1 = 1
        auto report = validate_lq(spec, grid);
        CHECK_FALSE(report.pass);
        bool found = false;
        for (const auto& v : report.violations)
            if (v.constraint == "A3: b1^2/m1 == b2^2/m2") {
                found = true;
                CHECK(v.magnitude == doctest::Approx(3.0));
            }
        CHECK(found);
    }
    SUBCASE("tolerance default tightens for constant coefficients") {
        CHECK(spec.default_tol_a3() == 1e-10);
        spec.m2 = spec.m1(0.0) * (1.0 + 1e-9);  // past the constant tolerance
        CHECK_FALSE(validate_lq(spec, grid).pass);
        CHECK(validate_lq(spec, grid, 1e-6).pass);  // explicit looser tolerance
    }
    SUBCASE("tabulated coefficients get the looser default") {
        std::vector<double> vals(17, 1.0);
        vals[8] = 1.0 + 5e-9;  // within 1e-8 of symmetric
        spec.m2 = Coefficient::table(vals, spec.horizon);
        CHECK(spec.has_tabulated());
        CHECK(spec.default_tol_a3() == 1e-8);
        CHECK(validate_lq(spec, grid).pass);
    }
}

TEST_CASE("tabulated coefficient interpolates linearly and clamps") {
    auto c = Coefficient::table({1.0, 3.0, 2.0}, 2.0);
    CHECK_FALSE(c.is_constant());
    CHECK(c(0.0) == 1.0);
    CHECK(c(0.5) == doctest::Approx(2.0));
    CHECK(c(1.0) == 3.0);
    CHECK(c(1.5) == doctest::Approx(2.5));
    CHECK(c(2.0) == 2.0);
    CHECK(c(-1.0) == 1.0);  // clamped
    CHECK(c(9.0) == 2.0);
}

TEST_CASE("quadratic data converts to the general form with exact derivatives") {
    auto spec = testsup::s1();
    auto g = lq_as_general(spec);
    CHECK(g.x0 == spec.x0);
    // drift and running costs agree pointwise with the structured data
    CHECK(g.f(0.3, 1.5, 0.7, 0.2, -0.1) ==
          doctest::Approx(0.1 * 1.5 + 0.05 * 0.7 + 0.2 - 0.1));
    CHECK(g.l1(0.0, 2.0, 1.0, 3.0, 0.0) ==
          doctest::Approx(0.5 * (1.0 * 4.0 + 0.1 * 1.0 + 1.0 * 9.0)));

    auto probe = check_general_derivatives(g, 200, 42);
    CHECK(probe.pass);
    CHECK(probe.worst_rel_error < 1e-4);
}

TEST_CASE("derivative probe flags an inconsistent derivative") {
    auto g = lq_as_general(testsup::s1());
    g.f_x = [](double, double, double, double, double) { return 99.0; };  // wrong on purpose
    auto probe = check_general_derivatives(g, 50, 7);
    CHECK_FALSE(probe.pass);
    CHECK(probe.worst_name == "f_x");
}
