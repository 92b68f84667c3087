#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "acs3/potential.hpp"

using namespace acs3;

TEST_CASE("standard well shape") {
    DoubleWell w = standard_well();
    REQUIRE(w.w(1.0) == 0.0);
    REQUIRE(w.w(-1.0) == 0.0);
    REQUIRE(w.w(0.0) == Catch::Approx(0.25).epsilon(1e-15));
    REQUIRE(w.wp(1.0) == 0.0);
    REQUIRE(w.wp(-1.0) == 0.0);
    REQUIRE(w.wpp(1.0) == Catch::Approx(2.0).epsilon(1e-14));
    REQUIRE(w.wpp(0.0) == Catch::Approx(-1.0).epsilon(1e-14));
    for (double t : {0.3, 0.77, 1.4}) REQUIRE(w.w(t) == Catch::Approx(w.w(-t)).epsilon(1e-14));
    REQUIRE_NOTHROW(validate_well(w));
}

TEST_CASE("quadratic continuation beyond the clamp is C1") {
    DoubleWell w = standard_well();
    const double c = w.clamp, d = 1e-7;
    REQUIRE(w.w(c + d) - w.w(c) == Catch::Approx(w.wp(c) * d).margin(1e-9));
    REQUIRE(w.wp(c + d) - w.wp(c) == Catch::Approx(w.wpp(c) * d).margin(1e-6));
    // curvature stops growing past the clamp: the convex-split shift stays valid
    REQUIRE(w.wpp(10.0) == Catch::Approx(w.wpp(c)).epsilon(1e-12));
}

TEST_CASE("curvature bound covers the well between the minima") {
    DoubleWell w = standard_well();
    const double b = w.curvature_bound();
    REQUIRE(b == Catch::Approx(2.0).epsilon(1e-3));
    for (double t = -1.0; t <= 1.0; t += 0.01) REQUIRE(w.wpp(t) <= b + 1e-12);
}

TEST_CASE("ill-formed wells are rejected") {
    DoubleWell bad = standard_well();
    bad.W = [](double t) { return (1 - t * t) * (1 - t * t) / 4 + 0.1; };  // no zeros
    REQUIRE_THROWS_AS(validate_well(bad), config_error);

    DoubleWell odd = standard_well();
    odd.W = [](double t) { return (1 - t * t) * (1 - t * t) / 4 + 0.05 * t; };
    odd.standard = false;
    REQUIRE_THROWS_AS(validate_well(odd), config_error);

    DoubleWell neg = standard_well();
    neg.W = [](double t) { return (1 - t * t) * (1 - t * t) / 4 - 0.05 * t * t; };
    REQUIRE_THROWS_AS(validate_well(neg), config_error);
}

TEST_CASE("surface tension of the standard well") {
    DoubleWell w = standard_well();
    REQUIRE(sigma(w) == Catch::Approx(2 * std::sqrt(2.0) / 3).epsilon(1e-12));
}

TEST_CASE("heteroclinic profile, closed form and ODE route agree") {
    DoubleWell w = standard_well();
    const double eps = 0.07;
    REQUIRE(heteroclinic(w, eps, 0.0) == 0.0);
    REQUIRE(heteroclinic(w, eps, 0.3) ==
            Catch::Approx(std::tanh(0.3 / (eps * std::sqrt(2.0)))).epsilon(1e-14));

    // same well, but routed through the general ODE integrator
    DoubleWell gen = standard_well();
    gen.standard = false;
    for (double t : {-0.5, -0.05, 0.02, 0.2, 0.8}) {
        REQUIRE(heteroclinic(gen, eps, t) ==
                Catch::Approx(std::tanh(t / (eps * std::sqrt(2.0)))).margin(2e-6));
    }
    REQUIRE(std::abs(heteroclinic(gen, eps, 5.0)) <= 1.0);
}

TEST_CASE("heteroclinic saturates to the minima") {
    DoubleWell w = standard_well();
    REQUIRE(heteroclinic(w, 0.05, 2.0) == Catch::Approx(1.0).margin(1e-12));
    REQUIRE(heteroclinic(w, 0.05, -2.0) == Catch::Approx(-1.0).margin(1e-12));
    REQUIRE_THROWS_AS(heteroclinic(w, 0.0, 0.1), config_error);
}
