#include <catch2/catch_amalgamated.hpp>

#include <cstring>
#include <random>

#include "acs3/geometry.hpp"

using namespace acs3;

namespace {

ScalarField random_field(const TorusGrid& g, unsigned seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    ScalarField f = make_field(g);
    for (double& x : f.v) x = u(rng);
    return f;
}

Isometry random_isometry(const TorusGrid& g, std::mt19937_64& rng) {
    std::uniform_int_distribution<int> coin(0, 1), off1(0, g.n1 - 1), off2(0, g.n2 - 1);
    Isometry iso;
    iso.swap = coin(rng) != 0;
    iso.m1 = coin(rng) ? 1 : -1;
    iso.m2 = coin(rng) ? 1 : -1;
    iso.o1 = off1(rng);
    iso.o2 = off2(rng);
    return normalized(iso, g.n1, g.n2);
}

}  // namespace

TEST_CASE("grid tables carry the exact mirror symmetries") {
    TorusGrid g = build_grid(32, 16, 16);
    const int n = g.rad.n;
    for (int i = 0; i <= n; ++i) REQUIRE(g.rad.F[n - i] == g.rad.F[i]);
    for (int i = 0; i < n; ++i) REQUIRE(g.rad.m[n - 1 - i] == g.rad.m[i]);
    for (int i = 0; i < n; ++i) REQUIRE(g.ce[n - 1 - i] == g.se[i]);
    REQUIRE(g.rad.F[0] == 0.0);
    REQUIRE(g.rad.F[n] == 0.0);

    // quadrant-mirrored angle tables; angular nodes are cell-centered, so the
    // mirror pairs j and n-1-j
    const int q = g.n1 / 4;
    for (int j = 0; j < g.n1; ++j) {
        REQUIRE(g.c1[g.n1 - 1 - j] == g.c1[j]);
        REQUIRE(g.s1[g.n1 - 1 - j] == -g.s1[j]);
    }
    for (int j = 0; j < q; ++j) REQUIRE(g.s1[j] == g.c1[q - 1 - j]);
    for (int j = 0; j < q; ++j) REQUIRE(g.c1[q + j] == -g.c1[q - 1 - j]);
}

TEST_CASE("total mass is the exact volume") {
    for (int n : {16, 32, 64}) {
        TorusGrid g = build_grid(n, 16, 16);
        ScalarField one = make_field(g);
        for (double& x : one.v) x = 1.0;
        REQUIRE(integrate(one) == Catch::Approx(2 * kPi * kPi).epsilon(1e-13));
    }
}

TEST_CASE("coordinate moments") {
    TorusGrid g = build_grid(32, 32, 32);
    for (int a = 0; a < 4; ++a) {
        ScalarField x = coordinate_field(g, a);
        ScalarField x2 = x;
        for (double& v : x2.v) v *= v;
        // each squared coordinate carries a quarter of the volume
        REQUIRE(integrate(x2) == Catch::Approx(kPi * kPi / 2).epsilon(5e-3));
        REQUIRE(std::abs(integrate(x)) < 1e-12);
    }
}

TEST_CASE("node_weight matches the integration order") {
    TorusGrid g = build_grid(16, 16, 16);
    ScalarField f = random_field(g, 7);
    double s = 0;
    for (long t = 0; t < g.size(); ++t) s += f.v[t] * g.node_weight(t);
    REQUIRE(s == Catch::Approx(integrate(f)).margin(1e-12 * std::abs(integrate(f)) + 1e-13));
}

TEST_CASE("first ambient harmonics under the spectral operator") {
    TorusGrid g = build_grid(32, 32, 32);
    Fft2Workspace ws(g.n1, g.n2);
    ScalarField x1 = coordinate_field(g, 0);
    ScalarField lap = laplace_beltrami_spectral(x1, &ws);
    const double r1 = -inner(x1, lap) / inner(x1, x1);
    REQUIRE(r1 == Catch::Approx(3.0).epsilon(5e-3));

    ScalarField x3 = coordinate_field(g, 2);
    ScalarField prod = x1;
    for (long t = 0; t < g.size(); ++t) prod.v[t] *= x3.v[t];
    ScalarField lap2 = laplace_beltrami_spectral(prod, &ws);
    const double r2 = -inner(prod, lap2) / inner(prod, prod);
    REQUIRE(r2 == Catch::Approx(8.0).epsilon(5e-3));
}

TEST_CASE("summation by parts ties the face energy to the operator") {
    TorusGrid g = build_grid(16, 12, 20);
    ScalarField f = random_field(g, 21);
    ScalarField lap = laplace_beltrami(f);
    const double lhs = dirichlet_fd(f);
    const double rhs = -inner(f, lap);
    REQUIRE(lhs == Catch::Approx(rhs).epsilon(1e-11));
}

TEST_CASE("bilinear face form polarizes the quadratic one") {
    TorusGrid g = build_grid(16, 12, 12);
    ScalarField f = random_field(g, 3), p = random_field(g, 4);
    ScalarField sum = f, dif = f;
    for (long t = 0; t < g.size(); ++t) {
        sum.v[t] += p.v[t];
        dif.v[t] -= p.v[t];
    }
    const double pol = 0.25 * (dirichlet_fd(sum) - dirichlet_fd(dif));
    REQUIRE(dirichlet_fd_bilinear(f, p) == Catch::Approx(pol).epsilon(1e-10));
}

TEST_CASE("helmholtz inverts the finite difference operator exactly") {
    TorusGrid g = build_grid(16, 16, 12);
    Fft2Workspace ws(g.n1, g.n2);
    ScalarField b = random_field(g, 11);
    const double c = 0.37;
    ScalarField u = helmholtz_solve(b, c, AngularMultipliers::fd, &ws);
    ScalarField lap = laplace_beltrami(u);
    double worst = 0;
    for (long t = 0; t < g.size(); ++t)
        worst = std::max(worst, std::abs(u.v[t] - c * lap.v[t] - b.v[t]));
    REQUIRE(worst < 1e-11);
}

TEST_CASE("helmholtz round trip, spectral flavor") {
    TorusGrid g = build_grid(16, 16, 12);
    Fft2Workspace ws(g.n1, g.n2);
    ScalarField b = random_field(g, 13);
    const double c = 0.05;
    ScalarField u = helmholtz_solve(b, c, AngularMultipliers::spectral, &ws);
    ScalarField lap = laplace_beltrami_spectral(u, &ws);
    double worst = 0;
    for (long t = 0; t < g.size(); ++t)
        worst = std::max(worst, std::abs(u.v[t] - c * lap.v[t] - b.v[t]));
    REQUIRE(worst < 1e-11);
}

TEST_CASE("isometries act as a group of exact permutations") {
    TorusGrid g = build_grid(16, 16, 16);
    std::mt19937_64 rng(99);
    ScalarField f = random_field(g, 5);
    for (int trial = 0; trial < 25; ++trial) {
        Isometry a = random_isometry(g, rng), b = random_isometry(g, rng);
        ScalarField lhs = apply_isometry(a, apply_isometry(b, f));
        ScalarField rhs = apply_isometry(compose(a, b), f);
        REQUIRE(std::memcmp(lhs.v.data(), rhs.v.data(), sizeof(double) * lhs.v.size()) == 0);

        ScalarField back = apply_isometry(inverse(a), apply_isometry(a, f));
        REQUIRE(std::memcmp(back.v.data(), f.v.data(), sizeof(double) * f.v.size()) == 0);
    }
}

TEST_CASE("point matrices represent the permutation action") {
    TorusGrid g = build_grid(16, 16, 16);
    std::mt19937_64 rng(17);
    std::array<ScalarField, 4> x = {coordinate_field(g, 0), coordinate_field(g, 1),
                                    coordinate_field(g, 2), coordinate_field(g, 3)};
    for (int trial = 0; trial < 10; ++trial) {
        Isometry iso = random_isometry(g, rng);
        const std::array<double, 16> Minv = matrix4(inverse(iso), g);
        for (int a = 0; a < 4; ++a) {
            ScalarField moved = apply_isometry(iso, x[a]);
            double worst = 0;
            for (long t = 0; t < g.size(); ++t) {
                double want = 0;
                for (int bcol = 0; bcol < 4; ++bcol) want += Minv[4 * a + bcol] * x[bcol].v[t];
                worst = std::max(worst, std::abs(moved.v[t] - want));
            }
            REQUIRE(worst < 1e-13);
        }
        // the matrix map is a homomorphism
        Isometry iso2 = random_isometry(g, rng);
        const auto Ma = matrix4(iso, g), Mb = matrix4(iso2, g), Mab = matrix4(compose(iso, iso2), g);
        for (int r = 0; r < 4; ++r)
            for (int c = 0; c < 4; ++c) {
                double s = 0;
                for (int k = 0; k < 4; ++k) s += Ma[4 * r + k] * Mb[4 * k + c];
                REQUIRE(s == Catch::Approx(Mab[4 * r + c]).margin(1e-13));
            }
    }
}

TEST_CASE("symmetrizers are idempotent and enforce their group") {
    TorusGrid g = build_grid(16, 16, 16);
    ScalarField f = random_field(g, 31);
    Symmetrizer sym = make_q_symmetrizer(g);
    ScalarField once = f;
    sym.apply(once);
    ScalarField twice = once;
    sym.apply(twice);
    REQUIRE(std::memcmp(once.v.data(), twice.v.data(), sizeof(double) * once.v.size()) == 0);

    // invariance under every generator, bitwise
    for (const SymOp& op : sym.levels) {
        ScalarField moved = apply_symop(op, once);
        REQUIRE(std::memcmp(moved.v.data(), once.v.data(), sizeof(double) * once.v.size()) == 0);
    }

    Symmetrizer arc = make_arc_symmetrizer(g);
    ScalarField h = f;
    arc.apply(h);
    for (const SymOp& op : arc.levels) {
        ScalarField moved = apply_symop(op, h);
        REQUIRE(std::memcmp(moved.v.data(), h.v.data(), sizeof(double) * h.v.size()) == 0);
    }
}

TEST_CASE("conjugated symmetrizer fixes the rotated state family") {
    TorusGrid g = build_grid(16, 16, 16);
    ScalarField f = random_field(g, 41);
    Symmetrizer base = make_q_symmetrizer(g);
    Symmetrizer moved = conjugate(base, 4, 4);
    ScalarField h = f;
    moved.apply(h);
    ScalarField again = h;
    moved.apply(again);
    REQUIRE(std::memcmp(h.v.data(), again.v.data(), sizeof(double) * h.v.size()) == 0);
}

TEST_CASE("parity interpolation is plateau safe and cubic exact") {
    Grid1D g = torus_grid1d(64);
    std::vector<double> flat(64, 0.75);
    ParityInterp pf(g, flat, +1, +1);
    for (double x : {0.01, 0.3, kPi / 4, 1.2, kPi / 2 - 0.01})
        REQUIRE(pf(x) == 0.75);  // exact, not approximate

    // an even cubic in eta is reproduced through the even ghost at 0
    std::vector<double> cub(64);
    for (int i = 0; i < 64; ++i) cub[i] = 1 + g.node[i] * g.node[i];
    ParityInterp pc(g, cub, +1, +1);
    for (double x : {0.02, 0.5, 1.0})
        REQUIRE(pc(x) == Catch::Approx(1 + x * x).epsilon(1e-9));
}

TEST_CASE("grid construction validates its arguments") {
    REQUIRE_THROWS_AS(build_grid(7, 16, 16), config_error);
    REQUIRE_THROWS_AS(build_grid(16, 10, 16), config_error);
    REQUIRE_THROWS_AS(build_grid(16, 16, 0), config_error);
}
