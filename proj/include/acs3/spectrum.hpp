#pragma once

// Linearization J = -Lap + W''(u)/eps^2 at a radial state, block-diagonalized
// over angular modes.  Each block is a Jacobi matrix after the mass-weight
// similarity v = sqrt(m) f, so eigenvalues come from a symmetric tridiagonal
// solve.  Sign convention: negative eigenvalues of J are the unstable
// directions; the Morse index counts them with angular multiplicity.

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <vector>

#include "acs3/common.hpp"
#include "acs3/geometry.hpp"
#include "acs3/potential.hpp"
#include "acs3/stationary.hpp"

namespace acs3 {

struct ModeResult {
    std::vector<double> lambda;            // full block spectrum, ascending
    std::vector<std::vector<double>> f;    // first `count` eigenfunctions, sum f^2 m = 1,
                                           // sign positive at the largest-|f| node
    int neg_count = 0;                     // negatives among ALL eigenvalues of the block
};

namespace detail {

// angular potential of the block: torus modes (k1, k2) need 1/cos^2 and
// 1/sin^2 tables; geodesic modes l need 1/sin^2 on [0, pi]
inline std::vector<double> block_potential(const RadialProfile& p, const DoubleWell& well,
                                           int k1, int k2) {
    const Grid1D& g = p.grid;
    std::vector<double> V(g.n);
    const double ie2 = 1.0 / (p.eps * p.eps);
    if (p.coord == RadialCoord::eta) {
        EtaTables t = eta_tables(g);
        for (int i = 0; i < g.n; ++i)
            V[i] = k1 * k1 / t.cos2[i] + k2 * k2 / t.sin2[i] + well.wpp(p.u[i]) * ie2;
    } else {
        // geodesic: k1 carries l, spherical harmonic multiplier l(l+1)
        std::vector<double> s2(g.n);
        for (int i = 0; i < g.n / 2; ++i) {
            const double s = std::sin(g.node[i]);
            s2[i] = s * s;
        }
        for (int i = 0; i < g.n / 2; ++i) s2[g.n - 1 - i] = s2[i];
        const double l = k1;
        for (int i = 0; i < g.n; ++i) V[i] = l * (l + 1) / s2[i] + well.wpp(p.u[i]) * ie2;
    }
    return V;
}

}  // namespace detail

inline ModeResult mode_spectrum(const RadialProfile& p, const DoubleWell& well, int k1, int k2,
                                int count) {
    const Grid1D& g = p.grid;
    const int n = g.n;
    if (count < 0 || count > n) throw config_error("mode_spectrum count out of range");
    const std::vector<double> V = detail::block_potential(p, well, k1, k2);
    Eigen::VectorXd diag(n), off(n - 1);
    for (int i = 0; i < n; ++i)
        diag[i] = (g.F[i] + g.F[i + 1]) / (g.m[i] * g.h) + V[i];
    for (int i = 0; i < n - 1; ++i)
        off[i] = -g.F[i + 1] / (g.h * std::sqrt(g.m[i] * g.m[i + 1]));
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
    es.computeFromTridiagonal(diag, off,
                              count > 0 ? Eigen::ComputeEigenvectors : Eigen::EigenvaluesOnly);
    if (es.info() != Eigen::Success) throw numerical_error("tridiagonal eigensolve failed");
    ModeResult r;
    const auto& ev = es.eigenvalues();
    for (int i = 0; i < n; ++i)
        if (ev[i] < 0) ++r.neg_count;
    r.lambda.assign(ev.data(), ev.data() + n);
    for (int q = 0; q < count; ++q) {
        std::vector<double> f(n);
        for (int i = 0; i < n; ++i) f[i] = es.eigenvectors()(i, q) / std::sqrt(g.m[i]);
        int arg = 0;
        for (int i = 1; i < n; ++i)
            if (std::abs(f[i]) > std::abs(f[arg])) arg = i;
        if (f[arg] < 0)
            for (double& x : f) x = -x;
        r.f.push_back(std::move(f));
    }
    return r;
}

struct ModeSummary {
    int k1 = 0, k2 = 0;  // geodesic: k1 = l, k2 unused (-1)
    int mult = 1;
    int neg_count = 0;
    double lambda0 = 0;
};

struct SpectrumReport {
    std::vector<ModeSummary> modes;
    int morse_index = 0;
};

// Scan angular blocks up to k_max and count unstable directions with
// multiplicity.  A negative eigenvalue on the boundary shell means the scan
// was truncated too early; that is an error, not a warning.
inline SpectrumReport morse_index(const RadialProfile& p, const DoubleWell& well, int k_max) {
    if (k_max < 1) throw config_error("k_max must be >= 1");
    SpectrumReport rep;
    if (p.coord == RadialCoord::eta) {
        for (int k1 = 0; k1 <= k_max; ++k1) {
            for (int k2 = 0; k2 <= k_max; ++k2) {
                ModeResult m = mode_spectrum(p, well, k1, k2, 0);
                const int mult = (k1 > 0 ? 2 : 1) * (k2 > 0 ? 2 : 1);
                rep.modes.push_back({k1, k2, mult, m.neg_count, m.lambda[0]});
                if (m.neg_count && (k1 == k_max || k2 == k_max))
                    throw numerical_error("unstable mode on the truncation shell (k1 " +
                                          std::to_string(k1) + ", k2 " + std::to_string(k2) +
                                          "); increase k_max");
                rep.morse_index += mult * m.neg_count;
            }
        }
    } else {
        for (int l = 0; l <= k_max; ++l) {
            ModeResult m = mode_spectrum(p, well, l, -1, 0);
            const int mult = 2 * l + 1;
            rep.modes.push_back({l, -1, mult, m.neg_count, m.lambda[0]});
            if (m.neg_count && l == k_max)
                throw numerical_error("unstable mode at l = k_max; increase k_max");
            rep.morse_index += mult * m.neg_count;
        }
    }
    return rep;
}

// The five unstable directions of the torus-symmetric state, lifted to the 3D
// grid and 3D-normalized:
//   phi1 = f0(eta)                      from block (0,0), positive
//   phi2 = g(eta) cos phi1, phi3 = g(eta) sin phi1   from block (1,0), g > 0
//   phi4 = phi2 . s, phi5 = phi3 . s    exact grid permutations
struct UnstableBasis {
    std::array<ScalarField, 5> phi;
    std::array<double, 5> lambda;
};

inline UnstableBasis unstable_basis(const RadialProfile& p, const DoubleWell& well,
                                    const TorusGrid& g, int k_max = 3) {
    if (p.coord != RadialCoord::eta)
        throw config_error("unstable_basis needs the torus-symmetric state");
    SpectrumReport rep = morse_index(p, well, k_max);
    if (rep.morse_index != 5)
        throw numerical_error("expected Morse index 5, got " + std::to_string(rep.morse_index));

    ModeResult m00 = mode_spectrum(p, well, 0, 0, 1);
    ModeResult m10 = mode_spectrum(p, well, 1, 0, 1);
    std::vector<double> f0 = m00.f[0], gr = m10.f[0];
    // block ground states are nodeless; the argmax sign fix makes them positive.
    // Tails decay below round-off, so positivity is only meaningful above the
    // eigensolver noise floor.
    auto check_positive = [&](const std::vector<double>& f, const char* tag) {
        double peak = 0;
        for (double x : f) peak = std::max(peak, std::abs(x));
        for (double x : f)
            if (x < -1e-12 * peak)
                throw numerical_error(std::string(tag) + " ground eigenfunction not positive");
    };
    check_positive(f0, "(0,0)");
    check_positive(gr, "(1,0)");

    std::vector<double> f0g(g.ne), grg(g.ne);
    if (p.grid.n == g.ne) {
        f0g = f0;
        grg = gr;
    } else {
        ParityInterp i0(p.grid, f0, +1, +1);   // regular at both poles
        ParityInterp i1(p.grid, gr, +1, -1);   // ~ cos(eta) at eta = pi/2
        for (int i = 0; i < g.ne; ++i) {
            f0g[i] = i0(g.rad.node[i]);
            grg[i] = i1(g.rad.node[i]);
        }
    }

    UnstableBasis b;
    for (auto& f : b.phi) f = make_field(g);
    for (int i = 0; i < g.ne; ++i) {
        for (int j = 0; j < g.n1; ++j) {
            for (int k = 0; k < g.n2; ++k) {
                const long t = g.idx(i, j, k);
                b.phi[0].v[t] = f0g[i];
                b.phi[1].v[t] = grg[i] * g.c1[j];
                b.phi[2].v[t] = grg[i] * g.s1[j];
            }
        }
    }
    for (int q = 0; q < 3; ++q) {
        const double nn = norm(b.phi[q]);
        for (double& x : b.phi[q].v) x /= nn;
    }
    b.phi[3] = apply_isometry(swap_s(), b.phi[1]);
    b.phi[4] = apply_isometry(swap_s(), b.phi[2]);
    b.lambda = {m00.lambda[0], m10.lambda[0], m10.lambda[0], m10.lambda[0], m10.lambda[0]};
    return b;
}

}  // namespace acs3
