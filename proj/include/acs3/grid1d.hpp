#pragma once

// 1D conservative grids for the radial factor of the metric.  Cell-centered
// nodes, exact cell masses from the antiderivative of the area density, face
// weights that vanish at coordinate poles.  Shared by the profile solvers and
// the per-mode spectral operators.

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

#include "acs3/common.hpp"

namespace acs3 {

struct Grid1D {
    int n = 0;            // cells
    double length = 0;    // domain [0, length]
    double h = 0;
    std::vector<double> node;  // n, centers (i + 1/2) h
    std::vector<double> face;  // n + 1
    std::vector<double> F;     // n + 1, density at faces; F[0] = F[n] = 0
    std::vector<double> m;     // n, exact cell masses; sum == total analytic mass
};

namespace detail {

// Mirror-symmetrize tables so index reversal is an exact discrete isometry:
// densities of both model grids satisfy F(L - x) = F(x).
inline void mirror_tables(Grid1D& g) {
    const int n = g.n;
    for (int i = 0; i <= n / 2; ++i) g.F[n - i] = g.F[i];
    for (int i = 0; i < n / 2; ++i) g.m[n - 1 - i] = g.m[i];
}

inline Grid1D build(int n, double length, const std::function<double(double)>& density,
                    const std::function<double(double)>& mass_primitive) {
    if (n < 4) throw config_error("1d grid needs at least 4 cells, got " + std::to_string(n));
    Grid1D g;
    g.n = n;
    g.length = length;
    g.h = length / n;
    g.node.resize(n);
    g.face.resize(n + 1);
    g.F.resize(n + 1);
    g.m.resize(n);
    for (int i = 0; i <= n; ++i) g.face[i] = i * g.h;
    for (int i = 0; i < n; ++i) g.node[i] = (i + 0.5) * g.h;
    for (int i = 0; i <= n; ++i) g.F[i] = density(g.face[i]);
    g.F[0] = 0.0;
    g.F[n] = 0.0;
    for (int i = 0; i < n; ++i) g.m[i] = mass_primitive(g.face[i + 1]) - mass_primitive(g.face[i]);
    mirror_tables(g);
    return g;
}

}  // namespace detail

// Toroidal radial grid on [0, pi/2]: density cos(eta) sin(eta), written as
// sin(2 eta)/2 so the pole values are exact zeros before being pinned.
inline Grid1D torus_grid1d(int n) {
    if (n % 2) throw config_error("torus 1d grid needs even n so eta = pi/4 is a face");
    return detail::build(
        n, kPi / 2, [](double x) { return std::sin(2 * x) / 2; },
        [](double x) { double s = std::sin(x); return s * s / 2; });
}

// Geodesic polar grid on [0, pi]: density sin^2 r.
inline Grid1D geodesic_grid1d(int n) {
    if (n % 2) throw config_error("geodesic 1d grid needs even n so r = pi/2 is a face");
    return detail::build(
        n, kPi, [](double x) { double s = std::sin(x); return s * s; },
        [](double x) { return (x - std::sin(x) * std::cos(x)) / 2; });
}

// cos/sin tables at the nodes of a torus radial grid, index-mirrored so that
// ce[n-1-i] == se[i] bitwise; reversal of any operator built from them is an
// exact discrete conjugation.
struct EtaTables {
    std::vector<double> ce, se, cos2, sin2;
};

inline EtaTables eta_tables(const Grid1D& g) {
    const int n = g.n;
    EtaTables t;
    t.ce.resize(n);
    t.se.resize(n);
    t.cos2.resize(n);
    t.sin2.resize(n);
    for (int i = 0; i < n / 2; ++i) {
        t.ce[i] = std::cos(g.node[i]);
        t.se[i] = std::sin(g.node[i]);
    }
    for (int i = 0; i < n / 2; ++i) {
        t.ce[n - 1 - i] = t.se[i];
        t.se[n - 1 - i] = t.ce[i];
    }
    for (int i = 0; i < n; ++i) {
        t.cos2[i] = t.ce[i] * t.ce[i];
        t.sin2[i] = t.se[i] * t.se[i];
    }
    return t;
}

// Tridiagonal solve, Thomas algorithm.  a = sub, d = diag, c = super;
// overwrites rhs with the solution.  No pivoting: every system we build is
// strictly diagonally dominant.  T is double or complex<double>.
template <class T>
inline void thomas_solve(const std::vector<double>& a, std::vector<double> d,
                         const std::vector<double>& c, std::vector<T>& rhs) {
    const int n = static_cast<int>(d.size());
    for (int i = 1; i < n; ++i) {
        const double w = a[i - 1] / d[i - 1];
        d[i] -= w * c[i - 1];
        rhs[i] -= w * rhs[i - 1];
    }
    rhs[n - 1] /= d[n - 1];
    for (int i = n - 2; i >= 0; --i) rhs[i] = (rhs[i] - c[i] * rhs[i + 1]) / d[i];
}

// Cubic Lagrange interpolation of cell-centered samples with parity ghosts.
// left/right parity: +1 even reflection, -1 odd, across x = 0 and x = length.
// The stencil is written in difference form so that on four equal samples the
// result is exactly that sample (no weight round-off can push a saturated
// plateau past its value).
struct ParityInterp {
    const Grid1D* g;
    std::vector<double> ext;  // n + 4 samples with two ghosts each side

    ParityInterp(const Grid1D& grid, const std::vector<double>& u, int left, int right)
        : g(&grid) {
        const int n = grid.n;
        ext.resize(n + 4);
        for (int i = 0; i < n; ++i) ext[i + 2] = u[i];
        ext[1] = left * u[0];
        ext[0] = left * u[1];
        ext[n + 2] = right * u[n - 1];
        ext[n + 3] = right * u[n - 2];
    }

    double operator()(double x) const {
        const int n = g->n;
        double t = x / g->h - 0.5 + 2.0;  // position in ext index space
        double jf = std::floor(t);
        int j = std::clamp(static_cast<int>(jf), 1, n + 1);
        double s = t - j;  // in [0,1) away from the clamped ends
        const double f0 = ext[j - 1], f1 = ext[j], f2 = ext[j + 1], f3 = ext[j + 2];
        const double w0 = -s * (s - 1) * (s - 2) / 6;
        const double w1 = (s + 1) * (s - 1) * (s - 2) / 2;
        const double w2 = -(s + 1) * s * (s - 2) / 2;
        // w3 implied by partition of unity; difference form keeps plateaus exact
        return f1 + w0 * (f0 - f1) + w2 * (f2 - f1) +
               ((s + 1) * s * (s - 1) / 6) * (f3 - f1);
    }
};

}  // namespace acs3
