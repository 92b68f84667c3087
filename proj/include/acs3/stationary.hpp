#pragma once

// Radially-reduced stationary states: the Clifford-torus-symmetric critical
// point (profile in eta, odd across eta = pi/4) and the ground state (profile
// in geodesic distance from a pole, odd across the equator).  Both come from a
// damped Newton solve on the half interval with a hard zero on the symmetry
// face, then reflect.

#include <cmath>
#include <fstream>
#include <optional>
#include <vector>

#include "acs3/common.hpp"
#include "acs3/geometry.hpp"
#include "acs3/grid1d.hpp"
#include "acs3/potential.hpp"

namespace acs3 {

enum class RadialCoord { eta, geodesic };

struct RadialProfile {
    RadialCoord coord = RadialCoord::eta;
    double eps = 0;
    Grid1D grid;            // full interval: [0, pi/2] or [0, pi]
    std::vector<double> u;  // odd across the midpoint by construction
    double energy = 0;      // full 3D energy of the lifted state
    double residual = 0;    // final Newton residual, sup norm
};

namespace detail {

// Newton solve of eps^2 (F u')'/m = W'(u) on the first nh cells with an odd
// ghost across face nh.  Returns the converged half profile.
inline std::vector<double> solve_half(const Grid1D& g, const DoubleWell& well, double eps,
                                      const std::vector<double>& init, double& res_out) {
    const int nh = g.n / 2;
    const double h = g.h;
    std::vector<double> u(init.begin(), init.begin() + nh);
    std::vector<double> r(nh), a(nh - 1), c(nh - 1), d(nh), fl(nh + 1);
    const double e2 = eps * eps;

    auto residual = [&](const std::vector<double>& w, std::vector<double>& out) {
        fl[0] = 0;
        for (int i = 1; i < nh; ++i) fl[i] = g.F[i] * (w[i] - w[i - 1]) / h;
        fl[nh] = g.F[nh] * (-2 * w[nh - 1]) / h;  // odd ghost: value -w at the mirror node
        double mx = 0;
        for (int i = 0; i < nh; ++i) {
            out[i] = e2 * (fl[i + 1] - fl[i]) / g.m[i] - well.wp(w[i]);
            mx = std::max(mx, std::abs(out[i]));
        }
        return mx;
    };

    double rn = residual(u, r);
    for (int it = 0; it < 200 && rn > 1e-11; ++it) {
        for (int i = 0; i < nh; ++i) {
            d[i] = -e2 * (g.F[i] + g.F[i + 1]) / (h * g.m[i]) - well.wpp(u[i]);
            if (i > 0) a[i - 1] = e2 * g.F[i] / (h * g.m[i]);
            if (i < nh - 1) c[i] = e2 * g.F[i + 1] / (h * g.m[i]);
        }
        d[nh - 1] -= e2 * g.F[nh] / (h * g.m[nh - 1]);  // ghost contribution
        std::vector<double> step(r);
        for (double& x : step) x = -x;
        thomas_solve(a, d, c, step);
        double lam = 1.0;
        std::vector<double> trial(nh), rt(nh);
        while (true) {
            for (int i = 0; i < nh; ++i) trial[i] = u[i] + lam * step[i];
            const double rtn = residual(trial, rt);
            if (rtn < rn || lam < 1.0 / 64) {
                u = trial;
                r = rt;
                rn = rtn;
                break;
            }
            lam /= 2;
        }
    }
    if (rn > 1e-10)
        throw numerical_error("profile Newton stalled, residual " + fp(rn));
    res_out = rn;
    double mx = 0, mn = 1e300;
    for (double x : u) {
        mx = std::max(mx, std::abs(x));
        mn = std::min(mn, x);
    }
    if (mx < 0.3)
        throw numerical_error("profile collapsed toward zero (max " + fp(mx) +
                              "); no nontrivial symmetric state resolved at eps " + fp(eps));
    if (mn <= 0)
        throw numerical_error("profile changed sign inside the half interval");
    // the converged bulk saturates to exactly 1.0 in floating point once the
    // interface is far enough away, so only genuine overshoot is an error
    if (mx > 1 + 16 * std::numeric_limits<double>::epsilon())
        throw numerical_error("profile exceeded the well minima, max " + fp(mx));
    return u;
}

// face-difference Dirichlet sum + exact-mass potential sum of a full profile
inline double profile_energy_1d(const Grid1D& g, const DoubleWell& well, double eps,
                                const std::vector<double>& u) {
    double dir = 0;
    for (int i = 1; i < g.n; ++i) {
        const double df = u[i] - u[i - 1];
        dir += g.F[i] * df * df / g.h;
    }
    double pot = 0;
    for (int i = 0; i < g.n; ++i) pot += well.w(u[i]) * g.m[i];
    return 0.5 * eps * dir + pot / eps;
}

}  // namespace detail

inline RadialProfile solve_torus_symmetric(int n, double eps, const DoubleWell& well) {
    if (!(eps > 0)) throw config_error("eps must be positive");
    RadialProfile p;
    p.coord = RadialCoord::eta;
    p.eps = eps;
    p.grid = torus_grid1d(n);
    std::vector<double> init(n / 2);
    for (int i = 0; i < n / 2; ++i)
        init[i] = heteroclinic(well, eps, kPi / 4 - p.grid.node[i]);
    std::vector<double> half = detail::solve_half(p.grid, well, eps, init, p.residual);
    p.u.assign(n, 0.0);
    for (int i = 0; i < n / 2; ++i) {
        p.u[i] = half[i];
        p.u[n - 1 - i] = -half[i];
    }
    p.energy = 4 * kPi * kPi * detail::profile_energy_1d(p.grid, well, eps, p.u);
    return p;
}

inline RadialProfile solve_ground_state(int n, double eps, const DoubleWell& well) {
    if (!(eps > 0)) throw config_error("eps must be positive");
    RadialProfile p;
    p.coord = RadialCoord::geodesic;
    p.eps = eps;
    p.grid = geodesic_grid1d(n);
    std::vector<double> init(n / 2);
    for (int i = 0; i < n / 2; ++i)
        init[i] = heteroclinic(well, eps, kPi / 2 - p.grid.node[i]);
    std::vector<double> half = detail::solve_half(p.grid, well, eps, init, p.residual);
    p.u.assign(n, 0.0);
    for (int i = 0; i < n / 2; ++i) {
        p.u[i] = half[i];
        p.u[n - 1 - i] = -half[i];
    }
    p.energy = 4 * kPi * detail::profile_energy_1d(p.grid, well, eps, p.u);
    return p;
}

// Lift a radial profile to the 3D grid.  An eta profile at matching resolution
// is lifted by direct copy, so the lift is the exact discrete symmetric state;
// otherwise cubic interpolation with even ghosts (difference form: saturated
// plateaus cannot be pushed past their value).  A geodesic profile needs the
// pole: u(x) = profile(arccos <x, pole>).
inline ScalarField lift_profile(const RadialProfile& p, const TorusGrid& g,
                                std::optional<std::array<double, 4>> pole = std::nullopt) {
    ScalarField f = make_field(g);
    if (p.coord == RadialCoord::eta) {
        if (p.grid.n == g.ne) {
            for (int i = 0; i < g.ne; ++i) {
                const double val = p.u[i];
                double* slab = f.v.data() + static_cast<long>(i) * g.n1 * g.n2;
                for (long jk = 0; jk < static_cast<long>(g.n1) * g.n2; ++jk) slab[jk] = val;
            }
        } else {
            ParityInterp interp(p.grid, p.u, +1, +1);
            for (int i = 0; i < g.ne; ++i) {
                const double val = interp(g.rad.node[i]);
                double* slab = f.v.data() + static_cast<long>(i) * g.n1 * g.n2;
                for (long jk = 0; jk < static_cast<long>(g.n1) * g.n2; ++jk) slab[jk] = val;
            }
        }
        return f;
    }
    if (!pole) throw config_error("geodesic lift needs a pole");
    const auto& y = *pole;
    const double ny = std::sqrt(y[0] * y[0] + y[1] * y[1] + y[2] * y[2] + y[3] * y[3]);
    if (std::abs(ny - 1) > 1e-12)
        throw config_error("pole must be a unit vector, |pole| = " + fp(ny));
    ParityInterp interp(p.grid, p.u, +1, +1);
    std::array<ScalarField, 4> x = {coordinate_field(g, 0), coordinate_field(g, 1),
                                    coordinate_field(g, 2), coordinate_field(g, 3)};
    for (long t = 0; t < g.size(); ++t) {
        double dot = 0;
        for (int a = 0; a < 4; ++a) dot += y[a] * x[a].v[t];
        dot = std::clamp(dot, -1.0, 1.0);
        f.v[t] = interp(std::acos(dot));
    }
    return f;
}

inline void profile_to_csv(const RadialProfile& p, std::ostream& os) {
    os << "coordinate,value\n";
    for (int i = 0; i < p.grid.n; ++i) os << fp(p.grid.node[i]) << "," << fp(p.u[i]) << "\n";
}

}  // namespace acs3
