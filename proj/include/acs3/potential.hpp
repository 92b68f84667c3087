#pragma once

// Double-well potential, surface tension, 1D heteroclinic.  The standard well
// (1 - t^2)^2 / 4 is the default; a general symmetric well can be supplied and
// everything downstream only sees W, W', W''.

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <cmath>
#include <functional>

#include "acs3/common.hpp"

namespace acs3 {

struct DoubleWell {
    std::function<double(double)> W, Wp, Wpp;
    double clamp = 2.0;   // beyond |t| = clamp the well continues as a C^1 quadratic
    bool standard = true; // enables the closed-form heteroclinic

    double w(double t) const {
        if (std::abs(t) <= clamp) return W(t);
        const double s = t > 0 ? 1.0 : -1.0;
        const double e = std::abs(t) - clamp;
        return W(s * clamp) + Wp(s * clamp) * s * e + 0.5 * Wpp(s * clamp) * e * e;
    }
    double wp(double t) const {
        if (std::abs(t) <= clamp) return Wp(t);
        const double s = t > 0 ? 1.0 : -1.0;
        const double e = std::abs(t) - clamp;
        return Wp(s * clamp) + Wpp(s * clamp) * s * e;
    }
    double wpp(double t) const {
        if (std::abs(t) <= clamp) return Wpp(t);
        return Wpp(t > 0 ? clamp : -clamp);
    }
    // sup of W'' on [-1, 1], the convex-splitting threshold
    double curvature_bound() const {
        double m = 0;
        for (int i = 0; i <= 400; ++i) m = std::max(m, std::abs(Wpp(-1 + i * 0.005)));
        return m;
    }
};

inline DoubleWell standard_well() {
    DoubleWell w;
    w.W = [](double t) { const double q = 1 - t * t; return q * q / 4; };
    w.Wp = [](double t) { return t * (t * t - 1); };
    w.Wpp = [](double t) { return 3 * t * t - 1; };
    w.standard = true;
    return w;
}

// Sanity checks a user-supplied well must pass: even, nonneg, zeros exactly at
// +-1 which are nondegenerate minima, strictly decreasing on (0, 1).
inline void validate_well(const DoubleWell& w) {
    if (std::abs(w.W(1)) > 1e-14 || std::abs(w.W(-1)) > 1e-14)
        throw config_error("double well must vanish at +-1");
    if (w.Wpp(1) <= 0 || w.Wpp(-1) <= 0)
        throw config_error("double well must have nondegenerate minima at +-1");
    for (int i = 0; i <= 200; ++i) {
        const double t = -1 + i * 0.01;
        if (w.W(t) < -1e-14) throw config_error("double well must be nonnegative on [-1,1]");
        if (std::abs(w.W(t) - w.W(-t)) > 1e-13) throw config_error("double well must be even");
        if (t > 0.01 && t < 0.995 && w.Wp(t) >= 0)
            throw config_error("double well must strictly decrease on (0,1)");
    }
}

// Surface tension sigma = int_{-1}^{1} sqrt(2 W).  Standard well: sqrt(2)*2/3.
inline double sigma(const DoubleWell& w) {
    auto f = [&w](double t) { return std::sqrt(2 * std::max(0.0, w.W(t))); };
    return boost::math::quadrature::gauss_kronrod<double, 31>::integrate(f, -1.0, 1.0, 10, 1e-12);
}

// Heteroclinic profile H(t) solving eps H' = sqrt(2 W(H)), H(0) = 0, H -> +-1.
// Standard well: tanh(t / (eps sqrt2)).  General well: RK4 on the signed-
// distance ODE; the integrand vanishes at the end states so the walk saturates.
inline double heteroclinic(const DoubleWell& w, double eps, double t) {
    if (!(eps > 0)) throw config_error("heteroclinic needs eps > 0");
    if (w.standard) return std::tanh(t / (eps * std::sqrt(2.0)));
    const double sgn = t >= 0 ? 1.0 : -1.0;
    const double L = std::abs(t);
    const int nstep = 4000;
    const double h = L / nstep;
    auto rhs = [&](double u) { return std::sqrt(2 * std::max(0.0, w.w(u))) / eps; };
    double u = 0;
    for (int i = 0; i < nstep; ++i) {
        const double k1 = rhs(u);
        const double k2 = rhs(u + 0.5 * h * k1);
        const double k3 = rhs(u + 0.5 * h * k2);
        const double k4 = rhs(u + h * k3);
        u += h / 6 * (k1 + 2 * k2 + 2 * k3 + k4);
        if (u > 1) u = 1;  // sqrt(W) is not Lipschitz at the zero; clip overshoot
    }
    return sgn * u;
}

}  // namespace acs3
