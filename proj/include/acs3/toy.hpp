#pragma once

// Finite-dimensional picture of the same story: gradient flow of
// F(x, y, z, w, u) = y (u + 2) on S^1 x S^2.  Four critical points with
// indices 0, 1, 2, 3, heteroclinics along the meridian, and a generic descent
// to the minimum.  Everything is analytic enough to check to round-off.

#include <Eigen/Dense>

#include <array>
#include <cmath>
#include <random>
#include <vector>

#include "acs3/common.hpp"

namespace acs3 {

using ToyPoint = std::array<double, 5>;  // (x, y) in R^2, (z, w, u) in R^3

inline double toy_F(const ToyPoint& p) { return p[1] * (p[4] + 2); }

// Riemannian gradient: ambient gradient projected per factor.
inline ToyPoint toy_grad(const ToyPoint& p) {
    const double a = p[4] + 2;  // dF/dy
    const double b = p[1];      // dF/du
    const double d1 = p[1] * a;                      // <grad, n> on S^1
    const double d2 = p[4] * b;                      // <grad, n> on S^2
    return {-d1 * p[0], a - d1 * p[1], -d2 * p[2], -d2 * p[3], b - d2 * p[4]};
}

// Intrinsic Hessian in an orthonormal tangent basis: ambient Hessian minus
// the normal pull <grad F, n> per factor (second fundamental form of a unit
// sphere).  Returns eigenvalues ascending plus the index.
struct ToyHessian {
    std::array<double, 3> eigenvalues{};
    int index = 0;
};

inline ToyHessian toy_hessian(const ToyPoint& p) {
    // tangent basis: t1 spans the S^1 factor, t2/t3 an orthonormal pair on S^2
    std::array<ToyPoint, 3> t{};
    t[0] = {-p[1], p[0], 0, 0, 0};
    {
        // complete (z, w, u) to a basis, Gram-Schmidt against the normal
        const std::array<double, 3> n = {p[2], p[3], p[4]};
        std::array<std::array<double, 3>, 2> cand{};
        int got = 0;
        for (int axis = 0; axis < 3 && got < 2; ++axis) {
            std::array<double, 3> v{};
            v[axis] = 1;
            double d = v[0] * n[0] + v[1] * n[1] + v[2] * n[2];
            for (int c = 0; c < 3; ++c) v[c] -= d * n[c];
            for (int q = 0; q < got; ++q) {
                d = v[0] * cand[q][0] + v[1] * cand[q][1] + v[2] * cand[q][2];
                for (int c = 0; c < 3; ++c) v[c] -= d * cand[q][c];
            }
            const double nn = std::sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2]);
            if (nn > 1e-6) {
                for (int c = 0; c < 3; ++c) v[c] /= nn;
                cand[got++] = v;
            }
        }
        t[1] = {0, 0, cand[0][0], cand[0][1], cand[0][2]};
        t[2] = {0, 0, cand[1][0], cand[1][1], cand[1][2]};
    }
    const double pull1 = p[1] * (p[4] + 2);  // <grad F, n> restricted to S^1
    const double pull2 = p[4] * p[1];        // and to S^2
    Eigen::Matrix3d H;
    for (int a = 0; a < 3; ++a) {
        for (int b = 0; b < 3; ++b) {
            // ambient Hessian of y(u+2): only the y-u cross term
            double amb = t[a][1] * t[b][4] + t[a][4] * t[b][1];
            double g1 = t[a][0] * t[b][0] + t[a][1] * t[b][1];
            double g2 = t[a][2] * t[b][2] + t[a][3] * t[b][3] + t[a][4] * t[b][4];
            H(a, b) = amb - pull1 * g1 - pull2 * g2;
        }
    }
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(H);
    ToyHessian out;
    for (int q = 0; q < 3; ++q) {
        out.eigenvalues[q] = es.eigenvalues()(q);
        if (es.eigenvalues()(q) < 0) ++out.index;
    }
    return out;
}

inline const std::array<ToyPoint, 4>& toy_critical_points() {
    // ordered by index 0..3
    static const std::array<ToyPoint, 4> pts = {{{0, -1, 0, 0, 1},
                                                 {0, 1, 0, 0, -1},
                                                 {0, -1, 0, 0, -1},
                                                 {0, 1, 0, 0, 1}}};
    return pts;
}

inline void toy_renormalize(ToyPoint& p) {
    const double n1 = std::sqrt(p[0] * p[0] + p[1] * p[1]);
    const double n2 = std::sqrt(p[2] * p[2] + p[3] * p[3] + p[4] * p[4]);
    p[0] /= n1;
    p[1] /= n1;
    p[2] /= n2;
    p[3] /= n2;
    p[4] /= n2;
}

// RK4 descent with per-factor renormalization.  Returns the end point.
inline ToyPoint toy_flow(ToyPoint p, double dt, double t_end) {
    const long n = static_cast<long>(std::ceil(t_end / dt));
    auto rhs = [](const ToyPoint& q) {
        ToyPoint g = toy_grad(q);
        for (double& x : g) x = -x;
        return g;
    };
    for (long s = 0; s < n; ++s) {
        const ToyPoint k1 = rhs(p);
        ToyPoint q;
        for (int c = 0; c < 5; ++c) q[c] = p[c] + 0.5 * dt * k1[c];
        const ToyPoint k2 = rhs(q);
        for (int c = 0; c < 5; ++c) q[c] = p[c] + 0.5 * dt * k2[c];
        const ToyPoint k3 = rhs(q);
        for (int c = 0; c < 5; ++c) q[c] = p[c] + dt * k3[c];
        const ToyPoint k4 = rhs(q);
        for (int c = 0; c < 5; ++c)
            p[c] += dt / 6 * (k1[c] + 2 * k2[c] + 2 * k3[c] + k4[c]);
        toy_renormalize(p);
    }
    return p;
}

inline double toy_dist(const ToyPoint& a, const ToyPoint& b) {
    double d = 0;
    for (int c = 0; c < 5; ++c) d += (a[c] - b[c]) * (a[c] - b[c]);
    return std::sqrt(d);
}

// sup over the meridian gamma(t) = (cos t, sin t, 0, 0, -1) of
// | -grad F - (-cos t) gamma'(t) |: the curve is flow-invariant with speed
// t' = -cos t, and this measures how exactly the projected gradient knows it.
inline double toy_meridian_residual(int samples = 256) {
    double worst = 0;
    for (int s = 0; s < samples; ++s) {
        const double t = 2 * kPi * (s + 0.5) / samples;
        const ToyPoint p = {std::cos(t), std::sin(t), 0, 0, -1};
        const ToyPoint g = toy_grad(p);
        const std::array<double, 5> want = {(-std::cos(t)) * -std::sin(t),
                                            (-std::cos(t)) * std::cos(t), 0, 0, 0};
        double d = 0;
        for (int c = 0; c < 5; ++c) d += (-g[c] - want[c]) * (-g[c] - want[c]);
        worst = std::max(worst, std::sqrt(d));
    }
    return worst;
}

struct ToyReport {
    std::array<ToyHessian, 4> hess;
    std::array<double, 4> F{};
    double meridian_residual = 0;
    double saddle_to_saddle_dist = 0;  // meridian-nudged flow from index 1 vs index-2 point
    double generic_to_min_dist = 0;    // jittered flow from index 3 vs the minimum
};

inline ToyReport toy_run(double dt, double t_end, unsigned long seed) {
    ToyReport rep;
    const auto& cps = toy_critical_points();
    for (int q = 0; q < 4; ++q) {
        rep.hess[q] = toy_hessian(cps[q]);
        rep.F[q] = toy_F(cps[q]);
        if (rep.hess[q].index != q)
            throw numerical_error("toy critical point " + std::to_string(q) +
                                  " has index " + std::to_string(rep.hess[q].index));
    }
    rep.meridian_residual = toy_meridian_residual();

    // meridian heteroclinic: nudge the index-1 saddle along the meridian
    const double d0 = 1e-3;
    ToyPoint start = {std::cos(kPi / 2 + d0), std::sin(kPi / 2 + d0), 0, 0, -1};
    ToyPoint end = toy_flow(start, dt, t_end);
    rep.saddle_to_saddle_dist = toy_dist(end, cps[2]);

    // generic jitter off the index-3 maximum
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(-1e-2, 1e-2);
    ToyPoint jp = cps[3];
    for (double& c : jp) c += u(rng);
    toy_renormalize(jp);
    ToyPoint jend = toy_flow(jp, dt, t_end);
    rep.generic_to_min_dist = toy_dist(jend, cps[0]);
    return rep;
}

}  // namespace acs3
