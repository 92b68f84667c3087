#pragma once

// Interface extraction and classification: energy density, equipartition
// discrepancy, nodal sets, great-sphere fits, and a calibrated statistic that
// separates the square torus from the two diagonal tori.

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <string>
#include <vector>

#include "acs3/common.hpp"
#include "acs3/geometry.hpp"
#include "acs3/potential.hpp"

namespace acs3 {

// |grad u|^2 with centered differences.  Across the coordinate poles the grid
// continues into itself: (-eta, phi1, phi2) is the point (eta, phi1, phi2+pi)
// and (pi/2 + d, phi1, phi2) is (pi/2 - d, phi1 + pi, phi2), which supplies
// the ghost values.
inline ScalarField grad_sq_centered(const ScalarField& f) {
    const TorusGrid& g = *f.g;
    ScalarField out = make_field(g);
    const double i2h = 1.0 / (2 * g.rad.h);
    const double i2d1 = 1.0 / (2 * g.d1), i2d2 = 1.0 / (2 * g.d2);
    for (int i = 0; i < g.ne; ++i) {
        const double ic2 = 1.0 / g.cos2[i], is2 = 1.0 / g.sin2[i];
        for (int j = 0; j < g.n1; ++j) {
            const int jp = (j + 1) % g.n1, jm = (j + g.n1 - 1) % g.n1;
            for (int k = 0; k < g.n2; ++k) {
                const int kp = (k + 1) % g.n2, km = (k + g.n2 - 1) % g.n2;
                const double up = (i + 1 < g.ne)
                                      ? f.v[g.idx(i + 1, j, k)]
                                      : f.v[g.idx(i, (j + g.n1 / 2) % g.n1, k)];
                const double um = (i > 0) ? f.v[g.idx(i - 1, j, k)]
                                          : f.v[g.idx(i, j, (k + g.n2 / 2) % g.n2)];
                const double de = (up - um) * i2h;
                const double d1 = (f.v[g.idx(i, jp, k)] - f.v[g.idx(i, jm, k)]) * i2d1;
                const double d2 = (f.v[g.idx(i, j, kp)] - f.v[g.idx(i, j, km)]) * i2d2;
                out.v[g.idx(i, j, k)] = de * de + d1 * d1 * ic2 + d2 * d2 * is2;
            }
        }
    }
    return out;
}

// Pointwise energy density eps/2 |grad u|^2 + W(u)/eps.
inline ScalarField energy_density(const ScalarField& f, const DoubleWell& well, double eps) {
    ScalarField out = grad_sq_centered(f);
    for (long t = 0; t < static_cast<long>(out.v.size()); ++t)
        out.v[t] = 0.5 * eps * out.v[t] + well.w(f.v[t]) / eps;
    return out;
}

// E_eps with the face-difference Dirichlet form: exactly the Lyapunov
// functional of the implicit stepper
inline double total_energy(const ScalarField& f, const DoubleWell& well, double eps) {
    const TorusGrid& g = *f.g;
    double pot = 0;
    for (int i = 0; i < g.ne; ++i) {
        double slab = 0;
        const long off = static_cast<long>(i) * g.n1 * g.n2;
        for (long jk = 0; jk < static_cast<long>(g.n1) * g.n2; ++jk) slab += well.w(f.v[off + jk]);
        pot += slab * g.rad.m[i];
    }
    return 0.5 * eps * dirichlet_fd(f) + pot * g.wang / eps;
}

// integral of |eps/2 |grad u|^2 - W(u)/eps|; vanishing discrepancy is the
// equipartition signature of a tight interface layer
inline double discrepancy_integral(const ScalarField& f, const DoubleWell& well, double eps) {
    ScalarField gs = grad_sq_centered(f);
    const TorusGrid& g = *f.g;
    double total = 0;
    for (int i = 0; i < g.ne; ++i) {
        double slab = 0;
        const long off = static_cast<long>(i) * g.n1 * g.n2;
        for (long jk = 0; jk < static_cast<long>(g.n1) * g.n2; ++jk)
            slab += std::abs(0.5 * eps * gs.v[off + jk] - well.w(f.v[off + jk]) / eps);
        total += slab * g.rad.m[i];
    }
    return total * g.wang;
}

// Zero-crossing points of the field along the three grid directions, linearly
// interpolated and embedded in R^4 (unit vectors by construction).
inline std::vector<std::array<double, 4>> extract_nodal(const ScalarField& f) {
    const TorusGrid& g = *f.g;
    std::vector<std::array<double, 4>> pts;
    auto embed = [](double eta, double p1, double p2) {
        return std::array<double, 4>{std::cos(eta) * std::cos(p1), std::cos(eta) * std::sin(p1),
                                     std::sin(eta) * std::cos(p2), std::sin(eta) * std::sin(p2)};
    };
    for (int i = 0; i < g.ne; ++i) {
        const double eta = g.rad.node[i];
        for (int j = 0; j < g.n1; ++j) {
            const double p1 = (j + 0.5) * g.d1;
            for (int k = 0; k < g.n2; ++k) {
                const double p2 = (k + 0.5) * g.d2;
                const double u = f.v[g.idx(i, j, k)];
                if (u == 0.0) {
                    pts.push_back(embed(eta, p1, p2));
                    continue;
                }
                if (i + 1 < g.ne) {
                    const double w = f.v[g.idx(i + 1, j, k)];
                    if (u * w < 0) pts.push_back(embed(eta + u / (u - w) * g.rad.h, p1, p2));
                }
                const double w1 = f.v[g.idx(i, (j + 1) % g.n1, k)];
                if (u * w1 < 0 && w1 != 0) pts.push_back(embed(eta, p1 + u / (u - w1) * g.d1, p2));
                const double w2 = f.v[g.idx(i, j, (k + 1) % g.n2)];
                if (u * w2 < 0 && w2 != 0) pts.push_back(embed(eta, p1, p2 + u / (u - w2) * g.d2));
            }
        }
    }
    return pts;
}

struct EquatorFit {
    std::array<double, 4> y{0, 0, 0, 1};
    double residual = 0;  // smallest eigenvalue of the point second-moment matrix
    bool ok = false;      // false: degenerate moment matrix, direction ambiguous
};

// Best great sphere through the points: y minimizes mean <x,y>^2.  The sign of
// y is fixed so that f correlates positively with <x, y>.
inline EquatorFit fit_equator(const std::vector<std::array<double, 4>>& pts,
                              const ScalarField& f) {
    if (pts.size() < 10)
        throw numerical_error("equator fit needs at least 10 nodal points, got " +
                              std::to_string(pts.size()));
    Eigen::Matrix4d M = Eigen::Matrix4d::Zero();
    for (const auto& p : pts)
        for (int a = 0; a < 4; ++a)
            for (int b = 0; b < 4; ++b) M(a, b) += p[a] * p[b];
    M /= static_cast<double>(pts.size());
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix4d> es(M);
    EquatorFit fit;
    fit.residual = es.eigenvalues()(0);
    fit.ok = (es.eigenvalues()(1) - es.eigenvalues()(0)) > 1e-9 * es.eigenvalues()(3);
    for (int a = 0; a < 4; ++a) fit.y[a] = es.eigenvectors()(a, 0);
    // orientation from the field: positive phase on the <x,y> > 0 side
    double corr = 0;
    for (int a = 0; a < 4; ++a) corr += fit.y[a] * inner(f, coordinate_field(*f.g, a));
    if (corr < 0)
        for (int a = 0; a < 4; ++a) fit.y[a] = -fit.y[a];
    return fit;
}

struct TorusStat {
    double value = 0;  // calibrated: +1 square torus, -1 diagonal tori, clamped
    double raw = 0;
    bool low_confidence = false;  // energy density too uniform to localize
};

namespace detail {

struct QuadMoments {
    double mc = 0, mp = 0, mm = 0;
};

// energy-weighted mean squares of the three quadratics that cut out the
// square torus and its two diagonal partners
inline QuadMoments quad_moments(const ScalarField& f, const DoubleWell& well, double eps) {
    const TorusGrid& g = *f.g;
    ScalarField e = energy_density(f, well, eps);
    double qc = 0, qp = 0, qm = 0, tot = 0;
    for (int i = 0; i < g.ne; ++i) {
        const double Qc = g.cos2[i] - 0.5;
        double sc = 0, sp = 0, sm = 0, se = 0;
        for (int j = 0; j < g.n1; ++j) {
            const double x12 = g.cos2[i] * g.c1[j] * g.s1[j];
            for (int k = 0; k < g.n2; ++k) {
                const double x34 = g.sin2[i] * g.c2[k] * g.s2[k];
                const double ed = e.v[g.idx(i, j, k)];
                const double Qp = x12 - x34, Qm = x12 + x34;
                se += ed;
                sc += ed * Qc * Qc;
                sp += ed * Qp * Qp;
                sm += ed * Qm * Qm;
            }
        }
        tot += se * g.rad.m[i];
        qc += sc * g.rad.m[i];
        qp += sp * g.rad.m[i];
        qm += sm * g.rad.m[i];
    }
    if (tot <= 0) return {};
    return {qc / tot, qp / tot, qm / tot};
}

inline double raw_stat(const QuadMoments& q) { return 0.5 * (q.mp + q.mm) - q.mc; }

// tanh layer across the square torus: signed distance eta - pi/4
inline ScalarField synth_layer_c(const TorusGrid& g, const DoubleWell& well, double eps) {
    ScalarField f = make_field(g);
    for (int i = 0; i < g.ne; ++i) {
        const double val = heteroclinic(well, eps, g.rad.node[i] - kPi / 4);
        double* slab = f.v.data() + static_cast<long>(i) * g.n1 * g.n2;
        for (long jk = 0; jk < static_cast<long>(g.n1) * g.n2; ++jk) slab[jk] = val;
    }
    return f;
}

// tanh layer across a diagonal torus.  {x1 x2 = x3 x4} is the square torus of
// the rotated frame u1 = (x1+x2)/sqrt2, u2 = (x1-x2)/sqrt2, u3 = (x3+x4)/sqrt2,
// u4 = (x3-x4)/sqrt2 (it is u1^2 + u4^2 = u2^2 + u3^2), and {x1 x2 = -x3 x4}
// swaps u3 and u4.  Signed distance: asin(radius of the far pair) - pi/4.
inline ScalarField synth_layer_diag(const TorusGrid& g, const DoubleWell& well, double eps,
                                    bool plus) {
    ScalarField f = make_field(g);
    std::array<ScalarField, 4> x = {coordinate_field(g, 0), coordinate_field(g, 1),
                                    coordinate_field(g, 2), coordinate_field(g, 3)};
    const double r2 = std::sqrt(0.5);
    for (long t = 0; t < g.size(); ++t) {
        const double u2 = (x[0].v[t] - x[1].v[t]) * r2;
        const double u3 = (x[2].v[t] + x[3].v[t]) * r2;
        const double u4 = (x[2].v[t] - x[3].v[t]) * r2;
        const double far = plus ? u2 * u2 + u3 * u3 : u2 * u2 + u4 * u4;
        const double rad = std::asin(std::clamp(std::sqrt(far), 0.0, 1.0));
        f.v[t] = heteroclinic(well, eps, rad - kPi / 4);
    }
    return f;
}

}  // namespace detail

// Calibrated torus statistic: raw moments are mapped by the affine function
// sending the synthetic square-torus layer to +1 and the mean of the two
// synthetic diagonal layers to -1, then clamped to [-1, 1].
inline TorusStat torus_statistic(const ScalarField& f, const DoubleWell& well, double eps) {
    TorusStat ts;
    detail::QuadMoments q = detail::quad_moments(f, well, eps);
    ts.raw = detail::raw_stat(q);
    const TorusGrid& g = *f.g;
    const double cal_c =
        detail::raw_stat(detail::quad_moments(detail::synth_layer_c(g, well, eps), well, eps));
    const double cal_p = detail::raw_stat(
        detail::quad_moments(detail::synth_layer_diag(g, well, eps, true), well, eps));
    const double cal_m = detail::raw_stat(
        detail::quad_moments(detail::synth_layer_diag(g, well, eps, false), well, eps));
    const double cal_d = 0.5 * (cal_p + cal_m);
    ts.value = std::clamp(2 * (ts.raw - cal_d) / (cal_c - cal_d) - 1, -1.0, 1.0);

    ScalarField e = energy_density(f, well, eps);
    const double vol = 2 * kPi * kPi;
    const double mean = integrate(e) / vol;
    ScalarField dev = e;
    for (double& x : dev.v) x -= mean;
    double var = inner(dev, dev) / vol;
    ts.low_confidence = !(mean > 0) || std::sqrt(std::max(0.0, var)) < 0.25 * mean;
    return ts;
}

// energy share per eta slab, sums to 1 for nonzero fields
inline std::vector<double> eta_histogram(const ScalarField& f, const DoubleWell& well,
                                         double eps) {
    const TorusGrid& g = *f.g;
    ScalarField e = energy_density(f, well, eps);
    std::vector<double> share(g.ne, 0.0);
    double tot = 0;
    for (int i = 0; i < g.ne; ++i) {
        double slab = 0;
        const long off = static_cast<long>(i) * g.n1 * g.n2;
        for (long jk = 0; jk < static_cast<long>(g.n1) * g.n2; ++jk) slab += e.v[off + jk];
        share[i] = slab * g.rad.m[i];
        tot += share[i];
    }
    if (tot > 0)
        for (double& s : share) s /= tot;
    return share;
}

enum class Phase { constant_plus, constant_minus, sphere, torus, unresolved };

inline const char* phase_name(Phase p) {
    switch (p) {
        case Phase::constant_plus: return "constant_plus";
        case Phase::constant_minus: return "constant_minus";
        case Phase::sphere: return "sphere";
        case Phase::torus: return "torus";
        default: return "unresolved";
    }
}

struct Thresholds {
    double constant_dev = 0.05;     // sup distance to +-1 for the constant phases
    double sphere_residual = 0.01;  // moment residual for a great-sphere fit
    double area_band = 0.10;        // relative band around 4 pi / 2 pi^2
    double torus_stat = 0.5;        // calibrated statistic cut
    int min_points = 10;
};

struct InterfaceReport {
    Phase phase = Phase::unresolved;
    double area_proxy = 0;          // E/sigma
    double energy = 0;
    double discrepancy = 0;
    int n_points = 0;
    EquatorFit fit;                 // valid when enough nodal points exist
    TorusStat stat;
    double multiplicity = 0;        // area_proxy / 4pi
    Thresholds thr;
};

inline InterfaceReport classify(const ScalarField& f, const DoubleWell& well, double eps,
                                double sig, const Thresholds& thr = {}) {
    InterfaceReport rep;
    rep.thr = thr;
    rep.energy = total_energy(f, well, eps);
    rep.area_proxy = rep.energy / sig;
    rep.discrepancy = discrepancy_integral(f, well, eps);
    rep.multiplicity = rep.area_proxy / (4 * kPi);

    double dplus = 0, dminus = 0;
    for (double x : f.v) {
        dplus = std::max(dplus, std::abs(x - 1));
        dminus = std::max(dminus, std::abs(x + 1));
    }
    if (dplus < thr.constant_dev) {
        rep.phase = Phase::constant_plus;
        return rep;
    }
    if (dminus < thr.constant_dev) {
        rep.phase = Phase::constant_minus;
        return rep;
    }

    std::vector<std::array<double, 4>> pts = extract_nodal(f);
    rep.n_points = static_cast<int>(pts.size());
    if (rep.n_points < thr.min_points) return rep;  // unresolved
    rep.fit = fit_equator(pts, f);
    if (rep.fit.ok && rep.fit.residual < thr.sphere_residual &&
        std::abs(rep.area_proxy / (4 * kPi) - 1) <= thr.area_band) {
        rep.phase = Phase::sphere;
        return rep;
    }
    rep.stat = torus_statistic(f, well, eps);
    if (rep.stat.value >= thr.torus_stat &&
        std::abs(rep.area_proxy / (2 * kPi * kPi) - 1) <= thr.area_band) {
        rep.phase = Phase::torus;
        return rep;
    }
    return rep;
}

inline nlohmann::json report_to_json(const InterfaceReport& r) {
    nlohmann::json j;
    j["phase"] = phase_name(r.phase);
    j["energy"] = r.energy;
    j["area_proxy"] = r.area_proxy;
    j["discrepancy"] = r.discrepancy;
    j["multiplicity"] = r.multiplicity;
    j["n_points"] = r.n_points;
    j["fit"] = {{"y", r.fit.y}, {"residual", r.fit.residual}, {"ok", r.fit.ok}};
    j["torus_stat"] = {{"value", r.stat.value},
                       {"raw", r.stat.raw},
                       {"low_confidence", r.stat.low_confidence}};
    j["thresholds"] = {{"constant_dev", r.thr.constant_dev},
                       {"sphere_residual", r.thr.sphere_residual},
                       {"area_band", r.thr.area_band},
                       {"torus_stat", r.thr.torus_stat},
                       {"min_points", r.thr.min_points}};
    return j;
}

}  // namespace acs3
