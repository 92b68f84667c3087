#pragma once

// Gradient flow eps u_t = eps Lap u - W'(u)/eps, implicit in the linear part.
// Default scheme is convex splitting with shift S >= sup W'': unconditionally
// energy-decreasing for the face-difference energy.  The Helmholtz solve uses
// fd angular multipliers, so the update matrix is an M-matrix and the discrete
// maximum principle holds: |u| can approach 1 but a step cannot overshoot it
// (beyond the few-ulp slack of the solve itself, which is guarded).

#include <cfloat>
#include <cmath>
#include <functional>
#include <ostream>
#include <vector>

#include "acs3/common.hpp"
#include "acs3/geometry.hpp"
#include "acs3/interface.hpp"
#include "acs3/potential.hpp"
#include "acs3/spectrum.hpp"
#include "acs3/stationary.hpp"

namespace acs3 {

enum class Scheme { convex_split, imex };

struct FlowParams {
    const DoubleWell* well = nullptr;
    double eps = 0;
    double dt = 0;
    double S = 2.0;  // convex splitting shift
    Scheme scheme = Scheme::convex_split;
    const Symmetrizer* sym = nullptr;     // optional exact-subgroup projection
    double stationary_factor = 1e-8;      // stop when rate < factor * E0 per unit time
    double sigma = 2 * std::sqrt(2.0) / 3;

    void validate() const {
        if (!well) throw config_error("flow needs a potential");
        if (!(eps > 0)) throw config_error("flow needs eps > 0");
        if (!(dt > 0)) throw config_error("flow needs dt > 0");
        if (scheme == Scheme::convex_split && S < well->curvature_bound() - 1e-12)
            throw config_error("convex splitting needs S >= sup W'' = " +
                               fp(well->curvature_bound()) + ", got " + fp(S));
        if (scheme == Scheme::imex && dt > eps * eps / 2)
            throw config_error("imex stability needs dt <= eps^2/2 = " + fp(eps * eps / 2) +
                               ", got " + fp(dt));
    }
};

struct FlowState {
    ScalarField u;
    double time = 0;
    long step = 0;
    double energy = 0;
};

struct EnergyRow {
    long step = 0;
    double time = 0;
    double energy = 0;
    double area_proxy = 0;
    double dissipation = 0;     // -<grad E(midpoint), du>/dt, the pairing rate
    double discrepancy = 0;
    double max_abs_u = 0;
};

inline void energy_log_header(std::ostream& os) {
    os << "step,time,energy,area_proxy,dissipation,discrepancy,max_abs_u\n";
}

inline void energy_log_row(std::ostream& os, const EnergyRow& r) {
    os << r.step << "," << fp(r.time) << "," << fp(r.energy) << "," << fp(r.area_proxy) << ","
       << fp(r.dissipation) << "," << fp(r.discrepancy) << "," << fp(r.max_abs_u) << "\n";
}

inline double max_abs(const ScalarField& f) {
    double m = 0;
    for (double x : f.v) m = std::max(m, std::abs(x));
    return m;
}

struct StepStats {
    double dissipation = 0;     // pairing rate
    double dissipation_l2 = 0;  // eps ||du/dt||^2, carries an O(dt/eps^2) defect
};

// One implicit step.  Updates state in place and returns the dissipation
// rates of the transition.
inline StepStats flow_step(FlowState& st, const FlowParams& fp_, Fft2Workspace* ws = nullptr) {
    const DoubleWell& well = *fp_.well;
    const TorusGrid& g = *st.u.g;
    if (st.energy == 0) st.energy = total_energy(st.u, well, fp_.eps);
    const double eps2 = fp_.eps * fp_.eps;
    ScalarField rhs = make_field(g);
    double c;
    if (fp_.scheme == Scheme::convex_split) {
        const double al = 1 + fp_.dt * fp_.S / eps2;
        const double r = fp_.dt / eps2;
        for (long t = 0; t < g.size(); ++t)
            rhs.v[t] = (st.u.v[t] + r * (fp_.S * st.u.v[t] - well.wp(st.u.v[t]))) / al;
        c = fp_.dt / al;
    } else {
        const double r = fp_.dt / eps2;
        for (long t = 0; t < g.size(); ++t) rhs.v[t] = st.u.v[t] - r * well.wp(st.u.v[t]);
        c = fp_.dt;
    }
    ScalarField unew = helmholtz_solve(rhs, c, AngularMultipliers::fd, ws);
    if (fp_.sym) fp_.sym->apply(unew);

    const double mx = max_abs(unew);
    if (mx > 1 + 16 * DBL_EPSILON)
        throw numerical_error("maximum principle violated: max|u| = " + fp(mx) + " at t = " +
                              fp(st.time + fp_.dt));
    const double enew = total_energy(unew, well, fp_.eps);
    if (enew - st.energy > 1e-12 * std::abs(st.energy))
        throw numerical_error("energy increased by " + fp(enew - st.energy) + " at step " +
                              std::to_string(st.step + 1));

    // midpoint pairing: E(u+) - E(u) = eps a(mid, d) + int (W(u+) - W(u))/eps,
    // and the potential difference is W'(mid) d up to O(W''' d^3 / 24)
    ScalarField mid = make_field(g), dlt = make_field(g);
    for (long t = 0; t < g.size(); ++t) {
        mid.v[t] = 0.5 * (st.u.v[t] + unew.v[t]);
        dlt.v[t] = unew.v[t] - st.u.v[t];
    }
    StepStats stats;
    double pot = 0;
    for (int i = 0; i < g.ne; ++i) {
        double slab = 0;
        const long off = static_cast<long>(i) * g.n1 * g.n2;
        for (long jk = 0; jk < static_cast<long>(g.n1) * g.n2; ++jk)
            slab += well.wp(mid.v[off + jk]) * dlt.v[off + jk];
        pot += slab * g.rad.m[i];
    }
    pot *= g.wang;
    const double pairing = fp_.eps * dirichlet_fd_bilinear(mid, dlt) + pot / fp_.eps;
    stats.dissipation = -pairing / fp_.dt;
    stats.dissipation_l2 = fp_.eps * inner(dlt, dlt) / (fp_.dt * fp_.dt);

    st.u = std::move(unew);
    st.energy = enew;
    st.time += fp_.dt;
    st.step += 1;
    return stats;
}

enum class StopReason { t_end, stationary, callback };

struct RunHooks {
    // called for the initial state (dissipation 0) and after every step
    std::function<void(const FlowState&, const EnergyRow&, const StepStats&)> on_row;
    // optional early stop, checked after each step
    std::function<bool(const FlowState&)> stop;
};

inline EnergyRow make_row(const FlowState& st, const FlowParams& fp_, const StepStats& stats) {
    EnergyRow r;
    r.step = st.step;
    r.time = st.time;
    r.energy = st.energy;
    r.area_proxy = st.energy / fp_.sigma;
    r.dissipation = stats.dissipation;
    r.discrepancy = discrepancy_integral(st.u, *fp_.well, fp_.eps);
    r.max_abs_u = max_abs(st.u);
    return r;
}

inline StopReason run_flow(FlowState& st, const FlowParams& fp_, double t_end,
                           const RunHooks& hooks = {}, Fft2Workspace* ws = nullptr) {
    fp_.validate();
    if (st.energy == 0) st.energy = total_energy(st.u, *fp_.well, fp_.eps);
    const double e0 = st.energy;
    const double tol_rate = fp_.stationary_factor * std::abs(e0);
    if (hooks.on_row) hooks.on_row(st, make_row(st, fp_, {}), {});
    const long nsteps = static_cast<long>(std::ceil((t_end - st.time) / fp_.dt - 1e-9));
    for (long s = 0; s < nsteps; ++s) {
        StepStats stats = flow_step(st, fp_, ws);
        if (hooks.on_row) hooks.on_row(st, make_row(st, fp_, stats), stats);
        if (hooks.stop && hooks.stop(st)) return StopReason::callback;
        if (stats.dissipation < tol_rate) return StopReason::stationary;
    }
    return StopReason::t_end;
}

// Initial data on the unstable cone: lift of the critical profile plus the
// amplitude vector a in the frozen basis.
struct InitReport {
    FlowState state;
    double amp = 0;         // |a|
    double r_max = 0;       // admissible radius used for the check
    double quad_error = 0;  // |E(u0) - E(uc) - (eps/2) sum lambda_j a_j^2| / |a|^2
};

inline InitReport init_unstable(const RadialProfile& prof, const UnstableBasis& basis,
                                const std::array<double, 5>& a, const DoubleWell& well,
                                const TorusGrid& g, double r_max_frac = 0.1) {
    ScalarField lift = lift_profile(prof, g);
    const double rmax = r_max_frac * norm(lift);
    double amp2 = 0;
    for (double x : a) amp2 += x * x;
    const double amp = std::sqrt(amp2);
    if (amp > rmax)
        throw config_error("amplitude |a| = " + fp(amp) + " outside the admissible ball r_max = " +
                           fp(rmax));
    InitReport rep;
    rep.amp = amp;
    rep.r_max = rmax;
    ScalarField u0 = lift;
    for (int q = 0; q < 5; ++q)
        if (a[q] != 0)
            for (long t = 0; t < g.size(); ++t) u0.v[t] += a[q] * basis.phi[q].v[t];
    const double mx = max_abs(u0);
    if (mx >= 1)
        throw numerical_error("initial data leaves the well gap: max|u0| = " + fp(mx));
    rep.state.u = std::move(u0);
    rep.state.energy = total_energy(rep.state.u, well, prof.eps);
    const double elift = total_energy(lift, well, prof.eps);
    double quad = 0;
    for (int q = 0; q < 5; ++q) quad += basis.lambda[q] * a[q] * a[q];
    quad *= 0.5 * prof.eps;
    rep.quad_error = amp2 > 0 ? std::abs(rep.state.energy - elift - quad) / amp2 : 0;
    return rep;
}

// Unique crossing time of the reference level (the ground level sigma 4pi
// lies below it, the torus level sigma 2pi^2 above): the log's energy column
// is strictly decreasing, so at most one bracket exists.
inline double normalize_time(const std::vector<EnergyRow>& rows, double level) {
    if (rows.size() < 2) throw numerical_error("normalize_time needs at least two rows");
    for (size_t i = 1; i < rows.size(); ++i)
        if (rows[i].energy >= rows[i - 1].energy + 1e-9 * std::abs(rows[i - 1].energy) + 1e-300)
            throw numerical_error("energy log is not strictly decreasing at row " +
                                  std::to_string(i));
    if (rows.front().energy < level || rows.back().energy > level)
        throw numerical_error("level " + fp(level) + " outside the log energy range [" +
                              fp(rows.back().energy) + ", " + fp(rows.front().energy) + "]");
    for (size_t i = 1; i < rows.size(); ++i) {
        const double e0 = rows[i - 1].energy, e1 = rows[i].energy;
        if (e0 == level) return rows[i - 1].time;
        if (e0 > level && e1 <= level) {
            if (e1 == level) return rows[i].time;
            return rows[i - 1].time + (e0 - level) / (e0 - e1) * (rows[i].time - rows[i - 1].time);
        }
    }
    throw numerical_error("no crossing of level " + fp(level) + " found");
}

}  // namespace acs3
