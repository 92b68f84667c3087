#pragma once

// Discrete round S^3 in toroidal coordinates (eta, phi1, phi2) with metric
// d eta^2 + cos^2(eta) d phi1^2 + sin^2(eta) d phi2^2.  Cell-centered tensor
// grid, exact cell masses, trig tables mirrored so that the isometries we use
// act as exact index permutations.  Poles of the coordinate system (eta = 0,
// pi/2) are closed by zero face weights; no field degrees of freedom sit there.

#include <fftw3.h>

#include <array>
#include <complex>
#include <cstring>
#include <memory>
#include <mutex>
#include <vector>

#include "acs3/common.hpp"
#include "acs3/grid1d.hpp"

namespace acs3 {

struct TorusGrid {
    int ne = 0, n1 = 0, n2 = 0;
    double d1 = 0, d2 = 0, wang = 0;  // angular steps, d1*d2
    Grid1D rad;                        // radial factor on [0, pi/2]
    // eta tables, index-mirrored: ce[ne-1-i] == se[i] bitwise
    std::vector<double> ce, se, cos2, sin2;
    // angle tables, quadrant-mirrored: c[n-1-j] == c[j], s[n-1-j] == -s[j],
    // c[n/2-1-j] == -c[j], s[q-1-j] == c[j] (q = n/4), all bitwise
    std::vector<double> c1, s1, c2, s2;

    int idx(int i, int j, int k) const { return (i * n1 + j) * n2 + k; }
    long size() const { return static_cast<long>(ne) * n1 * n2; }
    // quadrature weight of a flat index: exact cell mass times the angular cell
    double node_weight(long t) const { return rad.m[t / (static_cast<long>(n1) * n2)] * wang; }
};

namespace detail {

inline void angle_tables(int n, std::vector<double>& c, std::vector<double>& s) {
    c.resize(n);
    s.resize(n);
    const int q = n / 4;
    const double d = 2 * kPi / n;
    for (int j = 0; j < q; ++j) c[j] = std::cos((j + 0.5) * d);
    for (int j = 0; j < q; ++j) s[j] = c[q - 1 - j];  // sin(phi) = cos(pi/2 - phi), exact node pairing
    for (int j = q; j < 2 * q; ++j) {                 // phi -> pi - phi
        c[j] = -c[2 * q - 1 - j];
        s[j] = s[2 * q - 1 - j];
    }
    for (int j = 2 * q; j < n; ++j) {  // phi -> 2 pi - phi
        c[j] = c[n - 1 - j];
        s[j] = -s[n - 1 - j];
    }
}

}  // namespace detail

inline TorusGrid build_grid(int ne, int n1, int n2) {
    if (ne < 8 || ne % 2) throw config_error("n_eta must be even and >= 8, got " + std::to_string(ne));
    if (n1 < 8 || n1 % 4) throw config_error("n_phi1 must be a multiple of 4 and >= 8, got " + std::to_string(n1));
    if (n2 < 8 || n2 % 4) throw config_error("n_phi2 must be a multiple of 4 and >= 8, got " + std::to_string(n2));
    TorusGrid g;
    g.ne = ne;
    g.n1 = n1;
    g.n2 = n2;
    g.d1 = 2 * kPi / n1;
    g.d2 = 2 * kPi / n2;
    g.wang = g.d1 * g.d2;
    g.rad = torus_grid1d(ne);
    EtaTables t = eta_tables(g.rad);
    g.ce = std::move(t.ce);
    g.se = std::move(t.se);
    g.cos2 = std::move(t.cos2);
    g.sin2 = std::move(t.sin2);
    detail::angle_tables(n1, g.c1, g.s1);
    detail::angle_tables(n2, g.c2, g.s2);
    return g;
}

struct ScalarField {
    const TorusGrid* g = nullptr;
    std::vector<double> v;
};

inline ScalarField make_field(const TorusGrid& g, double fill = 0.0) {
    return {&g, std::vector<double>(g.size(), fill)};
}

// Ambient coordinate x_a restricted to the grid, a in 0..3:
// (cos eta cos phi1, cos eta sin phi1, sin eta cos phi2, sin eta sin phi2).
inline ScalarField coordinate_field(const TorusGrid& g, int a) {
    if (a < 0 || a > 3) throw config_error("coordinate axis must be 0..3");
    ScalarField f = make_field(g);
    for (int i = 0; i < g.ne; ++i) {
        const double r = (a < 2) ? g.ce[i] : g.se[i];
        for (int j = 0; j < g.n1; ++j) {
            const double aj = (a == 0) ? g.c1[j] : (a == 1) ? g.s1[j] : r;
            const double rij = (a < 2) ? r * aj : r;
            for (int k = 0; k < g.n2; ++k) {
                double val;
                if (a < 2) val = rij;
                else if (a == 2) val = r * g.c2[k];
                else val = r * g.s2[k];
                f.v[g.idx(i, j, k)] = val;
            }
        }
    }
    return f;
}

// Fixed reduction order (k, then j, then slab-by-slab in i) so integrals are
// reproducible bit for bit across runs.
inline double integrate(const ScalarField& f) {
    const TorusGrid& g = *f.g;
    double total = 0;
    for (int i = 0; i < g.ne; ++i) {
        double slab = 0;
        const double* p = f.v.data() + static_cast<long>(i) * g.n1 * g.n2;
        for (int jk = 0; jk < g.n1 * g.n2; ++jk) slab += p[jk];
        total += slab * g.rad.m[i];
    }
    return total * g.wang;
}

inline double inner(const ScalarField& f, const ScalarField& h) {
    const TorusGrid& g = *f.g;
    double total = 0;
    for (int i = 0; i < g.ne; ++i) {
        double slab = 0;
        const long off = static_cast<long>(i) * g.n1 * g.n2;
        const double* p = f.v.data() + off;
        const double* q = h.v.data() + off;
        for (int jk = 0; jk < g.n1 * g.n2; ++jk) slab += p[jk] * q[jk];
        total += slab * g.rad.m[i];
    }
    return total * g.wang;
}

inline double norm(const ScalarField& f) { return std::sqrt(inner(f, f)); }

// Dirichlet integral of the face-difference form; exactly the quadratic form
// whose Euler-Lagrange operator is laplace_beltrami below, so the implicit
// flow step decreases it by construction.
inline double dirichlet_fd(const ScalarField& f) {
    const TorusGrid& g = *f.g;
    const long s = static_cast<long>(g.n1) * g.n2;
    double rad = 0;
    for (int i = 1; i < g.ne; ++i) {
        double acc = 0;
        const double* a = f.v.data() + (i - 1) * s;
        const double* b = f.v.data() + i * s;
        for (long jk = 0; jk < s; ++jk) {
            const double df = b[jk] - a[jk];
            acc += df * df;
        }
        rad += acc * g.rad.F[i];
    }
    rad *= g.wang / g.rad.h;
    double ang1 = 0, ang2 = 0;
    for (int i = 0; i < g.ne; ++i) {
        double a1 = 0, a2 = 0;
        for (int j = 0; j < g.n1; ++j) {
            const int jp = (j + 1) % g.n1;
            for (int k = 0; k < g.n2; ++k) {
                const int kp = (k + 1) % g.n2;
                const double u0 = f.v[g.idx(i, j, k)];
                const double dj = f.v[g.idx(i, jp, k)] - u0;
                const double dk = f.v[g.idx(i, j, kp)] - u0;
                a1 += dj * dj;
                a2 += dk * dk;
            }
        }
        ang1 += a1 * g.rad.m[i] / g.cos2[i];
        ang2 += a2 * g.rad.m[i] / g.sin2[i];
    }
    ang1 *= g.d2 / g.d1;
    ang2 *= g.d1 / g.d2;
    return rad + ang1 + ang2;
}

// Polarization of dirichlet_fd: a(f, p) with a(f, f) = dirichlet_fd(f).
inline double dirichlet_fd_bilinear(const ScalarField& f, const ScalarField& p) {
    const TorusGrid& g = *f.g;
    const long s = static_cast<long>(g.n1) * g.n2;
    double rad = 0;
    for (int i = 1; i < g.ne; ++i) {
        double acc = 0;
        const long lo = (i - 1) * s, hi = i * s;
        for (long jk = 0; jk < s; ++jk)
            acc += (f.v[hi + jk] - f.v[lo + jk]) * (p.v[hi + jk] - p.v[lo + jk]);
        rad += acc * g.rad.F[i];
    }
    rad *= g.wang / g.rad.h;
    double ang1 = 0, ang2 = 0;
    for (int i = 0; i < g.ne; ++i) {
        double a1 = 0, a2 = 0;
        for (int j = 0; j < g.n1; ++j) {
            const int jp = (j + 1) % g.n1;
            for (int k = 0; k < g.n2; ++k) {
                const int kp = (k + 1) % g.n2;
                const long t0 = g.idx(i, j, k);
                a1 += (f.v[g.idx(i, jp, k)] - f.v[t0]) * (p.v[g.idx(i, jp, k)] - p.v[t0]);
                a2 += (f.v[g.idx(i, j, kp)] - f.v[t0]) * (p.v[g.idx(i, j, kp)] - p.v[t0]);
            }
        }
        ang1 += a1 * g.rad.m[i] / g.cos2[i];
        ang2 += a2 * g.rad.m[i] / g.sin2[i];
    }
    ang1 *= g.d2 / g.d1;
    ang2 *= g.d1 / g.d2;
    return rad + ang1 + ang2;
}

// Conservative Laplace-Beltrami: flux differences in eta (face weights vanish
// at both poles, which closes the operator there), periodic second differences
// in the angles.
inline ScalarField laplace_beltrami(const ScalarField& f) {
    const TorusGrid& g = *f.g;
    ScalarField out = make_field(g);
    const long s = static_cast<long>(g.n1) * g.n2;
    const double h = g.rad.h;
    for (int i = 0; i < g.ne; ++i) {
        const double fm = g.rad.F[i], fp = g.rad.F[i + 1];
        const double im = 1.0 / (h * g.rad.m[i]);
        const double w1 = 1.0 / (g.d1 * g.d1 * g.cos2[i]);
        const double w2 = 1.0 / (g.d2 * g.d2 * g.sin2[i]);
        for (int j = 0; j < g.n1; ++j) {
            const int jp = (j + 1) % g.n1, jm = (j + g.n1 - 1) % g.n1;
            for (int k = 0; k < g.n2; ++k) {
                const int kp = (k + 1) % g.n2, km = (k + g.n2 - 1) % g.n2;
                const double u = f.v[g.idx(i, j, k)];
                double acc = 0;
                if (i + 1 < g.ne) acc += fp * (f.v[g.idx(i + 1, j, k)] - u);
                if (i > 0) acc -= fm * (u - f.v[g.idx(i - 1, j, k)]);
                acc *= im;
                acc += (f.v[g.idx(i, jp, k)] - 2 * u + f.v[g.idx(i, jm, k)]) * w1;
                acc += (f.v[g.idx(i, j, kp)] - 2 * u + f.v[g.idx(i, j, km)]) * w2;
                out.v[g.idx(i, j, k)] = acc;
            }
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// FFT machinery.  FFTW plan creation is not thread-safe; execution on a
// workspace's own buffers is.

namespace detail {
inline std::mutex& fftw_mutex() {
    static std::mutex m;
    return m;
}
}  // namespace detail

class Fft2Workspace {
  public:
    Fft2Workspace(int n1, int n2) : n1_(n1), n2_(n2), nc2_(n2 / 2 + 1) {
        rbuf_ = fftw_alloc_real(static_cast<size_t>(n1) * n2);
        cbuf_ = fftw_alloc_complex(static_cast<size_t>(n1) * nc2_);
        std::lock_guard<std::mutex> lock(detail::fftw_mutex());
        fwd_ = fftw_plan_dft_r2c_2d(n1, n2, rbuf_, cbuf_, FFTW_ESTIMATE);
        bwd_ = fftw_plan_dft_c2r_2d(n1, n2, cbuf_, rbuf_, FFTW_ESTIMATE);
    }
    Fft2Workspace(const Fft2Workspace&) = delete;
    Fft2Workspace& operator=(const Fft2Workspace&) = delete;
    ~Fft2Workspace() {
        std::lock_guard<std::mutex> lock(detail::fftw_mutex());
        fftw_destroy_plan(fwd_);
        fftw_destroy_plan(bwd_);
        fftw_free(rbuf_);
        fftw_free(cbuf_);
    }

    int nc2() const { return nc2_; }

    void forward(const double* slab, std::complex<double>* out) {
        std::memcpy(rbuf_, slab, sizeof(double) * n1_ * n2_);
        fftw_execute(fwd_);
        std::memcpy(out, cbuf_, sizeof(fftw_complex) * n1_ * nc2_);
    }

    // Includes the 1/(n1 n2) normalization.
    void inverse(const std::complex<double>* in, double* slab) {
        std::memcpy(cbuf_, in, sizeof(fftw_complex) * n1_ * nc2_);
        fftw_execute(bwd_);
        const double scale = 1.0 / (static_cast<double>(n1_) * n2_);
        for (long t = 0; t < static_cast<long>(n1_) * n2_; ++t) slab[t] = rbuf_[t] * scale;
    }

  private:
    int n1_, n2_, nc2_;
    double* rbuf_;
    fftw_complex* cbuf_;
    fftw_plan fwd_, bwd_;
};

enum class AngularMultipliers {
    spectral,  // exact k^2: geometry contract, spectral accuracy in the angles
    fd         // (2 - 2 cos k d)/d^2: matches dirichlet_fd, M-matrix solve
};

namespace detail {

// Multiplier computed through k_eff = min(j, n-j) so conjugate mode pairs get
// bitwise equal values and real fields stay exactly real.
inline std::vector<double> angular_lambda(int n, double d, AngularMultipliers am) {
    std::vector<double> lam(n);
    for (int j = 0; j < n; ++j) {
        const int k = std::min(j, n - j);
        if (am == AngularMultipliers::spectral) {
            lam[j] = static_cast<double>(k) * k;
        } else {
            lam[j] = (2 - 2 * std::cos(k * d)) / (d * d);
        }
    }
    return lam;
}

}  // namespace detail

// Solve (Id - c Lap) u = b, c > 0.  rfft2 per eta slab, tridiagonal solve in
// eta per angular mode.  Spectral multipliers give the high-accuracy inverse;
// fd multipliers make (Id - c Lap) an M-matrix so the solution obeys the
// discrete maximum principle.
inline ScalarField helmholtz_solve(const ScalarField& b, double c,
                                   AngularMultipliers am = AngularMultipliers::spectral,
                                   Fft2Workspace* ws = nullptr) {
    const TorusGrid& g = *b.g;
    if (!(c > 0)) throw config_error("helmholtz_solve needs c > 0, got " + fp(c));
    std::unique_ptr<Fft2Workspace> local;
    if (!ws) {
        local = std::make_unique<Fft2Workspace>(g.n1, g.n2);
        ws = local.get();
    }
    const int nc2 = ws->nc2();
    const long modes = static_cast<long>(g.n1) * nc2;
    std::vector<std::complex<double>> spec(g.ne * modes);
    const long s = static_cast<long>(g.n1) * g.n2;
    for (int i = 0; i < g.ne; ++i) ws->forward(b.v.data() + i * s, spec.data() + i * modes);

    const std::vector<double> lam1 = detail::angular_lambda(g.n1, g.d1, am);
    const std::vector<double> lam2 = detail::angular_lambda(g.n2, g.d2, am);
    const double h = g.rad.h;
    std::vector<double> base(g.ne), sub(g.ne - 1), sup(g.ne - 1), diag(g.ne);
    for (int i = 0; i < g.ne; ++i)
        base[i] = (g.rad.F[i] + g.rad.F[i + 1]) / (h * g.rad.m[i]);
    for (int i = 1; i < g.ne; ++i) sub[i - 1] = -c * g.rad.F[i] / (h * g.rad.m[i]);
    for (int i = 0; i < g.ne - 1; ++i) sup[i] = -c * g.rad.F[i + 1] / (h * g.rad.m[i]);

    std::vector<std::complex<double>> rhs(g.ne);
    for (int j1 = 0; j1 < g.n1; ++j1) {
        for (int j2 = 0; j2 < nc2; ++j2) {
            const double l1 = lam1[j1], l2 = lam2[j2];
            for (int i = 0; i < g.ne; ++i) {
                diag[i] = 1 + c * (base[i] + l1 / g.cos2[i] + l2 / g.sin2[i]);
                rhs[i] = spec[i * modes + j1 * nc2 + j2];
            }
            thomas_solve(sub, diag, sup, rhs);
            for (int i = 0; i < g.ne; ++i) spec[i * modes + j1 * nc2 + j2] = rhs[i];
        }
    }

    ScalarField out = make_field(g);
    for (int i = 0; i < g.ne; ++i) ws->inverse(spec.data() + i * modes, out.v.data() + i * s);
    return out;
}

// Laplacian with spectral angular multipliers (radial part stays the
// conservative stencil).  Companion of helmholtz_solve's spectral flavor.
inline ScalarField laplace_beltrami_spectral(const ScalarField& f, Fft2Workspace* ws = nullptr) {
    const TorusGrid& g = *f.g;
    std::unique_ptr<Fft2Workspace> local;
    if (!ws) {
        local = std::make_unique<Fft2Workspace>(g.n1, g.n2);
        ws = local.get();
    }
    const int nc2 = ws->nc2();
    const long modes = static_cast<long>(g.n1) * nc2;
    const long s = static_cast<long>(g.n1) * g.n2;
    const std::vector<double> lam1 = detail::angular_lambda(g.n1, g.d1, AngularMultipliers::spectral);
    const std::vector<double> lam2 = detail::angular_lambda(g.n2, g.d2, AngularMultipliers::spectral);
    std::vector<std::complex<double>> spec(modes);
    ScalarField out = make_field(g);
    for (int i = 0; i < g.ne; ++i) {
        ws->forward(f.v.data() + i * s, spec.data());
        for (int j1 = 0; j1 < g.n1; ++j1)
            for (int j2 = 0; j2 < nc2; ++j2)
                spec[j1 * nc2 + j2] *= -(lam1[j1] / g.cos2[i] + lam2[j2] / g.sin2[i]);
        ws->inverse(spec.data(), out.v.data() + i * s);
    }
    // radial conservative part
    const double h = g.rad.h;
    for (int i = 0; i < g.ne; ++i) {
        const double fm = g.rad.F[i], fp = g.rad.F[i + 1];
        const double im = 1.0 / (h * g.rad.m[i]);
        for (long jk = 0; jk < s; ++jk) {
            const long t = i * s + jk;
            double acc = 0;
            if (i + 1 < g.ne) acc += fp * (f.v[t + s] - f.v[t]);
            if (i > 0) acc -= fm * (f.v[t] - f.v[t - s]);
            out.v[t] += acc * im;
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Isometries that act as exact index permutations.
//
// An element stores the index map of g^{-1}: the value at output node
// (i, j, k) is read from src(i, j, k).  Without swap:
//   src = (i, (m1 j + o1) mod n1, (m2 k + o2) mod n2).
// With swap (the factor-exchange s: eta -> pi/2 - eta, phi1 <-> phi2):
//   src = (ne-1-i, (m1 k + o1) mod n1, (m2 j + o2) mod n2).
struct Isometry {
    bool swap = false;
    int m1 = 1, o1 = 0;
    int m2 = 1, o2 = 0;
};

namespace detail {
inline int imod(int a, int n) { return ((a % n) + n) % n; }
}

// composition g . h (h applied to the field first, i.e. (g h) f = g (h f))
inline Isometry compose(const Isometry& g, const Isometry& h) {
    Isometry r;
    r.swap = g.swap != h.swap;
    if (!h.swap) {
        r.m1 = h.m1 * g.m1;
        r.o1 = h.m1 * g.o1 + h.o1;
        r.m2 = h.m2 * g.m2;
        r.o2 = h.m2 * g.o2 + h.o2;
    } else {
        r.m1 = h.m1 * g.m2;
        r.o1 = h.m1 * g.o2 + h.o1;
        r.m2 = h.m2 * g.m1;
        r.o2 = h.m2 * g.o1 + h.o2;
    }
    return r;
}

inline Isometry inverse(const Isometry& g) {
    Isometry r;
    r.swap = g.swap;
    if (!g.swap) {
        r.m1 = g.m1;
        r.o1 = -g.m1 * g.o1;
        r.m2 = g.m2;
        r.o2 = -g.m2 * g.o2;
    } else {
        r.m1 = g.m2;
        r.o1 = -g.m2 * g.o2;
        r.m2 = g.m1;
        r.o2 = -g.m1 * g.o1;
    }
    return r;
}

inline Isometry normalized(const Isometry& g, int n1, int n2) {
    Isometry r = g;
    r.o1 = detail::imod(r.o1, n1);
    r.o2 = detail::imod(r.o2, n2);
    return r;
}

// rotation of the (x1, x2) plane by t grid steps: phi1 -> phi1 + t d1
inline Isometry rho_steps(int t) { return {false, 1, -t, 1, 0}; }
// rotation of the (x3, x4) plane
inline Isometry tau_steps(int t) { return {false, 1, 0, 1, -t}; }
// s: (x1, x2) <-> (x3, x4); needs n1 == n2, checked at apply time
inline Isometry swap_s() { return {true, 1, 0, 1, 0}; }
// reflections in phi1: fix x1 (phi -> -phi), fix x2 (phi -> pi - phi),
// fix the diagonal x1 = x2 (phi -> pi/2 - phi, needs n1 % 4 == 0)
inline Isometry reflect1_x1() { return {false, -1, -1, 1, 0}; }
inline Isometry reflect1_x2(int n1) { return {false, -1, n1 / 2 - 1, 1, 0}; }
inline Isometry reflect1_diag(int n1) { return {false, -1, n1 / 4 - 1, 1, 0}; }
inline Isometry reflect2_x3() { return {false, 1, 0, -1, -1}; }
inline Isometry reflect2_x4(int n2) { return {false, 1, 0, -1, n2 / 2 - 1}; }
inline Isometry reflect2_diag(int n2) { return {false, 1, 0, -1, n2 / 4 - 1}; }

inline ScalarField apply_isometry(const Isometry& iso, const ScalarField& f) {
    const TorusGrid& g = *f.g;
    if (iso.swap && g.n1 != g.n2)
        throw config_error("factor-exchange isometry needs n_phi1 == n_phi2");
    ScalarField out = make_field(g);
    std::vector<int> map1(iso.swap ? g.n2 : g.n1), map2(iso.swap ? g.n1 : g.n2);
    // map1[t] = source phi1 index when the driving output index is t
    for (size_t t = 0; t < map1.size(); ++t)
        map1[t] = detail::imod(iso.m1 * static_cast<int>(t) + iso.o1, g.n1);
    for (size_t t = 0; t < map2.size(); ++t)
        map2[t] = detail::imod(iso.m2 * static_cast<int>(t) + iso.o2, g.n2);
    for (int i = 0; i < g.ne; ++i) {
        const int si = iso.swap ? g.ne - 1 - i : i;
        for (int j = 0; j < g.n1; ++j) {
            for (int k = 0; k < g.n2; ++k) {
                const int sj = iso.swap ? map1[k] : map1[j];
                const int sk = iso.swap ? map2[j] : map2[k];
                out.v[g.idx(i, j, k)] = f.v[g.idx(si, sj, sk)];
            }
        }
    }
    return out;
}

// Forward point map of the isometry as a 4x4 matrix on ambient coordinates
// (row-major).  Used to transport fitted equator normals and in equivariance
// checks.
inline std::array<double, 16> matrix4(const Isometry& iso, const TorusGrid& g) {
    // stored maps are those of g^{-1}; invert to angle maps of g itself
    const Isometry gi = inverse(iso);
    // angle map of (g)^{-1}... see src semantics: for the inverse element,
    // phi -> m phi + beta with beta = d (o + (1 - m)/2)
    auto block = [](int m, double beta) {
        // matrix of phi -> m phi + beta acting on (cos phi, sin phi)
        std::array<double, 4> b{};
        const double cb = std::cos(beta), sb = std::sin(beta);
        b[0] = cb;
        b[1] = -m * sb;
        b[2] = sb;
        b[3] = m * cb;
        return b;
    };
    const double b1 = g.d1 * (gi.o1 + (1 - gi.m1) * 0.5);
    const double b2 = g.d2 * (gi.o2 + (1 - gi.m2) * 0.5);
    const auto B1 = block(gi.m1, b1);
    const auto B2 = block(gi.m2, b2);
    std::array<double, 16> M{};
    auto put = [&M](int r0, int c0, const std::array<double, 4>& B) {
        M[4 * r0 + c0] = B[0];
        M[4 * r0 + c0 + 1] = B[1];
        M[4 * (r0 + 1) + c0] = B[2];
        M[4 * (r0 + 1) + c0 + 1] = B[3];
    };
    if (!iso.swap) {
        // g: phi1 -> alpha1^{-1}(phi1): the angle map of g on block 1 is the
        // inverse of gi's, which is again of the stored form for element gi
        put(0, 0, B1);
        put(2, 2, B2);
    } else {
        // g sends block (x3,x4) angle through alpha1^{-1} into block (x1,x2)
        put(0, 2, B1);
        put(2, 0, B2);
    }
    return M;
}

inline std::array<double, 4> apply_matrix4(const std::array<double, 16>& M,
                                           const std::array<double, 4>& x) {
    std::array<double, 4> y{};
    for (int r = 0; r < 4; ++r)
        y[r] = M[4 * r] * x[0] + M[4 * r + 1] * x[1] + M[4 * r + 2] * x[2] + M[4 * r + 3] * x[3];
    return y;
}

// Signed symmetry operation: f -> (+/-) f . g
struct SymOp {
    Isometry iso;
    bool negate = false;
};

inline ScalarField apply_symop(const SymOp& op, const ScalarField& f) {
    ScalarField out = apply_isometry(op.iso, f);
    if (op.negate)
        for (double& x : out.v) x = -x;
    return out;
}

// Chain of pairwise averages f -> (f + op f)/2.  Each level output is exactly
// invariant under its op (IEEE addition is commutative), so a field run
// through the chain is a bitwise fixed point of the chain.
struct Symmetrizer {
    std::vector<SymOp> levels;

    void apply(ScalarField& f) const {
        for (const SymOp& op : levels) {
            ScalarField t = apply_symop(op, f);
            for (long x = 0; x < static_cast<long>(f.v.size()); ++x)
                f.v[x] = 0.5 * (f.v[x] + t.v[x]);
        }
    }
};

// Stabilizer of the arc directions: reflections fixing x1 = x2 and x3 = x4.
inline Symmetrizer make_arc_symmetrizer(const TorusGrid& g) {
    return {{{reflect1_diag(g.n1), false}, {reflect2_diag(g.n2), false}}};
}

// Adds nu = (negate . s), which pins the full q-direction orbit: the escape
// mode of the terminal ground state is nu-odd, so round-off cannot seed it.
inline Symmetrizer make_q_symmetrizer(const TorusGrid& g) {
    return {{{reflect1_diag(g.n1), false},
             {reflect2_diag(g.n2), false},
             {swap_s(), true}}};
}

// Conjugate every level by rho(t1) tau(t2): the stabilizer of a rotated
// initial direction.
inline Symmetrizer conjugate(const Symmetrizer& sym, int t1, int t2) {
    const Isometry r = compose(rho_steps(t1), tau_steps(t2));
    const Isometry ri = inverse(r);
    Symmetrizer out;
    for (const SymOp& op : sym.levels) out.levels.push_back({compose(r, compose(op.iso, ri)), op.negate});
    return out;
}

}  // namespace acs3
