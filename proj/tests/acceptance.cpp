// Acceptance harness: twelve numbered end-to-end checks over the whole
// pipeline, one PASS/FAIL line each, every tolerance pinned in place.
// Exit code 0 only if all twelve pass.

#include <chrono>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>

#include "acs3/experiments.hpp"

using namespace acs3;
namespace fs = std::filesystem;

namespace {

int failures = 0;

void criterion(int num, const std::string& name, const std::function<std::string()>& body) {
    const auto t0 = std::chrono::steady_clock::now();
    bool pass = true;
    std::string detail;
    try {
        detail = body();
    } catch (const std::exception& e) {
        pass = false;
        detail = e.what();
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (!pass) ++failures;
    std::printf("C%-3d %-44s %s  [%5.1fs]  %s\n", num, name.c_str(), pass ? "PASS" : "FAIL",
                secs, detail.c_str());
    std::fflush(stdout);
}

// throws with a pinned message so the criterion line carries the numbers
void check(bool ok, const std::string& what) {
    if (!ok) throw numerical_error(what);
}

std::string g3(double x) { return fmt("%.3g", x); }

std::string file_bytes(const fs::path& p) {
    std::ifstream f(p, std::ios::binary);
    check(f.good(), "cannot read " + p.string());
    std::ostringstream os;
    os << f.rdbuf();
    return os.str();
}

fs::path scratch(const std::string& leaf) {
    fs::path d = fs::temp_directory_path() / ("acs3_accept_" + leaf);
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
}

double ray_defect(int n) {
    TorusGrid g = build_grid(n, n, n);
    ScalarField x1 = coordinate_field(g, 0);
    return std::abs(inner(x1, laplace_beltrami_spectral(x1)) / inner(x1, x1) + 3.0);
}

}  // namespace

int main() {
    DoubleWell well = standard_well();
    const double sig = sigma(well);

    criterion(1, "volume and first Laplacian eigenvalue", [&] {
        TorusGrid g64 = build_grid(64, 64, 64);
        const double vol = std::abs(integrate(make_field(g64, 1.0)) - 2 * kPi * kPi);
        check(vol < 1e-5, "volume defect " + g3(vol) + " >= 1e-5");
        const double e32 = ray_defect(32), e64 = ray_defect(64);
        check(e64 < 1e-3, "eigenvalue defect " + g3(e64) + " >= 1e-3 at 64^3");
        const double order = std::log2(e32 / e64);
        check(order >= 1.9, "convergence order " + g3(order) + " < 1.9");
        return "vol defect " + g3(vol) + "; eigen defect " + g3(e64) + "; order " + g3(order);
    });

    criterion(2, "layer constant and heteroclinic residuals", [&] {
        // sigma here is the full [-1,1] integral of sqrt(2W); its half is the
        // classical sqrt(2)/3 for the quartic well
        const double sdef = std::abs(sig / 2 - std::sqrt(2.0) / 3);
        check(sdef < 1e-10, "sigma defect " + g3(sdef) + " >= 1e-10");
        // residuals of the profile equation H'' = W'(H) and of equipartition
        // H'^2/2 = W(H), derivatives taken by 6th-order central differences
        const double d = 0.02;
        double res = 0, eq = 0;
        for (double t = -4; t <= 4; t += 0.1) {
            auto H = [&](double s) { return heteroclinic(well, 1.0, s); };
            const double h3m = H(t - 3 * d), h2m = H(t - 2 * d), h1m = H(t - d), h0 = H(t),
                         h1p = H(t + d), h2p = H(t + 2 * d), h3p = H(t + 3 * d);
            const double dd = (2 * (h3m + h3p) - 27 * (h2m + h2p) + 270 * (h1m + h1p) -
                               490 * h0) / (180 * d * d);
            const double dp = (-h3m / 60 + 3 * h2m / 20 - 3 * h1m / 4 + 3 * h1p / 4 -
                               3 * h2p / 20 + h3p / 60) / d;
            res = std::max(res, std::abs(dd - well.wp(h0)));
            eq = std::max(eq, std::abs(0.5 * dp * dp - well.w(h0)));
        }
        check(res < 1e-10, "profile residual " + g3(res) + " >= 1e-10");
        check(eq < 1e-10, "equipartition defect " + g3(eq) + " >= 1e-10");
        return "sigma defect " + g3(sdef) + "; pde " + g3(res) + "; equipartition " + g3(eq);
    });

    criterion(3, "stationary energies approach the area levels", [&] {
        // eps 0.1 within 5%, eps 0.05 within 2.5%, defect decreasing in eps
        double tdef[2], gdef[2];
        const double epss[2] = {0.1, 0.05}, tols[2] = {0.05, 0.025};
        for (int q = 0; q < 2; ++q) {
            RadialProfile tor = solve_torus_symmetric(512, epss[q], well);
            RadialProfile gnd = solve_ground_state(512, epss[q], well);
            tdef[q] = std::abs(tor.energy / (sig * 2 * kPi * kPi) - 1);
            gdef[q] = std::abs(gnd.energy / (sig * 4 * kPi) - 1);
            check(tdef[q] < tols[q], "torus defect " + g3(tdef[q]) + " >= " + g3(tols[q]) +
                                         " at eps " + g3(epss[q]));
            check(gdef[q] < tols[q], "ground defect " + g3(gdef[q]) + " >= " + g3(tols[q]) +
                                         " at eps " + g3(epss[q]));
        }
        check(tdef[1] < tdef[0] && gdef[1] < gdef[0], "defect not decreasing in eps");
        return "torus defects " + g3(tdef[0]) + " -> " + g3(tdef[1]) + "; ground " +
               g3(gdef[0]) + " -> " + g3(gdef[1]);
    });

    criterion(4, "Morse indices 5 / 1 / 0 with paired negatives", [&] {
        RadialProfile tor = solve_torus_symmetric(512, 0.05, well);
        const int mi_tor = morse_index(tor, well, 3).morse_index;
        check(mi_tor == 5, "torus index " + std::to_string(mi_tor) + " != 5");
        const double l10 = mode_spectrum(tor, well, 1, 0, 0).lambda[0];
        const double l01 = mode_spectrum(tor, well, 0, 1, 0).lambda[0];
        const double split = std::abs(l10 - l01);
        check(split < 1e-8, "negative pair split " + g3(split) + " >= 1e-8");
        RadialProfile gnd = solve_ground_state(512, 0.05, well);
        const int mi_gnd = morse_index(gnd, well, 3).morse_index;
        check(mi_gnd == 1, "ground index " + std::to_string(mi_gnd) + " != 1");
        RadialProfile c;
        c.coord = RadialCoord::eta;
        c.eps = 0.05;
        c.grid = torus_grid1d(256);
        c.u.assign(256, 1.0);
        const int mi_c = morse_index(c, well, 3).morse_index;
        check(mi_c == 0, "constant index " + std::to_string(mi_c) + " != 0");
        const double gap = mode_spectrum(c, well, 0, 0, 0).lambda[0];
        const double gdef = std::abs(gap / (2.0 / (0.05 * 0.05)) - 1);
        check(gdef < 1e-10, "constant gap defect " + g3(gdef) + " >= 1e-10");
        return "indices 5/1/0; pair split " + g3(split) + "; gap defect " + g3(gdef);
    });

    criterion(5, "unstable basis equivariance at all lattice angles", [&] {
        TorusGrid g = build_grid(32, 32, 32);
        RadialProfile p = solve_torus_symmetric(32, 0.1, well);
        UnstableBasis basis = unstable_basis(p, well, g, 3);
        ScalarField s2 = apply_isometry(swap_s(), basis.phi[1]);
        ScalarField s3 = apply_isometry(swap_s(), basis.phi[2]);
        const size_t bytes = sizeof(double) * s2.v.size();
        check(std::memcmp(s2.v.data(), basis.phi[3].v.data(), bytes) == 0,
              "phi4 is not the exact swap of phi2");
        check(std::memcmp(s3.v.data(), basis.phi[4].v.data(), bytes) == 0,
              "phi5 is not the exact swap of phi3");
        double worst = 0;
        for (int t = 0; t < g.n1; ++t) {
            const double th = t * g.d1;
            ScalarField rot = apply_isometry(rho_steps(t), basis.phi[1]);
            for (long q = 0; q < g.size(); ++q) {
                const double want =
                    std::cos(th) * basis.phi[1].v[q] + std::sin(th) * basis.phi[2].v[q];
                worst = std::max(worst, std::abs(rot.v[q] - want));
            }
        }
        for (int t = 0; t < g.n2; ++t) {
            const double th = t * g.d2;
            ScalarField rot = apply_isometry(tau_steps(t), basis.phi[3]);
            for (long q = 0; q < g.size(); ++q) {
                const double want =
                    std::cos(th) * basis.phi[3].v[q] + std::sin(th) * basis.phi[4].v[q];
                worst = std::max(worst, std::abs(rot.v[q] - want));
            }
        }
        check(worst < 1e-10, "rotation relation defect " + g3(worst) + " >= 1e-10");
        return "swap copies bit-exact; rotation defect " + g3(worst) + " over 64 angles";
    });

    criterion(6, "flow integrity: decrease, bounds, dissipation", [&] {
        Config cfg;  // 64^3, eps 0.05, convex splitting, dt = 0.1 eps^2
        RunSetup setup = make_run_setup(cfg);
        ScalarField lift = lift_profile(setup.prof, setup.grid);
        const double amp = 0.25 * 0.1 * norm(lift);
        const std::array<double, 5> a = {0, 0.5 * amp, 0.5 * amp, -0.5 * amp, -0.5 * amp};
        Fft2Workspace ws(setup.grid.n1, setup.grid.n2);
        SingleRunResult ra = run_single(setup, a, nullptr, 2.0, 0, nullptr, &ws, false);
        for (size_t q = 1; q < ra.rows.size(); ++q)
            check(ra.rows[q].energy < ra.rows[q - 1].energy,
                  "energy not strictly decreasing at step " + std::to_string(q));
        double mx = 0, diss = 0;
        for (const EnergyRow& r : ra.rows) mx = std::max(mx, r.max_abs_u);
        check(mx < 1.0, "max |u| = " + fp(mx) + " >= 1");
        for (size_t q = 1; q < ra.rows.size(); ++q) diss += ra.rows[q].dissipation * setup.dt;
        const double drop = ra.rows.front().energy - ra.rows.back().energy;
        const double ddef = std::abs(diss - drop) / drop;
        check(ddef < 1e-3, "dissipation identity defect " + g3(ddef) + " >= 1e-3");
        RunSetup half = setup;
        half.dt /= 2;
        half.params.dt /= 2;
        // compare the halved-dt run at t = 1, while the orbit still hugs the saddle:
        // past the exit the two time grids separate exponentially, and a fixed-horizon
        // energy difference measures trajectory divergence rather than truncation error
        SingleRunResult rb = run_single(half, a, nullptr, 1.0, 0, nullptr, &ws, false);
        size_t ia = 0;
        while (ia + 1 < ra.rows.size() && ra.rows[ia].time < 1.0 - setup.dt / 2) ++ia;
        const double hdef =
            std::abs(ra.rows[ia].energy - rb.rows.back().energy) / ra.rows[ia].energy;
        check(hdef < 1e-3, "dt-halving defect " + g3(hdef) + " >= 1e-3 at t=1");
        return "max|u| " + fmt("%.12f", mx) + "; dissipation defect " + g3(ddef) +
               "; dt-halving defect " + g3(hdef) + " at t=1";
    });

    criterion(7, "symmetric orbit connects torus to sphere", [&] {
        const fs::path out = scratch("c7");
        Config cfg;  // 64^3, eps 0.05, direction q, t_end 6
        cfg.set("symmetrize", "qstab");
        cfg.set("out", out.string());
        check(cmd_flow(cfg) == 0, "flow command failed");
        std::ifstream jf(out / "diagnostics.jsonl");
        std::string line, first, last;
        while (std::getline(jf, line))
            if (!line.empty()) {
                if (first.empty()) first = line;
                last = line;
            }
        const auto j0 = nlohmann::json::parse(first), j1 = nlohmann::json::parse(last);
        check(j0["phase"] == "torus", "initial phase " + j0["phase"].get<std::string>());
        check(j1["phase"] == "sphere", "terminal phase " + j1["phase"].get<std::string>());
        std::ifstream sf(out / "summary.json");
        const auto s = nlohmann::json::parse(sf);
        const double area = s["final"]["area_proxy"].get<double>();
        const double adef = std::abs(area / (4 * kPi) - 1);
        check(adef < 0.02, "terminal area defect " + g3(adef) + " >= 0.02");
        const auto yv = s["final"]["fit"]["y"].get<std::array<double, 4>>();
        const std::array<std::array<double, 4>, 4> family = {{{0.5, 0.5, 0.5, 0.5},
                                                              {-0.5, -0.5, -0.5, -0.5},
                                                              {0.5, 0.5, -0.5, -0.5},
                                                              {-0.5, -0.5, 0.5, 0.5}}};
        double best = 1e300;
        for (const auto& cand : family) {
            double dev = 0;
            for (int c = 0; c < 4; ++c) dev = std::max(dev, std::abs(yv[c] - cand[c]));
            best = std::min(best, dev);
        }
        check(best < 0.05, "axis deviation " + g3(best) + " >= 0.05");
        check(!s["t_cross_5pi"].is_null(), "no unique crossing of the middle level");
        return "area defect " + g3(adef) + "; axis dev " + g3(best) + "; level crossing at t=" +
               g3(s["t_cross_5pi"].get<double>());
    });

    criterion(8, "radial-direction runs end at the constants", [&] {
        Config cfg;
        cfg.set("n_eta", "48");
        cfg.set("n_phi1", "48");
        cfg.set("n_phi2", "48");
        RunSetup setup = make_run_setup(cfg);
        ScalarField lift = lift_profile(setup.prof, setup.grid);
        const double amp = 0.25 * 0.1 * norm(lift);
        Fft2Workspace ws(setup.grid.n1, setup.grid.n2);
        Phase ph[2];
        double en[2];
        for (int sgn = 0; sgn < 2; ++sgn) {
            const std::array<double, 5> a = {sgn ? -amp : amp, 0, 0, 0, 0};
            SingleRunResult r = run_single(setup, a, nullptr, 6.0, 0, nullptr, &ws, false);
            ph[sgn] = r.final_report.phase;
            en[sgn] = r.rows.back().energy;
            check(ph[sgn] == Phase::constant_plus || ph[sgn] == Phase::constant_minus,
                  std::string("terminal phase ") + phase_name(ph[sgn]) + " is not constant");
            check(en[sgn] < 1e-6, "terminal energy " + g3(en[sgn]) + " >= 1e-6");
        }
        check(ph[0] != ph[1], "both signs reached the same constant");
        return std::string("+r -> ") + phase_name(ph[0]) + " (E " + g3(en[0]) + "), -r -> " +
               phase_name(ph[1]) + " (E " + g3(en[1]) + ")";
    });

    criterion(9, "threshold bracket and ground plateau", [&] {
        const fs::path out = scratch("c9");
        Config cfg;
        cfg.set("n_eta", "40");
        cfg.set("n_phi1", "40");
        cfg.set("n_phi2", "40");
        cfg.set("eps", "0.08");
        cfg.set("out", out.string());
        check(cmd_sweep(cfg) == 0, "sweep command failed");
        std::ifstream sf(out / "sweep_summary.json");
        const auto s = nlohmann::json::parse(sf);
        const double width = s["bracket_width"].get<double>();
        check(width < 1e-6, "bracket width " + g3(width) + " >= 1e-6");
        check(s["monotone"].get<bool>(), "terminal signs not monotone along the arc");
        const double dur = s["center_plateau"]["duration"].get<double>();
        const double need = s["center_plateau"]["required"].get<double>();
        check(dur >= need, "plateau " + g3(dur) + " < required " + g3(need));
        return "bracket width " + g3(width) + "; plateau " + g3(dur) + " >= " + g3(need);
    });

    criterion(10, "terminal spheres rotate with the direction", [&] {
        const fs::path out = scratch("c10");
        Config cfg;
        cfg.set("n_eta", "32");
        cfg.set("n_phi1", "32");
        cfg.set("n_phi2", "32");
        cfg.set("eps", "0.1");
        cfg.set("out", out.string());
        check(cmd_orbit(cfg) == 0, "orbit command failed");
        std::ifstream sf(out / "orbit_summary.json");
        const auto s = nlohmann::json::parse(sf);
        check(s["all_sphere"].get<bool>(), "not every cell ended on a sphere");
        const double rot = s["max_dev_rotation"].get<double>();
        const double odd = s["max_dev_oddness"].get<double>();
        check(rot <= 0.05, "rotation deviation " + g3(rot) + " > 0.05");
        check(odd <= 0.05, "oddness deviation " + g3(odd) + " > 0.05");
        return "64 cells all sphere; rotation dev " + g3(rot) + "; oddness dev " + g3(odd);
    });

    criterion(11, "finite-dimensional model heteroclinics", [&] {
        ToyReport rep = toy_run(1e-3, 25.0, 12345);
        for (int q = 0; q < 4; ++q)
            check(rep.hess[q].index == q, "critical point " + std::to_string(q) +
                                              " has index " + std::to_string(rep.hess[q].index));
        check(rep.meridian_residual < 1e-12,
              "meridian residual " + g3(rep.meridian_residual) + " >= 1e-12");
        check(rep.saddle_to_saddle_dist < 1e-6,
              "saddle-to-saddle endpoint error " + g3(rep.saddle_to_saddle_dist) + " >= 1e-6");
        check(rep.generic_to_min_dist < 1e-6,
              "descent endpoint error " + g3(rep.generic_to_min_dist) + " >= 1e-6");
        return "indices 0/1/2/3; endpoint errors " + g3(rep.saddle_to_saddle_dist) + ", " +
               g3(rep.generic_to_min_dist);
    });

    criterion(12, "byte-identical reruns and snapshot round-trip", [&] {
        Config cfg;
        cfg.set("n_eta", "32");
        cfg.set("n_phi1", "32");
        cfg.set("n_phi2", "32");
        cfg.set("eps", "0.1");
        cfg.set("t_end", "0.05");
        const fs::path a = scratch("c12a"), b = scratch("c12b");
        cfg.set("out", a.string());
        check(cmd_flow(cfg) == 0, "first run failed");
        cfg.set("out", b.string());
        check(cmd_flow(cfg) == 0, "second run failed");
        check(file_bytes(a / "energy.csv") == file_bytes(b / "energy.csv"),
              "energy.csv differs between identical runs");
        check(file_bytes(a / "snap_final.bin") == file_bytes(b / "snap_final.bin"),
              "snap_final.bin differs between identical runs");
        Snapshot s = read_snapshot(a / "snap_final.bin");
        TorusGrid g = build_grid(s.ne, s.n1, s.n2);
        ScalarField f = make_field(g);
        f.v = s.data;
        write_snapshot(a / "copy.bin", f, s.eps, s.time);
        check(file_bytes(a / "snap_final.bin") == file_bytes(a / "copy.bin"),
              "snapshot round-trip is not byte-exact");
        return "energy.csv and snapshots byte-identical; round-trip exact";
    });

    std::printf("%d/12 criteria passed\n", 12 - failures);
    return failures ? 1 : 0;
}
