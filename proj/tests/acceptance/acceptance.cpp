// Ten acceptance criteria, one PASS/FAIL line each; the exit code is nonzero when any criterion fails.
#include <algorithm>
#include <chrono>
#include <cstdarg>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "fgrlab/core.hpp"
#include "fgrlab/discrete_operator.hpp"
#include "fgrlab/dynamics.hpp"
#include "fgrlab/fgr.hpp"
#include "fgrlab/jost.hpp"
#include "fgrlab/p3_oracle.hpp"
#include "fgrlab/refined_profile.hpp"

using namespace fgrlab;

namespace {

struct Checker {
    bool ok = true;
    void check(bool cond, const char* fmt, ...) __attribute__((format(printf, 3, 4)));
};

void Checker::check(bool cond, const char* fmt, ...) {
    char buf[512];
    va_list ap;
    va_start(ap, fmt);
    std::vsnprintf(buf, sizeof buf, fmt, ap);
    va_end(ap);
    std::printf("    [%s] %s\n", cond ? "ok" : "FAIL", buf);
    ok = ok && cond;
}

const Grid& base_grid() {
    static const Grid g = Grid::make(50.0, 0.005);
    return g;
}

double closed_form_error(const JostSolution& s, std::array<cplx, 2> (*exact)(double, cplx), cplx k) {
    double e = 0;
    for (std::size_t i = 0; i < s.size(); ++i) {
        const double x = s.x[i];
        if (x < -10.0 - 1e-9 || x > 10.0 + 1e-9) continue;
        const auto ex = exact(x, k);
        const auto v = s.value(i);
        const double sc = std::max({1.0, std::abs(ex[0]), std::abs(ex[1])});
        e = std::max(e, std::max(std::abs(v[0] - ex[0]), std::abs(v[1] - ex[1])) / sc);
    }
    return e;
}

bool criterion1(Checker& c) {
    JostOptions o;
    o.x_min = -10.0;
    for (double kr : {0.5, 1.0, std::sqrt(2.0), 2.0}) {
        const cplx k = kr;
        const JostSolution f3 = jost_f3(3.0, k, base_grid(), o);
        const JostSolution f1 = jost_f1(3.0, k, base_grid(), o, f3);
        const JostSolution f4 = jost_f4(3.0, k, base_grid(), o);
        const double e1 = closed_form_error(f1, p3_f1, k), e3 = closed_form_error(f3, p3_f3, k),
                     e4 = closed_form_error(f4, p3_f4, k);
        c.check(e1 <= 1e-6, "k=%.4f f1 sup error %.3e", kr, e1);
        c.check(e3 <= 1e-6, "k=%.4f f3 sup error %.3e", kr, e3);
        c.check(e4 <= 1e-6, "k=%.4f f4 sup error %.3e", kr, e4);
    }
    return c.ok;
}

bool criterion2(Checker& c) {
    JostOptions o;
    o.x_min = 0.0;
    for (double kr : {0.3, 1.0, 2.0}) {
        const ScatteringData sd = scattering_matrix(3.0, kr, base_grid(), o);
        const cplx ex = p3_det_d(kr);
        const double rel = std::abs(sd.det - ex) / std::abs(ex);
        const double off = std::max(std::abs(sd.D[1]), std::abs(sd.D[2]));
        c.check(rel <= 1e-6, "k=%.1f det D relative error %.3e", kr, rel);
        c.check(off <= 1e-8, "k=%.1f max |off-diagonal| %.3e", kr, off);
    }
    return c.ok;
}

bool criterion3(Checker& c) {
    for (double p : {3.5, 4.0, 4.5}) {
        // at p = 3.5 the mode decays like e^{-0.066|x|}; the lattice needs L = 200
        const Grid g = p < 3.75 ? Grid::make(200.0, 0.005) : base_grid();
        const double lg = internal_mode(p, g).lambda;
        const ImaginaryRoot r = eigen_root_imaginary_axis(p, base_grid());
        const double d = std::abs(lg - r.lambda);
        c.check(d <= 1e-6, "p=%.1f lattice %.12f  Jost 1-beta^2 %.12f  diff %.2e", p, lg, r.lambda, d);
        if (p == 4.0) c.check(lg > std::sqrt(3.0) / 2, "lambda(4) = %.10f > sqrt3/2", lg);
    }
    return c.ok;
}

bool criterion4(Checker& c) {
    const Grid& g = base_grid();
    const double p2 = threshold_p(2, g), p3 = threshold_p(3, g), p4 = threshold_p(4, g);
    c.check(4 < p2 && p2 < p3 && p3 < p4 && p4 < 5, "p2 = %.10f  p3 = %.10f  p4 = %.10f", p2, p3, p4);
    const double ps[3] = {p2, p3, p4};
    for (int n = 2; n <= 4; ++n) {
        const double d = std::abs(internal_mode(ps[n - 2], g).lambda - 1.0 / n);
        c.check(d <= 1e-8, "|lambda(p_%d) - 1/%d| = %.2e", n, n, d);
    }
    const MonotonicityAudit a = audit_monotonicity_jost(3.1, 4.9, 50, g);
    c.check(a.strictly_decreasing, "50-point audit on [3.1, 4.9]: lambda from %.9f down to %.9f", a.lambda.front(),
            a.lambda.back());
    // lattice cross-check where the mode fits the box
    double worst = 0;
    int n = 0;
    for (std::size_t i = 0; i < a.p.size(); ++i) {
        if (std::sqrt(1.0 - a.lambda[i]) * g.L < 25.0) continue;
        worst = std::max(worst, std::abs(internal_mode(a.p[i], g).lambda - a.lambda[i]));
        ++n;
    }
    c.check(worst <= 1e-6, "lattice agrees on %d audit points, max diff %.2e", n, worst);
    return c.ok;
}

bool criterion5(Checker& c) {
    const double pi = M_PI;
    const double a11 = sech_cos_integral(1.0, 1);
    c.check(std::abs(a11 - pi / std::cosh(pi / 2)) <= 1e-10, "A_{1,1} error %.2e", std::abs(a11 - pi / std::cosh(pi / 2)));
    for (double a : {std::sqrt(2.0) - 1, std::sqrt(2.0) + 1}) {
        const double d = std::abs(sech_cos_integral(a, 3) - (1 + a * a) / 2 * sech_cos_integral(a, 1));
        c.check(d <= 1e-10, "A_{a,3} recurrence a=%.6f error %.2e", a, d);
    }
    const double l1 = laplace_cos_cosh(1);
    c.check(std::abs(l1 - 0.2) <= 1e-12, "int_0^inf cos(x) e^{-2x} cosh(x) dx = %.15f against 1/5", l1);
    std::printf("    note: the integral equals 2/5 (error %.2e); the 1/5 value is not attainable\n", std::abs(l1 - 0.4));
    const AlternatingSeries s = alternating_series_check(10000);
    c.check(s.exceeds_bound, "alternating sum %.15f exceeds %.15f", s.accelerated, s.lower_bound);
    return c.ok;
}

bool criterion6(Checker& c) {
    const double v = im_gamma1_closed();
    c.check(std::abs(v + 0.203) <= 0.002, "(1/8b) Im Gamma_1(3) = %.10f", v);
    const double q = im_gamma1_ab();
    c.check(std::abs(q - v) <= 1e-9, "A/B expansion by quadrature %.12f", q);
    return c.ok;
}

bool criterion7(Checker& c) {
    const Grid& g = base_grid();
    const double p2 = threshold_p(2, g), p3 = threshold_p(3, g), p4 = threshold_p(4, g);
    const std::vector<double> radii{1e-1, 3e-2, 1e-2, 3e-3};
    const double m3 = 0.5 * (p2 + p3), m4 = 0.5 * (p3 + p4);
    const double s3 = residual_slope(build_refined_profile(m3, g, 3), radii);
    c.check(s3 >= 3.6 && s3 <= 4.4, "n=3 p=%.6f slope %.4f in [3.6, 4.4]", m3, s3);
    const double s4 = residual_slope(build_refined_profile(m4, g, 4), radii);
    c.check(s4 >= m4 - 0.4 && s4 <= m4 + 0.4, "n=4 p=%.6f slope %.4f in [%.4f, %.4f]", m4, s4, m4 - 0.4, m4 + 0.4);
    return c.ok;
}

bool criterion8(Checker& c) {
    const Grid& g = base_grid();
    const GammaSweep sw = sweep_gamma(3, 50, g);
    double worst = 0;
    int failed = 0;
    for (const auto& r : sw.rows) {
        if (!r.ok) ++failed;
        else worst = std::max(worst, r.g_residual);
    }
    c.check(failed == 0 && sw.rows.size() == 50, "50-point sweep on (%.8f, %.8f): %d failed rows", sw.p_lo, sw.p_hi, failed);
    c.check(worst <= 1e-6, "max g residual %.2e", worst);
    // the perp mismatch is O(h^4) times the removed modal weight, so it is checked on a finer lattice
    const Grid fine = Grid::make(50.0, 0.00125);
    for (double p : {4.85, 4.90, 4.92}) {
        const FgrPoint pt = gamma_n(p, 3, fine);
        c.check(pt.perp_mismatch <= 1e-6, "p=%.2f h=0.00125 gamma %.12f gamma_perp %.12f rel %.2e", p, pt.gamma,
                pt.gamma_perp, pt.perp_mismatch);
    }
    std::string zs;
    for (double z : sw.zeros) zs += " " + std::to_string(z);
    std::printf("    zero candidates:%s\n", zs.empty() ? " none" : zs.c_str());
    for (double s : {0.5, 2.0}) {
        const GammaSweep sc = sweep_gamma(3, 50, g, s);
        bool same = sc.zeros.size() == sw.zeros.size();
        for (std::size_t i = 0; same && i < sw.zeros.size(); ++i) same = std::abs(sc.zeros[i] - sw.zeros[i]) <= 1e-12;
        c.check(same, "zero list unchanged under g -> %.1f g (%zu zeros)", s, sc.zeros.size());
    }
    return c.ok;
}

bool criterion9(Checker& c) {
    const Grid& g = base_grid();
    const ResonanceSweep sw = resonance_sweep(3.2, 4.9, 200, g);
    int failed = 0;
    for (const auto& r : sw.rows) failed += r.ok ? 0 : 1;
    c.check(failed == 0 && sw.rows.size() == 200, "200-point sweep on [3.2, 4.9]: %d failed rows, min |det D| %.3e, %zu flagged",
            failed, sw.min_modulus, sw.flagged_p.size());
    // p = 3 lies outside the sweep; it is checked on its own
    const ResonanceSweep near = resonance_sweep(2.9, 3.1, 5, g);
    bool flagged3 = false, others = false;
    for (const auto& r : near.rows) {
        if (std::abs(r.p - 3.0) < 1e-12) flagged3 = r.flag;
        else others = others || r.flag;
    }
    c.check(flagged3 && !others, "sweep over [2.9, 3.1] flags p = 3 and only p = 3");
    JostOptions o;
    o.x_min = 0.0;
    const double d0 = std::abs(scattering_matrix(3.0, 0.0, g, o).det);
    const double r1 = std::abs(scattering_matrix(3.0, 1e-3, g, o).det) / 1e-3;
    const double r2 = std::abs(scattering_matrix(3.0, 1e-4, g, o).det) / 1e-4;
    c.check(d0 < 1e-8, "|det D(3, 0)| = %.2e", d0);
    c.check(r1 > 1e-3 && std::abs(r1 - r2) < 1e-3 * r1, "|det D(3, k)|/k = %.8f (k=1e-3), %.8f (k=1e-4): simple root", r1, r2);
    return c.ok;
}

bool criterion10(Checker& c) {
    const PeriodicGrid g = PeriodicGrid::make(80.0, 0.05);
    for (double p : {3.0, 4.3}) {
        const double e = soliton_orbit_error(p, g, 1e-3, 10.0);
        c.check(e <= 1e-5, "p=%.1f orbit error at t=10, dt=1e-3: %.3e", p, e);
    }
    {
        ComplexField u0(g.N);
        for (std::size_t j = 0; j < g.N; ++j) {
            const double x = g.x(j);
            u0[j] = 1.1 * soliton_value(4.3, 1.0, x) * std::exp(cplx(0, 0.2 / (1 + x * x)));
        }
        const EvolveResult r = evolve(4.3, u0, g, 1e-3, 10.0, {}, 100);
        double d = 0;
        for (double q : r.mass) d = std::max(d, std::abs(q - r.mass[0]) / r.mass[0]);
        c.check(d <= 1e-10, "mass drift (sponge off, p=4.3, t<=10) %.2e", d);
    }
    TrackOptions o;
    o.p = 4.3;
    const Grid pg = Grid::make(o.profile_L, o.profile_h);
    const ModulationProfile pr = ModulationProfile::linear(normalize_mode(internal_mode(o.p, pg), pg), pg);
    {
        const cplx z0(0.03, -0.02);
        ComplexField v = pr.field(g, 0.95, z0), eta(g.N);
        for (std::size_t j = 0; j < g.N; ++j) {
            const double x = g.x(j);
            eta[j] = 1e-3 * cplx(x * x * std::exp(-x * x), 0.5 * std::exp(-x * x / 2));
        }
        eta = orthogonalize(eta, modulation_frame(pr, g, 0.95, z0), g);
        for (std::size_t j = 0; j < g.N; ++j) v[j] += eta[j];
        const ModulationState base = modulation_decompose(pr, g, v, {});
        std::mt19937_64 rng(2024);
        std::uniform_real_distribution<double> ang(-M_PI, M_PI);
        double worst = 0;
        for (int i = 0; i < 10; ++i) {
            const double a = ang(rng);
            ComplexField w = v;
            for (auto& x : w) x *= std::exp(cplx(0, a));
            const ModulationState s = modulation_decompose(pr, g, w, {});
            worst = std::max({worst, std::abs(std::remainder(s.theta - base.theta - a, 2 * M_PI)),
                              std::abs(s.omega - base.omega), std::abs(s.z - base.z)});
        }
        c.check(worst <= 1e-8, "gauge covariance over 10 random alpha: %.2e", worst);
    }
    o.z0 = 0.05;
    o.T = 400.0;
    o.sponge.on = true;
    double om_lo = INFINITY, om_hi = -INFINITY;
    const Trajectory tr = track_run(o, [&](const TrajectoryRow& r) {
        om_lo = std::min(om_lo, r.omega);
        om_hi = std::max(om_hi, r.omega);
        if (std::fmod(r.t + 1e-9, 50.0) < 0.05)
            std::printf("      t=%5.0f  omega=%.6f  |z|=%.6f  eta_w=%.3e  Q=%.12f\n", r.t, r.omega, std::abs(r.z),
                        r.eta_weighted, r.mass);
    });
    const double ratio = std::abs(tr.final_state.z) / std::abs(o.z0);
    c.check(ratio < 0.7, "p=4.3 |z0|=0.05 T=400 sponge on (%s profile): |z(T)|/|z0| = %.4f", tr.profile_kind.c_str(), ratio);
    c.check(om_hi - om_lo <= 0.1, "omega range %.4f", om_hi - om_lo);
    c.check(tr.mass_monotone, "mass non-increasing between outputs");
    return c.ok;
}

}  // namespace

int main(int argc, char** argv) {
    std::setvbuf(stdout, nullptr, _IOLBF, 0);
    struct Criterion {
        int id;
        const char* title;
        std::function<bool(Checker&)> run;
    };
    const std::vector<Criterion> all = {
        {1, "p=3 Jost closed forms", criterion1},
        {2, "det D(3,k) closed form and diagonal D", criterion2},
        {3, "eigenvalue cross-method agreement", criterion3},
        {4, "thresholds and monotonicity", criterion4},
        {5, "quadrature oracle", criterion5},
        {6, "(1/8b) Im Gamma_1(3) = -0.203", criterion6},
        {7, "refined-profile remainder order", criterion7},
        {8, "FGR pipeline health", criterion8},
        {9, "resonance sweep", criterion9},
        {10, "dynamics", criterion10},
    };
    // optional criterion ids on the command line select a subset
    std::vector<int> only;
    for (int i = 1; i < argc; ++i) only.push_back(std::atoi(argv[i]));
    int failed = 0;
    for (const auto& cr : all) {
        if (!only.empty() && std::find(only.begin(), only.end(), cr.id) == only.end()) continue;
        std::printf("criterion %d: %s\n", cr.id, cr.title);
        const auto t0 = std::chrono::steady_clock::now();
        Checker c;
        bool ok = false;
        try {
            ok = cr.run(c);
        } catch (const std::exception& e) {
            std::printf("    error: %s\n", e.what());
        }
        const double dt = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        std::printf("%s criterion %d (%s) [%.1f s]\n", ok ? "PASS" : "FAIL", cr.id, cr.title, dt);
        failed += ok ? 0 : 1;
    }
    std::printf("%d criteria failed\n", failed);
    return failed == 0 ? 0 : 1;
}
