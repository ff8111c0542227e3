#include "fgrlab/fgr.hpp"

#include <algorithm>
#include <cmath>

#include "fgrlab/core.hpp"
#include "fgrlab/parallel.hpp"

namespace fgrlab {

namespace {

// least squares fit y ~ a u + b v
std::pair<double, double> fit2(const RealField& u, const RealField& v, const RealField& y) {
    double uu = 0, uv = 0, vv = 0, uy = 0, vy = 0;
    for (std::size_t i = 0; i < y.size(); ++i) {
        uu += u[i] * u[i];
        uv += u[i] * v[i];
        vv += v[i] * v[i];
        uy += u[i] * y[i];
        vy += v[i] * y[i];
    }
    double det = uu * vv - uv * uv;
    if (std::abs(det) < 1e-300) throw Error(ErrorKind::Degenerate, "fgr: degenerate least-squares fit");
    return {(uy * vv - vy * uv) / det, (vy * uu - uy * uv) / det};
}

}  // namespace

EmbeddedSolution embedded_solution_at(double p, double energy, const Grid& grid, const JostOptions& opt) {
    if (!(energy > 1.0)) throw Error(ErrorKind::SpectralWindow, "embedded_solution: energy must exceed 1", energy);
    if (grid.L < 12.0) throw Error(ErrorKind::Domain, "embedded_solution: grid too short for the asymptotic fit");
    EmbeddedSolution out;
    out.p = p;
    out.energy = energy;
    out.kappa = std::sqrt(energy - 1.0);
    const cplx k(out.kappa, 0.0);
    JostOptions o = opt;
    o.x_min = 0.0;
    JostSolution f3 = jost_f3(p, k, grid, o);
    JostSolution f1 = jost_f1(p, k, grid, o, f3);
    ScatteringData sd = scattering_matrix(f1, f3, false);
    out.det_d = sd.det;
    if (std::abs(sd.det) < 1e-10)
        throw Error(ErrorKind::EmbeddedEigenvalue, "embedded_solution: det D(p, kappa) vanishes", std::abs(sd.det));

    // g = 2 Re(alpha f1) + c f3 with g'(0) = 0
    auto d1 = f1.deriv(0), d3 = f3.deriv(0);
    double r[2][3];
    for (int c = 0; c < 2; ++c) {
        r[c][0] = 2.0 * d1[c].real();
        r[c][1] = -2.0 * d1[c].imag();
        r[c][2] = d3[c].real();
    }
    double a = r[0][1] * r[1][2] - r[0][2] * r[1][1];
    double b = r[0][2] * r[1][0] - r[0][0] * r[1][2];
    double cf = r[0][0] * r[1][1] - r[0][1] * r[1][0];
    const cplx alpha(a, b);

    const std::size_t nn = grid.n, ic = grid.center();
    out.g_n0.assign(nn, 0.0);
    out.g_0n.assign(nn, 0.0);
    const double x_end = f1.x.back();
    JostSeries s1 = jost_series(p, k, JostSpecies::F1, x_end, o.potential_scale);
    JostSeries s3 = jost_series(p, k, JostSpecies::F3, x_end, o.potential_scale);
    for (std::size_t j = ic; j < nn; ++j) {
        double x = grid.x(j);
        std::array<cplx, 2> v1, v3, dd;
        if (x <= x_end + 0.5 * f1.h) {
            std::size_t i = f1.index(x);
            v1 = f1.value(i);
            v3 = f3.value(i);
        } else {
            s1.eval(x, v1, dd);
            s3.eval(x, v3, dd);
        }
        double g0 = 2.0 * (alpha * v1[0]).real() + cf * v3[0].real();
        double g1 = 2.0 * (alpha * v1[1]).real() + cf * v3[1].real();
        out.g_n0[j] = out.g_n0[nn - 1 - j] = g0;
        out.g_0n[j] = out.g_0n[nn - 1 - j] = g1;
    }

    // asymptotic normalization
    RealField cu, sv, y;
    const double w0 = std::max(grid.L - 15.0, 0.5 * grid.L), w1 = grid.L - 5.0;
    for (std::size_t j = ic; j < nn; ++j) {
        double x = grid.x(j);
        if (x < w0 || x > w1) continue;
        cu.push_back(std::cos(out.kappa * x));
        sv.push_back(std::sin(out.kappa * x));
        y.push_back(out.g_n0[j]);
    }
    auto [ca, cb] = fit2(cu, sv, y);
    out.amplitude_raw = std::hypot(ca, cb);
    if (out.amplitude_raw < 1e-300) throw Error(ErrorKind::Degenerate, "embedded_solution: zero asymptotic amplitude");
    double scale = (ca >= 0 ? 1.0 : -1.0) / out.amplitude_raw;
    for (std::size_t j = 0; j < nn; ++j) {
        out.g_n0[j] *= scale;
        out.g_0n[j] *= scale;
    }
    out.phase_delta = std::atan2(-cb * scale, ca * scale);

    // g~ = 2 i kappa F1 D^{-1} e1 and the phase theta* with Re(e^{i theta} g~) parallel to g
    const cplx a1 = 2.0 * cplx(0, 1) * out.kappa * sd.D[3] / sd.det;
    const cplx a3 = -2.0 * cplx(0, 1) * out.kappa * sd.D[2] / sd.det;
    RealField re, im, target;
    for (std::size_t i = 0; i < f1.size() && f1.x[i] <= 20.0; ++i) {
        std::size_t j = ic + std::size_t(std::llround(f1.x[i] / grid.h));
        if (std::abs(grid.x(j) - f1.x[i]) > 1e-9 || j >= nn) continue;
        for (int c = 0; c < 2; ++c) {
            cplx gt = a1 * f1.value(i)[c] + a3 * f3.value(i)[c];
            re.push_back(gt.real());
            im.push_back(gt.imag());
            target.push_back(c == 0 ? out.g_n0[j] : out.g_0n[j]);
        }
    }
    auto [ta, tb] = fit2(re, im, target);
    out.theta = std::atan2(-tb, ta);
    double num = 0, den = 0;
    for (std::size_t i = 0; i < target.size(); ++i) {
        double d = ta * re[i] + tb * im[i] - target[i];
        num += d * d;
        den += target[i] * target[i];
    }
    out.theta_fit_residual = std::sqrt(num / std::max(den, 1e-300));

    // weighted residual on interior nodes
    Spinor gs(out.g_n0, out.g_0n);
    Spinor hg = apply_h(p, grid, gs);
    double rn = 0, gn = 0;
    for (std::size_t j = 3; j + 3 < nn; ++j) {
        double w = 1.0 / std::cosh(0.1 * grid.x(j));
        double e0 = hg.first[j] - energy * gs.first[j], e1 = hg.second[j] - energy * gs.second[j];
        rn += w * w * (e0 * e0 + e1 * e1);
        gn += w * w * (gs.first[j] * gs.first[j] + gs.second[j] * gs.second[j]);
    }
    out.residual = std::sqrt(rn / gn);
    return out;
}

EmbeddedSolution embedded_solution_gn(double p, int n, const Grid& grid, const InternalMode& mode) {
    if (n != 3 && n != 4) throw Error(ErrorKind::UnsupportedOrder, "embedded_solution_gn: n must be 3 or 4", n);
    return embedded_solution_at(p, n * mode.lambda, grid);
}

EmbeddedSolution embedded_solution_gn(double p, int n, const Grid& grid) {
    return embedded_solution_gn(p, n, grid, internal_mode(p, grid));
}

Spinor p3_g3(const Grid& grid) {
    Spinor g(grid.n);
    const double r2 = std::sqrt(2.0);
    for (std::size_t j = 0; j < grid.n; ++j) {
        double x = grid.x(j), c = std::cos(r2 * x), s = std::sin(r2 * x);
        double sech2 = 1.0 / (std::cosh(x) * std::cosh(x));
        g.first[j] = c + sech2 * c - 2.0 * r2 * std::tanh(x) * s;
        g.second[j] = sech2 * c;
    }
    return g;
}

FgrPoint gamma_from(const RefinedProfileSet& set, const EmbeddedSolution& g, double g_scale) {
    FgrPoint pt;
    pt.p = set.p;
    pt.n = set.order;
    pt.lambda = set.mode.lambda;
    pt.kappa = g.kappa;
    double disc = 9.0 * pt.lambda * pt.lambda - 1.0;
    pt.kappa_printed = disc > 0 ? std::sqrt(disc) : 0.0;
    pt.g_residual = g.residual;
    pt.g_scale = g_scale;
    const int n = set.order;
    const RealField& Gn0 = set.G.at({n, 0});
    const RealField& G0n = set.G.at({0, n});
    const double h = set.grid.h;
    RealField integrand(Gn0.size());
    ComplexField perp(Gn0.size());
    for (std::size_t j = 0; j < Gn0.size(); ++j) {
        double a = g_scale * g.g_n0[j], b = g_scale * g.g_0n[j];
        integrand[j] = Gn0[j] * a + G0n[j] * b;
        perp[j] = set.gperp_n0[j] * a + set.gperp_0n[j] * b;
    }
    pt.gamma = simpson(integrand, h);
    cplx gp = simpson(perp, h);
    pt.gamma_perp = gp.real();
    pt.gamma_imag = std::abs(gp.imag());
    pt.perp_mismatch = std::abs(pt.gamma - pt.gamma_perp) / std::max(std::abs(pt.gamma), 1e-300);
    return pt;
}

FgrPoint gamma_n(double p, int n, const Grid& grid, double g_scale) {
    if (n != 3 && n != 4) throw Error(ErrorKind::UnsupportedOrder, "gamma_n: n must be 3 or 4", n);
    InternalMode mode = internal_mode(p, grid);
    RefinedProfileSet set = build_refined_profile(p, grid, n, mode);
    EmbeddedSolution g = embedded_solution_gn(p, n, grid, mode);
    return gamma_from(set, g, g_scale);
}

GammaSweep sweep_gamma(int n, int steps, const Grid& grid, double g_scale, double p_lo, double p_hi) {
    if (n != 3 && n != 4) throw Error(ErrorKind::UnsupportedOrder, "sweep_gamma: n must be 3 or 4", n);
    if (steps < 2) throw Error(ErrorKind::Domain, "sweep_gamma: steps must be >= 2", steps);
    GammaSweep sw;
    sw.n = n;
    sw.p_lo = p_lo > 0 ? p_lo : threshold_p(n - 1, grid);
    sw.p_hi = p_hi > 0 ? p_hi : threshold_p(n, grid);
    const double margin = 0.01;
    const double a = sw.p_lo + margin, b = sw.p_hi - margin;
    if (!(a < b)) throw Error(ErrorKind::Domain, "sweep_gamma: threshold interval narrower than the margins");
    sw.rows.resize(steps);
    parallel_for(std::size_t(steps), [&](std::size_t i) {
        double p = a + (b - a) * double(i) / double(steps - 1);
        try {
            sw.rows[i] = gamma_n(p, n, grid, g_scale);
        } catch (const std::exception& e) {
            sw.rows[i].p = p;
            sw.rows[i].n = n;
            sw.rows[i].ok = false;
            sw.rows[i].error = e.what();
        }
    });
    for (std::size_t i = 0; i + 1 < sw.rows.size(); ++i) {
        FgrPoint& r0 = sw.rows[i];
        const FgrPoint& r1 = sw.rows[i + 1];
        if (!r0.ok || !r1.ok) continue;
        if ((r0.gamma > 0) == (r1.gamma > 0)) continue;
        r0.zero_flag = true;
        double lo = r0.p, hi = r1.p;
        bool lo_pos = r0.gamma > 0;
        for (int it = 0; it < 12; ++it) {
            double mid = 0.5 * (lo + hi);
            FgrPoint m = gamma_n(mid, n, grid, g_scale);
            if ((m.gamma > 0) == lo_pos)
                lo = mid;
            else
                hi = mid;
        }
        sw.zeros.push_back(0.5 * (lo + hi));
    }
    return sw;
}

}  // namespace fgrlab
