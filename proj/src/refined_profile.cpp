#include "fgrlab/refined_profile.hpp"

#include <Eigen/Dense>
#include <cmath>

#include "fgrlab/core.hpp"

namespace fgrlab {

namespace {

using Poly = FieldMap;

Poly multiply(const Poly& a, const Poly& b, int max_order) {
    Poly c;
    for (const auto& [ma, fa] : a) {
        for (const auto& [mb, fb] : b) {
            const MultiIndex m{ma.first + mb.first, ma.second + mb.second};
            if (order_of(m) > max_order) continue;
            auto& dst = c[m];
            if (dst.empty()) dst.assign(fa.size(), 0.0);
            for (std::size_t j = 0; j < fa.size(); ++j) dst[j] += fa[j] * fb[j];
        }
    }
    return c;
}

double factorial(int n) {
    double f = 1;
    for (int i = 2; i <= n; ++i) f *= i;
    return f;
}

Spinor make_spinor(const RealField& a, const RealField& b) { return Spinor(a, b); }

RealField neg(const RealField& a) {
    RealField b(a.size());
    for (std::size_t j = 0; j < a.size(); ++j) b[j] = -a[j];
    return b;
}

double relative_residual(double p, const Grid& grid, double mu, const Spinor& u, const Spinor& rhs) {
    Spinor r = apply_h(p, grid, u);
    for (std::size_t j = 0; j < r.size(); ++j) {
        r.first[j] -= mu * u.first[j] + rhs.first[j];
        r.second[j] -= mu * u.second[j] + rhs.second[j];
    }
    const double n = l2norm(rhs, grid.h);
    return n > 0 ? l2norm(r, grid.h) / n : l2norm(r, grid.h);
}

double relative_residual_lplus(double p, const Grid& grid, const RealField& u, const RealField& rhs) {
    RealField r = apply_lplus(p, grid, u);
    for (std::size_t j = 0; j < r.size(); ++j) r[j] -= rhs[j];
    const double n = l2norm(rhs, grid.h);
    return n > 0 ? l2norm(r, grid.h) / n : l2norm(r, grid.h);
}

}  // namespace

std::vector<MultiIndex> nonresonant_set(int n) {
    std::vector<MultiIndex> s = {{1, 0}, {0, 1}, {2, 0}, {1, 1}, {0, 2}, {2, 1}, {1, 2}};
    if (n == 4) {
        for (MultiIndex m : {MultiIndex{3, 0}, {0, 3}, {3, 1}, {1, 3}, {2, 2}}) s.push_back(m);
    } else if (n != 3) {
        throw Error(ErrorKind::UnsupportedOrder, "refined profile order must be 3 or 4", n);
    }
    return s;
}

FieldMap mode_coefficients(const InternalMode& mode) { return {{{1, 0}, mode.xi10}, {{0, 1}, mode.xi01}}; }

FieldMap assemble_sources(double p, const Grid& grid, const FieldMap& xi, int order) {
    if (order < 2 || order > 4) throw Error(ErrorKind::UnsupportedOrder, "source order must be 2..4", order);
    const RealField phi = soliton_profile(p, 1.0, grid);
    const TaylorCoeffs t = taylor_coeffs(p, order);
    const std::size_t n = grid.n;

    Poly w, wb;
    for (const auto& [m, f] : xi) {
        if (order_of(m) >= order) continue;
        w[m] = f;
        wb[swap_index(m)] = f;
    }
    std::vector<Poly> wp(static_cast<std::size_t>(order) + 1), wbp(static_cast<std::size_t>(order) + 1);
    wp[0][{0, 0}] = RealField(n, 1.0);
    wbp[0][{0, 0}] = RealField(n, 1.0);
    for (int j = 1; j <= order; ++j) {
        wp[static_cast<std::size_t>(j)] = multiply(wp[static_cast<std::size_t>(j - 1)], w, order);
        wbp[static_cast<std::size_t>(j)] = multiply(wbp[static_cast<std::size_t>(j - 1)], wb, order);
    }

    FieldMap g;
    for (int m1 = order; m1 >= 0; --m1) g[{m1, order - m1}] = RealField(n, 0.0);
    for (int N = 2; N <= order; ++N) {
        RealField pw(n);
        for (std::size_t j = 0; j < n; ++j) pw[j] = std::pow(phi[j], p - N);
        for (int i = 0; i <= N; ++i) {
            const double c = t(N, i) / factorial(N);
            if (c == 0.0) continue;
            const Poly prod = multiply(wp[static_cast<std::size_t>(N - i)], wbp[static_cast<std::size_t>(i)], order);
            for (const auto& [m, f] : prod) {
                if (order_of(m) != order) continue;
                auto& dst = g[m];
                for (std::size_t j = 0; j < n; ++j) dst[j] += c * pw[j] * f[j];
            }
        }
    }
    return g;
}

FieldMap assemble_sources_order2(double p, const Grid& grid, const InternalMode& mode) {
    return assemble_sources(p, grid, mode_coefficients(mode), 2);
}

FieldMap solve_order2(double p, const Grid& grid, const InternalMode& mode, const FieldMap& sources) {
    const ShiftedSolver h2(p, grid, 2.0 * mode.lambda, &mode);
    const Spinor u = h2.solve(make_spinor(sources.at({2, 0}), neg(sources.at({0, 2}))));
    FieldMap out;
    out[{2, 0}] = u.first;
    out[{0, 2}] = u.second;
    out[{1, 1}] = solve_lplus(p, grid, sources.at({1, 1}));
    return out;
}

FieldMap assemble_sources_order3(double p, const Grid& grid, const FieldMap& xi) {
    return assemble_sources(p, grid, xi, 3);
}

Lambda21Result compute_lambda21_and_xi21(double p, const Grid& grid, const InternalMode& mode, const RealField& g21,
                                         const RealField& g12) {
    const Spinor rhs = make_spinor(g21, neg(g12));
    const DeflatedSolution d = solve_deflated_at_lambda(p, grid, mode, rhs);
    Lambda21Result r;
    r.lambda21 = d.c;
    RealField pr(g21.size());
    for (std::size_t j = 0; j < pr.size(); ++j) pr[j] = mode.xi10[j] * g21[j] + mode.xi01[j] * g12[j];
    r.lambda21_projection = -2.0 * simpson(pr, grid.h);
    r.xi21 = d.u.first;
    r.xi12 = d.u.second;
    Spinor full_rhs = rhs;
    for (std::size_t j = 0; j < g21.size(); ++j) {
        full_rhs.first[j] += d.c * mode.xi10[j];
        full_rhs.second[j] += d.c * mode.xi01[j];
    }
    r.residual = relative_residual(p, grid, mode.lambda, d.u, full_rhs);
    return r;
}

RefinedProfileSet build_refined_profile(double p, const Grid& grid, int n) {
    return build_refined_profile(p, grid, n, internal_mode(p, grid));
}

RefinedProfileSet build_refined_profile(double p, const Grid& grid, int n, const InternalMode& mode) {
    nonresonant_set(n);
    RefinedProfileSet s;
    s.order = n;
    s.p = p;
    s.grid = grid;
    s.mode = mode;
    s.xi = mode_coefficients(mode);

    // order 2
    for (auto& [m, f] : assemble_sources(p, grid, s.xi, 2)) s.G[m] = f;
    const ShiftedSolver h2(p, grid, 2.0 * mode.lambda, &mode);
    {
        const Spinor rhs = make_spinor(s.G[{2, 0}], neg(s.G[{0, 2}]));
        const Spinor u = h2.solve(rhs);
        s.xi[{2, 0}] = u.first;
        s.xi[{0, 2}] = u.second;
        s.solve_residuals[{2, 0}] = relative_residual(p, grid, 2.0 * mode.lambda, u, rhs);
        s.xi[{1, 1}] = solve_lplus(p, grid, s.G[{1, 1}]);
        s.solve_residuals[{1, 1}] = relative_residual_lplus(p, grid, s.xi[{1, 1}], s.G[{1, 1}]);
    }

    // order 3
    for (auto& [m, f] : assemble_sources(p, grid, s.xi, 3)) s.G[m] = f;
    {
        const Lambda21Result r = compute_lambda21_and_xi21(p, grid, mode, s.G[{2, 1}], s.G[{1, 2}]);
        s.lambda21 = r.lambda21;
        s.lambda21_projection = r.lambda21_projection;
        s.xi[{2, 1}] = r.xi21;
        s.xi[{1, 2}] = r.xi12;
        s.solve_residuals[{2, 1}] = r.residual;
    }

    if (n == 4) {
        assemble_order4(s);
    } else {
        auto gp = project_Gperp(p, grid, mode, s.G[{3, 0}], s.G[{0, 3}]);
        s.gperp_n0 = std::move(gp.first);
        s.gperp_0n = std::move(gp.second);
    }
    return s;
}

void assemble_order4(RefinedProfileSet& s) {
    const double p = s.p;
    const Grid& grid = s.grid;
    const InternalMode& mode = s.mode;
    if (!(3.0 * mode.lambda < 1.0))
        throw Error(ErrorKind::EmbeddedSpectrum,
                    "3 lambda >= 1: xi_(3,0) would sit in the continuum; use the order-3 pipeline", 3.0 * mode.lambda);
    s.order = 4;
    {
        const Spinor rhs = make_spinor(s.G.at({3, 0}), neg(s.G.at({0, 3})));
        const Spinor u = solve_shifted(p, grid, 3.0 * mode.lambda, rhs, &mode);
        s.xi[{3, 0}] = u.first;
        s.xi[{0, 3}] = u.second;
        s.solve_residuals[{3, 0}] = relative_residual(p, grid, 3.0 * mode.lambda, u, rhs);
    }
    for (auto& [m, f] : assemble_sources(p, grid, s.xi, 4)) s.G[m] = f;
    {
        // the |z|^2 part of the frequency acting on z^2 xi_(2,0) feeds the (3,1) equation
        Spinor rhs = make_spinor(s.G[{3, 1}], neg(s.G[{1, 3}]));
        const RealField& x20 = s.xi.at({2, 0});
        const RealField& x02 = s.xi.at({0, 2});
        for (std::size_t j = 0; j < rhs.size(); ++j) {
            rhs.first[j] += 2.0 * s.lambda21 * x20[j];
            rhs.second[j] += 2.0 * s.lambda21 * x02[j];
        }
        const Spinor u = solve_shifted(p, grid, 2.0 * mode.lambda, rhs, &mode);
        s.xi[{3, 1}] = u.first;
        s.xi[{1, 3}] = u.second;
        s.solve_residuals[{3, 1}] = relative_residual(p, grid, 2.0 * mode.lambda, u, rhs);
    }
    s.xi[{2, 2}] = solve_lplus(p, grid, s.G[{2, 2}]);
    s.solve_residuals[{2, 2}] = relative_residual_lplus(p, grid, s.xi[{2, 2}], s.G[{2, 2}]);
    auto gp = project_Gperp(p, grid, mode, s.G[{4, 0}], s.G[{0, 4}]);
    s.gperp_n0 = std::move(gp.first);
    s.gperp_0n = std::move(gp.second);
}

double real_pairing(const ComplexField& a, const ComplexField& b, double h) {
    RealField t(a.size());
    for (std::size_t j = 0; j < a.size(); ++j) t[j] = (a[j] * std::conj(b[j])).real();
    return simpson(t, h);
}

PerpProjector::PerpProjector(double p, const Grid& grid, const InternalMode& mode) : grid_(grid) {
    const RealField phi = soliton_profile(p, 1.0, grid);
    const RealField lphi = lambda_p_phi(p, grid);
    const std::size_t n = grid.n;
    const cplx I(0, 1);
    ComplexField e1(n), e2(n), e3(n), e4(n);
    for (std::size_t j = 0; j < n; ++j) {
        e1[j] = I * phi[j];
        e2[j] = lphi[j];
        e3[j] = mode.xi10[j] + mode.xi01[j];
        e4[j] = I * (mode.xi10[j] - mode.xi01[j]);
    }
    basis_ = {e1, e2, e3, e4};
    ComplexField phic(phi.begin(), phi.end()), lphic(lphi.begin(), lphi.end());
    phi_lambda_ = real_pairing(phic, lphic, grid.h);
    if (std::abs(phi_lambda_) < 1e-14) throw Error(ErrorKind::Degenerate, "<phi, Lambda_p phi> vanishes", phi_lambda_);

    // Omega_{ba} = <i e_b, e_a>
    Eigen::Matrix4d om;
    for (int b = 0; b < 4; ++b) {
        ComplexField ie(n);
        for (std::size_t j = 0; j < n; ++j) ie[j] = I * basis_[static_cast<std::size_t>(b)][j];
        for (int a = 0; a < 4; ++a) om(b, a) = real_pairing(ie, basis_[static_cast<std::size_t>(a)], grid.h);
    }
    const Eigen::Matrix4d inv = om.inverse();
    for (int a = 0; a < 4; ++a)
        for (int b = 0; b < 4; ++b) omega_inv_[a][b] = inv(a, b);
}

ComplexField PerpProjector::apply(const ComplexField& psi) const {
    const std::size_t n = psi.size();
    const cplx I(0, 1);
    double rhs[4];
    for (int b = 0; b < 4; ++b) {
        ComplexField ie(n);
        for (std::size_t j = 0; j < n; ++j) ie[j] = I * basis_[static_cast<std::size_t>(b)][j];
        rhs[b] = real_pairing(ie, psi, grid_.h);
    }
    ComplexField out = psi;
    for (int a = 0; a < 4; ++a) {
        double c = 0;
        for (int b = 0; b < 4; ++b) c += omega_inv_[a][b] * rhs[b];
        for (std::size_t j = 0; j < n; ++j) out[j] -= c * basis_[static_cast<std::size_t>(a)][j];
    }
    return out;
}

std::pair<ComplexField, ComplexField> project_Gperp(double p, const Grid& grid, const InternalMode& mode,
                                                    const RealField& g_n0, const RealField& g_0n) {
    const PerpProjector proj(p, grid, mode);
    const std::size_t n = g_n0.size();
    const cplx I(0, 1);
    ComplexField isum(n), diff(n);
    for (std::size_t j = 0; j < n; ++j) {
        isum[j] = I * (g_n0[j] + g_0n[j]);
        diff[j] = g_n0[j] - g_0n[j];
    }
    const ComplexField a = proj.apply(isum), b = proj.apply(diff);
    ComplexField gn0(n), g0n(n);
    for (std::size_t j = 0; j < n; ++j) {
        gn0[j] = -0.5 * I * a[j] + 0.5 * b[j];
        g0n[j] = -0.5 * I * a[j] - 0.5 * b[j];
    }
    return {gn0, g0n};
}

double residual_weight_kappa(double p) { return std::min(0.1, (p - 1.0) / 8.0); }

double residual_scaling(const RefinedProfileSet& s, std::complex<double> z) {
    const double p = s.p;
    const Grid& grid = s.grid;
    const std::size_t n = grid.n;
    const RealField phi = soliton_profile(p, 1.0, grid);
    const RealField x = grid.coords();
    const double lam = s.mode.lambda;
    const double z2 = std::norm(z);
    const cplx zb = std::conj(z);

    ComplexField r(n, 0.0), pz(n);
    for (std::size_t j = 0; j < n; ++j) pz[j] = phi[j];
    for (const auto& [m, f] : s.xi) {
        const cplx zm = std::pow(z, m.first) * std::pow(zb, m.second);
        const int d = m.first - m.second;
        const RealField dd = d2_dirichlet(f, grid.h);
        // linear part: -xi + d (lambda + lambda21 |z|^2) xi + xi''
        const double coef = -1.0 + d * (lam + s.lambda21 * z2);
        for (std::size_t j = 0; j < n; ++j) {
            r[j] += zm * (coef * f[j] + dd[j]);
            pz[j] += zm * f[j];
        }
    }
    const int ord = s.order;
    const cplx zn = std::pow(z, ord), zbn = std::pow(zb, ord);
    const RealField& gn0 = s.G.at({ord, 0});
    const RealField& g0n = s.G.at({0, ord});
    RealField dens(n);
    const double kap = residual_weight_kappa(p);
    for (std::size_t j = 0; j < n; ++j) {
        // f(phi[z]) - f(phi), the z-independent static residual being subtracted
        const cplx fz = std::pow(std::abs(pz[j]), p - 1.0) * pz[j];
        r[j] += fz - std::pow(phi[j], p);
        r[j] -= zn * gn0[j] + zbn * g0n[j];
        const double w = 1.0 / std::cosh(kap * x[j]);
        dens[j] = w * w * std::norm(r[j]);
    }
    return std::sqrt(std::max(0.0, simpson(dens, grid.h)));
}

double residual_slope(const RefinedProfileSet& s, const std::vector<double>& radii, double angle) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const double k = static_cast<double>(radii.size());
    for (double r : radii) {
        const double v = residual_scaling(s, std::polar(r, angle));
        const double lx = std::log(r), ly = std::log(v);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    return (k * sxy - sx * sy) / (k * sxx - sx * sx);
}

}  // namespace fgrlab
