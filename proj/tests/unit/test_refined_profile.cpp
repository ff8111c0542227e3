#include <doctest.h>

#include <cmath>

#include "fgrlab/core.hpp"
#include "fgrlab/discrete_operator.hpp"
#include "fgrlab/refined_profile.hpp"

using namespace fgrlab;

namespace {

double max_diff(const RealField& a, const RealField& b) {
    double d = 0;
    for (std::size_t j = 0; j < a.size(); ++j) d = std::max(d, std::abs(a[j] - b[j]));
    return d;
}

// midpoints of (p2, p3) and (p3, p4), thresholds from the discrete_operator suite
constexpr double kP23 = 0.5 * (4.8304554 + 4.9286937);
constexpr double kP34 = 0.5 * (4.9286937 + 4.9605963);

const RefinedProfileSet& set3() {
    static const RefinedProfileSet s = build_refined_profile(kP23, Grid::make(50.0, 0.005), 3);
    return s;
}

}  // namespace

TEST_SUITE("refined_profile") {
    TEST_CASE("nonresonant sets") {
        CHECK(nonresonant_set(3).size() == 7);
        CHECK_THROWS_AS(nonresonant_set(5), Error);
    }

    TEST_CASE("sources vanish for vanishing inputs and obey the swap rule") {
        const Grid g = Grid::make(30.0, 0.01);
        FieldMap zero{{{1, 0}, RealField(g.n, 0.0)}, {{0, 1}, RealField(g.n, 0.0)}};
        for (auto& [m, f] : assemble_sources(4.3, g, zero, 2)) CHECK(sup_norm(f) == 0.0);
        // swap rule: G_m from (a, b) equals G_swap(m) from (b, a)
        FieldMap xi, sw;
        RealField a(g.n), b(g.n);
        for (std::size_t j = 0; j < g.n; ++j) {
            const double x = g.x(j);
            a[j] = std::exp(-x * x) * (1 + 0.3 * x * x);
            b[j] = -0.4 / std::cosh(x);
        }
        xi[{1, 0}] = a;
        xi[{0, 1}] = b;
        sw[{1, 0}] = b;
        sw[{0, 1}] = a;
        for (double p : {3.0, 4.3, 4.9}) {
            const FieldMap g2 = assemble_sources(p, g, xi, 2), s2 = assemble_sources(p, g, sw, 2);
            for (auto& [m, f] : g2) CHECK(max_diff(f, s2.at(swap_index(m))) <= 1e-14 * (1 + sup_norm(f)));
            FieldMap x3 = xi, s3 = sw;
            for (auto& [m, f] : g2) x3[m] = f, s3[swap_index(m)] = f;
            const FieldMap g3 = assemble_sources(p, g, x3, 3), t3 = assemble_sources(p, g, s3, 3);
            for (auto& [m, f] : g3) CHECK(max_diff(f, t3.at(swap_index(m))) <= 1e-14 * (1 + sup_norm(f)));
        }
    }

    TEST_CASE("p = 3 second-order sources by hand") {
        // xi10 = 1 - sech^2, xi01 = -sech^2; the conj(w)^2 term carries (p - 3) and drops, leaving
        // G20 = phi (xi10^2 + 2 xi10 xi01) and its swap
        const Grid g = Grid::make(30.0, 0.01);
        FieldMap xi;
        RealField a(g.n), b(g.n);
        for (std::size_t j = 0; j < g.n; ++j) {
            const double t = 1.0 / (std::cosh(g.x(j)) * std::cosh(g.x(j)));
            a[j] = 1.0 - t;
            b[j] = -t;
        }
        xi[{1, 0}] = a;
        xi[{0, 1}] = b;
        const FieldMap s = assemble_sources(3.0, g, xi, 2);
        const RealField phi = soliton_profile(3.0, 1.0, g);
        RealField g20(g.n), g02(g.n);
        for (std::size_t j = 0; j < g.n; ++j) {
            g20[j] = phi[j] * (a[j] * a[j] + 2 * a[j] * b[j]);
            g02[j] = phi[j] * (b[j] * b[j] + 2 * a[j] * b[j]);
        }
        CHECK(max_diff(s.at({2, 0}), g20) < 1e-14);
        CHECK(max_diff(s.at({0, 2}), g02) < 1e-14);
    }

    TEST_CASE("order-3 set at the midpoint of (p2, p3)") {
        const RefinedProfileSet& s = set3();
        for (auto& [m, r] : s.solve_residuals) CHECK(r <= 1e-8);
        CHECK(std::abs(s.lambda21 - s.lambda21_projection) <= 1e-8 * std::max(1.0, std::abs(s.lambda21)));
        for (auto& [m, f] : s.xi) CHECK(even_defect(f) < 1e-12 * (1 + sup_norm(f)));
    }

    TEST_CASE("lambda21 vanishes for inputs orthogonal to the mode") {
        const Grid g = Grid::make(50.0, 0.005);
        const InternalMode mode = internal_mode(kP23, g);
        RealField flipped = mode.xi10;
        for (double& v : flipped) v = -v;
        // xi10 G21 + xi01 G12 = 0 for (G21, G12) = (xi01, -xi10)
        const Lambda21Result r = compute_lambda21_and_xi21(kP23, g, mode, mode.xi01, flipped);
        CHECK(std::abs(r.lambda21_projection) < 1e-10);
        CHECK(std::abs(r.lambda21) < 1e-8);
        CHECK(r.residual <= 1e-8);
    }

    TEST_CASE("projector") {
        const RefinedProfileSet& s = set3();
        const Grid& g = s.grid;
        const PerpProjector P(s.p, g, s.mode);
        ComplexField psi(g.n), iphi(g.n);
        const RealField phi = soliton_profile(s.p, 1.0, g);
        for (std::size_t j = 0; j < g.n; ++j) {
            const double x = g.x(j);
            psi[j] = cplx(std::exp(-x * x), 0.3 * x * x * std::exp(-std::abs(x)));
            iphi[j] = cplx(0, phi[j]);
        }
        const ComplexField once = P.apply(psi), twice = P.apply(once);
        double d = 0, n = 0;
        for (std::size_t j = 0; j < g.n; ++j) d = std::max(d, std::abs(once[j] - twice[j])), n = std::max(n, std::abs(once[j]));
        CHECK(d <= 1e-12 * n);
        double z = 0;
        for (const cplx& v : P.apply(iphi)) z = std::max(z, std::abs(v));
        CHECK(z <= 1e-10);
    }

    TEST_CASE("remainder order") {
        const RefinedProfileSet& s = set3();
        CHECK(residual_scaling(s, 0.0) <= 1e-8);
        const double slope = residual_slope(s, {1e-1, 3e-2, 1e-2, 3e-3});
        CHECK(slope >= 3.6);
        CHECK(slope <= 4.4);
    }

    TEST_CASE("order-4 set at the midpoint of (p3, p4)") {
        const RefinedProfileSet s = build_refined_profile(kP34, Grid::make(50.0, 0.005), 4);
        CHECK(s.xi.size() == 12);
        for (auto& [m, r] : s.solve_residuals) CHECK(r <= 1e-8);
        const double slope = residual_slope(s, {1e-1, 3e-2, 1e-2, 3e-3});
        CHECK(slope >= kP34 - 0.4);
        CHECK(slope <= kP34 + 0.4);
    }
}
