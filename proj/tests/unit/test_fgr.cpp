#include <doctest.h>

#include <cmath>

#include "fgrlab/discrete_operator.hpp"
#include "fgrlab/fgr.hpp"

using namespace fgrlab;

namespace {

constexpr double kP23 = 0.5 * (4.8304554 + 4.9286937);

const Grid& grid() {
    static const Grid g = Grid::make(50.0, 0.005);
    return g;
}

}  // namespace

TEST_SUITE("fgr") {
    TEST_CASE("embedded solution at the midpoint of (p2, p3)") {
        const EmbeddedSolution e = embedded_solution_gn(kP23, 3, grid());
        CHECK(e.residual <= 1e-6);
        CHECK(e.kappa == doctest::Approx(std::sqrt(e.energy - 1.0)));
        double inner_max = 0, all_max = 0;
        for (std::size_t j = 0; j < grid().n; ++j) {
            const double v = std::max(std::abs(e.g_n0[j]), std::abs(e.g_0n[j]));
            all_max = std::max(all_max, v);
            if (std::abs(grid().x(j)) <= 10.0) inner_max = std::max(inner_max, v);
        }
        CHECK(all_max <= 1.5 * inner_max);
    }

    TEST_CASE("p = 3 limiting shape") {
        const EmbeddedSolution e = embedded_solution_at(3.0, 3.0, grid());
        CHECK(e.kappa == doctest::Approx(std::sqrt(2.0)).epsilon(1e-14));
        const Spinor ref = p3_g3(grid());
        double num = 0, den = 0;
        for (std::size_t j = 0; j < grid().n; ++j) {
            if (std::abs(grid().x(j)) > 10.0) continue;
            num += e.g_n0[j] * ref.first[j] + e.g_0n[j] * ref.second[j];
            den += ref.first[j] * ref.first[j] + ref.second[j] * ref.second[j];
        }
        const double c = num / den;
        double err = 0, scale = 0;
        for (std::size_t j = 0; j < grid().n; ++j) {
            if (std::abs(grid().x(j)) > 10.0) continue;
            err = std::max({err, std::abs(e.g_n0[j] - c * ref.first[j]), std::abs(e.g_0n[j] - c * ref.second[j])});
            scale = std::max({scale, std::abs(e.g_n0[j]), std::abs(e.g_0n[j])});
        }
        CHECK(err <= 1e-5 * scale);
    }

    TEST_CASE("gamma is linear in g and vanishes with G") {
        const InternalMode mode = internal_mode(kP23, grid());
        RefinedProfileSet set = build_refined_profile(kP23, grid(), 3, mode);
        const EmbeddedSolution g = embedded_solution_gn(kP23, 3, grid(), mode);
        const FgrPoint a = gamma_from(set, g);
        CHECK(a.g_residual <= 1e-6);
        CHECK(gamma_from(set, g, 2.0).gamma == doctest::Approx(2.0 * a.gamma).epsilon(1e-14));
        CHECK(gamma_from(set, g, 0.5).gamma == doctest::Approx(0.5 * a.gamma).epsilon(1e-14));
        CHECK(a.gamma_imag <= 1e-8 * std::max(1.0, std::abs(a.gamma)));
        set.G[{3, 0}].assign(grid().n, 0.0);
        set.G[{0, 3}].assign(grid().n, 0.0);
        std::fill(set.gperp_n0.begin(), set.gperp_n0.end(), cplx(0));
        std::fill(set.gperp_0n.begin(), set.gperp_0n.end(), cplx(0));
        const FgrPoint z = gamma_from(set, g);
        CHECK(z.gamma == 0.0);
        CHECK(z.gamma_perp == 0.0);
    }

    TEST_CASE("projected pairing converges to the plain pairing") {
        // the mismatch is a discretization effect of order h^4
        const double p = 4.85;
        const FgrPoint c = gamma_n(p, 3, Grid::make(50.0, 0.005));
        const FgrPoint f = gamma_n(p, 3, Grid::make(50.0, 0.0025));
        CHECK(f.perp_mismatch < c.perp_mismatch / 8.0);
        CHECK(f.gamma == doctest::Approx(c.gamma).epsilon(1e-4));
    }

    TEST_CASE("short sweep") {
        const GammaSweep sw = sweep_gamma(3, 6, grid());
        CHECK(sw.rows.size() == 6);
        CHECK(sw.rows.front().p > sw.p_lo);
        CHECK(sw.rows.back().p < sw.p_hi);
        for (const auto& r : sw.rows) {
            CHECK(r.ok);
            CHECK(r.g_residual <= 1e-6);
        }
        CHECK_THROWS_AS(sweep_gamma(5, 6, grid()), Error);
    }
}
