#include <doctest.h>

#include <cmath>
#include <random>

#include "fgrlab/core.hpp"
#include "fgrlab/discrete_operator.hpp"
#include "fgrlab/dynamics.hpp"

using namespace fgrlab;

namespace {

double l2(const ComplexField& a, const ComplexField& b, double h) {
    double s = 0;
    for (std::size_t j = 0; j < a.size(); ++j) s += std::norm(a[j] - b[j]);
    return std::sqrt(s * h);
}

ComplexField soliton(double p, const PeriodicGrid& g) {
    ComplexField u(g.N);
    for (std::size_t j = 0; j < g.N; ++j) u[j] = soliton_value(p, 1.0, g.x(j));
    return u;
}

const ModulationProfile& profile43() {
    static const ModulationProfile pr = [] {
        const Grid pg = Grid::make(50.0, 0.005);
        return ModulationProfile::linear(normalize_mode(internal_mode(4.3, pg), pg), pg);
    }();
    return pr;
}

}  // namespace

TEST_SUITE("dynamics") {
    TEST_CASE("periodic grid") {
        const PeriodicGrid g = PeriodicGrid::make(80.0, 0.05);
        CHECK(g.N == 3200);
        CHECK(g.x(g.N / 2) == 0.0);
        CHECK(g.x(g.N - 10) == doctest::Approx(-g.x(10)));
        CHECK_THROWS_AS(PeriodicGrid::make(1.0, 0.3), Error);
        const RealField s = sponge_profile(g, {true, 0.005, 0.8});
        CHECK(s[g.N / 2] == 0.0);
        CHECK(s[0] == doctest::Approx(1.0));
    }

    TEST_CASE("soliton orbit") {
        const PeriodicGrid g = PeriodicGrid::make(40.0, 0.05);
        // the splitting error is a phase drift of order dt^2 t growing with p
        CHECK(soliton_orbit_error(2.0, g, 1e-3, 10.0) <= 1e-5);
        const double e1 = soliton_orbit_error(3.0, g, 2e-2, 5.0), e2 = soliton_orbit_error(3.0, g, 1e-2, 5.0);
        CHECK(e1 / e2 == doctest::Approx(4.0).epsilon(0.05));
    }

    TEST_CASE("linear regime") {
        const PeriodicGrid g = PeriodicGrid::make(40.0, 0.05);
        ComplexField u0(g.N);
        for (std::size_t j = 0; j < g.N; ++j) u0[j] = 1e-9 * std::exp(-g.x(j) * g.x(j) / 4);
        const EvolveResult r = evolve(3.0, u0, g, 1e-2, 2.0);
        SplitStepSolver s(3.0, g, 1e-2);
        ComplexField free = u0;
        s.free_flow(free, 2.0);
        CHECK(l2(r.u, free, g.h) <= 1e-8 * l2(u0, ComplexField(g.N), g.h));
    }

    TEST_CASE("conservation") {
        const PeriodicGrid g = PeriodicGrid::make(40.0, 0.05);
        ComplexField u0 = soliton(3.0, g);
        for (std::size_t j = 0; j < g.N; ++j) u0[j] *= 1.1 * std::exp(cplx(0, 0.2 / (1 + g.x(j) * g.x(j))));
        const EvolveResult r = evolve(3.0, u0, g, 1e-3, 5.0, {}, 500);
        for (std::size_t i = 0; i < r.t.size(); ++i) {
            CHECK(std::abs(r.mass[i] - r.mass[0]) <= 1e-10 * r.mass[0]);
            CHECK(std::abs(r.energy[i] - r.energy[0]) <= 1e-5 * std::abs(r.energy[0]));
        }
        // with the sponge the mass cannot grow
        const EvolveResult s = evolve(3.0, u0, g, 1e-3, 5.0, {true, 0.5, 0.8}, 100);
        for (std::size_t i = 1; i < s.t.size(); ++i) CHECK(s.mass[i] <= s.mass[i - 1] + 1e-12);
        ComplexField odd = u0;
        odd[5] += 0.1;
        CHECK_THROWS_AS(evolve(3.0, odd, g, 1e-3, 0.01), Error);
    }

    TEST_CASE("decomposition of exact and constructed states") {
        const PeriodicGrid g = PeriodicGrid::make(80.0, 0.05);
        const ModulationProfile& pr = profile43();
        ComplexField u = pr.field(g, 1.1, 0.0);
        for (auto& v : u) v *= std::exp(cplx(0, 0.7));
        const ModulationState s = modulation_decompose(pr, g, u, {});
        CHECK(std::abs(std::remainder(s.theta - 0.7, 2 * M_PI)) <= 1e-8);
        CHECK(std::abs(s.omega - 1.1) <= 1e-8);
        CHECK(std::abs(s.z) <= 1e-8);

        const cplx z0(0.03, -0.02);
        ComplexField v = pr.field(g, 0.95, z0), eta(g.N);
        for (std::size_t j = 0; j < g.N; ++j) {
            const double x = g.x(j);
            eta[j] = 1e-3 * cplx(x * x * std::exp(-x * x), 0.5 * std::exp(-x * x / 2));
        }
        eta = orthogonalize(eta, modulation_frame(pr, g, 0.95, z0), g);
        for (std::size_t j = 0; j < g.N; ++j) v[j] = std::exp(cplx(0, -0.4)) * (v[j] + eta[j]);
        const ModulationState c = modulation_decompose(pr, g, v, {});
        CHECK(std::abs(c.theta + 0.4) <= 1e-6);
        CHECK(std::abs(c.omega - 0.95) <= 1e-6);
        CHECK(std::abs(c.z - z0) <= 1e-6);
        CHECK(c.residual <= 1e-8);

        std::mt19937_64 rng(7);
        std::uniform_real_distribution<double> ang(-M_PI, M_PI);
        for (int i = 0; i < 10; ++i) {
            const double a = ang(rng);
            ComplexField w = v;
            for (auto& x : w) x *= std::exp(cplx(0, a));
            const ModulationState r = modulation_decompose(pr, g, w, {});
            CHECK(std::abs(std::remainder(r.theta - c.theta - a, 2 * M_PI)) <= 1e-8);
            CHECK(std::abs(r.omega - c.omega) <= 1e-8);
            CHECK(std::abs(r.z - c.z) <= 1e-8);
        }
        ComplexField far(g.N, 0.0);
        for (std::size_t j = 0; j < g.N; ++j) far[j] = 3.0 * std::exp(-g.x(j) * g.x(j));
        CHECK_THROWS_AS(modulation_decompose(pr, g, far, {}), Error);
    }

    TEST_CASE("unperturbed and perturbed tracking") {
        TrackOptions o;
        o.T = 2.0;
        o.z0 = 0.0;
        const Trajectory t0 = track_run(o);
        for (const auto& r : t0.rows) CHECK(std::abs(r.z) <= 1e-5);
        // the spurious z is Strang splitting error, second order in dt
        o.dt = 5e-4;
        const double zh = std::abs(track_run(o).rows.back().z);
        CHECK(std::abs(t0.rows.back().z) / zh == doctest::Approx(4.0).epsilon(0.05));
        o.dt = 1e-3;
        o.z0 = 0.05;
        const Trajectory t1 = track_run(o);
        CHECK(t1.profile_kind == "linear");
        CHECK(t1.rows.size() == 21);
        CHECK(t1.max_mass_drift <= 1e-6);
        CHECK(t1.max_energy_drift <= 1e-5);
        for (const auto& r : t1.rows) CHECK(r.residual <= 1e-8);
        o.z0 = 0.2;
        CHECK_THROWS_AS(track_run(o), Error);
    }
}
