#include <doctest.h>

#include <cmath>

#include "fgrlab/discrete_operator.hpp"
#include "fgrlab/jost.hpp"

using namespace fgrlab;

namespace {

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

const Grid& grid() {
    static const Grid g = Grid::make(50.0, 0.005);
    return g;
}

}  // namespace

TEST_SUITE("jost") {
    TEST_CASE("free Jost functions") {
        JostOptions o;
        o.potential_scale = 0.0;
        o.x_min = -5.0;
        const cplx k = 0.8;
        const JostSolution f3 = jost_f3(4.3, k, grid(), o);
        const JostSolution f1 = jost_f1(4.3, k, grid(), o, f3);
        double e3 = 0, e1 = 0;
        const double s = jost_s(k).real();
        for (std::size_t i = 0; i < f3.size(); ++i) {
            const double x = f3.x[i];
            e3 = std::max({e3, std::abs(f3.m.first[i]), std::abs(f3.m.second[i] - 1.0)});
            e1 = std::max({e1, std::abs(f1.f.first[i] - std::exp(cplx(0, 1) * k * x)), std::abs(f1.f.second[i])});
            (void)s;
        }
        CHECK(e3 < 1e-14);
        CHECK(e1 < 1e-12);
    }

    TEST_CASE("p = 3 closed forms at k = 1/2 and 1") {
        JostOptions o;
        o.x_min = -10.0;
        for (double kr : {0.5, 1.0}) {
            const cplx k = kr;
            const JostSolution f3 = jost_f3(3.0, k, grid(), o);
            const JostSolution f1 = jost_f1(3.0, k, grid(), o, f3);
            const JostSolution f4 = jost_f4(3.0, k, grid(), o);
            CHECK(closed_form_error(f1, p3_f1, k) <= 1e-6);
            CHECK(closed_form_error(f3, p3_f3, k) <= 1e-6);
            CHECK(closed_form_error(f4, p3_f4, k) <= 1e-6);
            const std::size_t i0 = f1.index(0.0);
            const JostSolution f2 = jost_f2(3.0, k, grid(), o);
            CHECK(std::abs(wronskian(f1, f4, i0)) <= 1e-8);
            CHECK(std::abs(wronskian(f2, f4, i0)) <= 1e-8);
            CHECK(std::abs(wronskian(f3, f4, i0) + 2.0 * jost_s(k)) <= 1e-8);
        }
    }

    TEST_CASE("f2 is the conjugate of f1 on the real axis") {
        JostOptions o;
        o.x_min = -6.0;
        const cplx k = 0.9;
        const JostSolution f1 = jost_f1(4.3, k, grid(), o);
        const JostSolution f2 = jost_f2(4.3, k, grid(), o);
        double d = 0;
        for (std::size_t i = 0; i < f1.size(); ++i)
            d = std::max({d, std::abs(f2.f.first[i] - std::conj(f1.f.first[i])),
                          std::abs(f2.f.second[i] - std::conj(f1.f.second[i]))});
        CHECK(d <= 1e-12);
    }

    TEST_CASE("f3 decay rate") {
        JostOptions o;
        o.x_min = 0.0;
        const double p = 4.3;
        const JostSolution f3 = jost_f3(p, 1.0, grid(), o);
        // log |m3 - e2| against x on [2, 10]
        double sx = 0, sy = 0, sxx = 0, sxy = 0;
        int n = 0;
        for (std::size_t i = 0; i < f3.size(); ++i) {
            const double x = f3.x[i];
            if (x < 2.0 || x > 10.0) continue;
            const double d = std::max(std::abs(f3.m.first[i]), std::abs(f3.m.second[i] - 1.0));
            const double y = std::log(d);
            sx += x, sy += y, sxx += x * x, sxy += x * y, ++n;
        }
        const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
        CHECK(-slope >= 0.9 * (p - 1.0));
    }

    TEST_CASE("det D at p = 3") {
        for (double kr : {0.3, 1.0, 2.0}) {
            JostOptions o;
            o.x_min = 0.0;
            const ScatteringData sd = scattering_matrix(3.0, kr, grid(), o);
            const cplx ex = p3_det_d(kr);
            CHECK(std::abs(sd.det - ex) <= 1e-6 * std::abs(ex));
            CHECK(std::abs(sd.D[1]) <= 1e-8);
            CHECK(std::abs(sd.D[2]) <= 1e-8);
        }
        // simple root at k = 0: |det D(k)| / k tends to a nonzero limit
        JostOptions o;
        o.x_min = 0.0;
        const double r1 = std::abs(scattering_matrix(3.0, 1e-3, grid(), o).det) / 1e-3;
        const double r2 = std::abs(scattering_matrix(3.0, 1e-4, grid(), o).det) / 1e-4;
        // limit 4 sqrt2 (3 - 2 sqrt2)^2 of the closed form
        CHECK(r1 == doctest::Approx(4 * std::sqrt(2.0) * std::pow(3 - 2 * std::sqrt(2.0), 2)).epsilon(1e-3));
        CHECK(std::abs(r1 - r2) < 1e-3 * r1);
        CHECK(std::abs(scattering_matrix(3.0, 0.0, grid(), o).det) < 1e-8);
    }

    TEST_CASE("eigenvalue from the Jost determinant") {
        const ImaginaryRoot r = eigen_root_imaginary_axis(4.0, grid());
        CHECK(r.lambda > std::sqrt(3.0) / 2);
        const double lg = internal_mode(4.0, grid()).lambda;
        CHECK(std::abs(r.lambda - lg) <= 1e-6 * lg);
    }

    TEST_CASE("eigenvalue near p = 3") {
        // beta ~ 8e-4 at p = 3.05: the mode spreads over thousands of units, so only the Jost route reaches it
        const ImaginaryRoot r = eigen_root_imaginary_axis(3.05, grid(), {2e-4, 2e-3});
        CHECK(r.lambda > 0.99);
        CHECK(r.lambda < 1.0);
    }

    TEST_CASE("resonance sweep flags p = 3 only") {
        const Grid g = Grid::make(50.0, 0.01);
        const ResonanceSweep sw = resonance_sweep(2.9, 3.1, 5, g);
        bool p3_flagged = false;
        for (const auto& r : sw.rows) {
            CHECK(r.ok);
            if (std::abs(r.p - 3.0) < 1e-12) p3_flagged = r.flag;
            else CHECK_FALSE(r.flag);
        }
        CHECK(p3_flagged);
        const ResonanceSweep far = resonance_sweep(3.2, 4.9, 6, g);
        for (const auto& r : far.rows) CHECK_FALSE(r.flag);
    }
}
