#include "fgrlab/p3_oracle.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "fgrlab/discrete_operator.hpp"

namespace fgrlab {

namespace {

constexpr double kPi = std::numbers::pi;
const double kSqrt2 = std::sqrt(2.0);
const double kSqrt3 = std::sqrt(3.0);

double sech(double x) { return 1.0 / std::cosh(x); }

// sample fn on [a, b] with an even interval count and step <= h, then Simpson
template <class Fn>
auto simpson_fn(Fn fn, double a, double b, double h) {
    using T = decltype(fn(a));
    if (!(b > a)) return T(0);
    std::size_t m = static_cast<std::size_t>(std::ceil((b - a) / h));
    if (m % 2) ++m;
    const double step = (b - a) / static_cast<double>(m);
    std::vector<T> f(m + 1);
    for (std::size_t j = 0; j <= m; ++j) f[j] = fn(a + static_cast<double>(j) * step);
    return simpson(f, step);
}

// Simpson on nodes [i0, i1] for any interval count (3/8 rule on the last three when odd)
double simpson_nodes(const RealField& f, double h, std::size_t i0, std::size_t i1) {
    const std::size_t m = i1 - i0;
    if (m == 0) return 0.0;
    if (m == 1) return 0.5 * h * (f[i0] + f[i1]);
    if (m % 2 == 0) return simpson_range(f, h, i0, i1);
    const std::size_t k = i1 - 3;
    return simpson_range(f, h, i0, k) + 3.0 * h / 8.0 * (f[k] + 3.0 * f[k + 1] + 3.0 * f[k + 2] + f[k + 3]);
}

// x tanh x - log(e^x + e^-x), stable for large |x|
double log_bracket(double x) {
    const double ax = std::abs(x);
    const double e = std::exp(-2.0 * ax);
    return -2.0 * ax * e / (1.0 + e) - std::log1p(e);
}

double accelerate(std::vector<double> s) {
    // repeated averaging of consecutive partial sums (Euler on the alternating tail)
    while (s.size() > 1) {
        for (std::size_t i = 0; i + 1 < s.size(); ++i) s[i] = 0.5 * (s[i] + s[i + 1]);
        s.pop_back();
    }
    return s.front();
}

// second-order operators for the intertwining check
RealField fd2(const RealField& f, double h) {
    RealField g(f.size(), 0.0);
    for (std::size_t j = 1; j + 1 < f.size(); ++j) g[j] = (f[j - 1] - 2.0 * f[j] + f[j + 1]) / (h * h);
    return g;
}

}  // namespace

OracleReport make_report(const std::string& name, double value, double reference, double tol, bool relative,
                         const std::string& note) {
    OracleReport r;
    r.name = name;
    r.value = value;
    r.reference = reference;
    r.abs_error = std::abs(value - reference);
    r.rel_error = r.abs_error / std::max(std::abs(reference), 1e-300);
    r.tolerance = tol;
    r.relative = relative;
    r.pass = (relative ? r.rel_error : r.abs_error) <= tol;
    r.note = note;
    return r;
}

double sech_cos_integral(double a, int n, double h) {
    return simpson_fn([&](double x) { return std::pow(sech(x), n) * std::cos(a * x); }, -kOracleHalfWidth,
                      kOracleHalfWidth, h);
}

double sech_tanh_sin_integral(double a, int n, double h) {
    return simpson_fn([&](double x) { return std::pow(sech(x), n) * std::tanh(x) * std::sin(a * x); },
                      -kOracleHalfWidth, kOracleHalfWidth, h);
}

double sech_cos_closed(double a, int n) {
    if (n < 1 || n % 2 == 0) throw Error(ErrorKind::Domain, "sech_cos_closed: n must be odd and positive", n);
    double v = kPi * sech(0.5 * kPi * a);
    for (int m = 1; m < n; m += 2) v *= (m * m + a * a) / double(m * m + m);
    return v;
}

double sech_tanh_sin_closed(double a, int n) { return a / n * sech_cos_closed(a, n); }

double laplace_cos_cosh(int n, double h) {
    if (n < 1) throw Error(ErrorKind::Domain, "laplace_cos_cosh: n >= 1 required", n);
    // cosh(x) e^{-2nx} written without overflow
    return simpson_fn(
        [&](double x) {
            return std::cos(x) * 0.5 * (std::exp(-(2.0 * n - 1.0) * x) + std::exp(-(2.0 * n + 1.0) * x));
        },
        0.0, kOracleHalfWidth, h);
}

double laplace_cos_cosh_closed(int n) {
    const double m = 2.0 * n - 1.0, q = 2.0 * n + 1.0;
    return 0.5 * (m / (m * m + 1.0) + q / (q * q + 1.0));
}

double laplace_cos_cosh_printed(int n) {
    const double n4 = std::pow(double(n), 4);
    return std::pow(double(n), 3) / (4.0 * n4 + 1.0);
}

AlternatingSeries alternating_series_check(int terms) {
    if (terms < 4) throw Error(ErrorKind::Domain, "alternating_series_check: at least 4 terms", terms);
    AlternatingSeries out;
    out.terms = terms;
    auto term = [](int n) {
        const double d = n;
        return ((n % 2) ? 1.0 : -1.0) * d * d / (4.0 * d * d * d * d + 1.0);
    };
    double s = 0;
    std::vector<double> last;
    const int keep = std::min(terms, 24);
    for (int n = 1; n <= terms; ++n) {
        s += term(n);
        if (n > terms - keep) last.push_back(s);
    }
    out.partial = s;
    out.tail_bound = std::abs(term(terms + 1));
    out.accelerated = accelerate(last);
    out.first_three = 1.0 / 5.0 - 4.0 / 65.0 + 9.0 / 325.0;
    out.lower_bound = (23701.0 / 1950.0 - kPi * kPi) / 24.0;
    out.exceeds_bound = out.partial - out.tail_bound > out.lower_bound && out.lower_bound > 0;
    return out;
}

BConstant b_constant(double h) {
    BConstant b;
    auto log_integrand = [](double x) { return std::cos(x) * log_bracket(x) * std::cosh(x); };
    b.log_integral = simpson_fn(log_integrand, -kOracleHalfWidth, kOracleHalfWidth, h);
    b.half_line_log = simpson_fn(log_integrand, 0.0, kOracleHalfWidth, h);
    b.log_series = -4.0 * alternating_series_check(10000).accelerated;
    const double a11 = sech_cos_integral(1.0, 1, h), a13 = sech_cos_integral(1.0, 3, h),
                 a15 = sech_cos_integral(1.0, 5, h);
    b.a_part = a11 + 21.0 * a13 - 20.0 * a15;
    b.a_part_closed = (1.0 + 21.0 - 100.0 / 6.0) * sech_cos_closed(1.0, 1);
    b.value = kSqrt2 / 60.0 * (-11.0 * b.log_integral + b.a_part);
    return b;
}

RealField phi3(const Grid& grid) {
    RealField f(grid.n);
    for (std::size_t j = 0; j < grid.n; ++j) f[j] = kSqrt2 * sech(grid.x(j));
    return f;
}

RealField f3_explicit(const Grid& grid) {
    RealField f(grid.n);
    for (std::size_t j = 0; j < grid.n; ++j) {
        const double x = grid.x(j), s = sech(x);
        f[j] = kSqrt2 * (-22.0 / 15.0 * log_bracket(x) * std::cosh(x) + 2.0 / 15.0 * s + 14.0 / 5.0 * std::pow(s, 3) -
                         8.0 / 3.0 * std::pow(s, 5));
    }
    return f;
}

RealField f3_consistent(const Grid& grid) {
    RealField f(grid.n);
    for (std::size_t j = 0; j < grid.n; ++j) {
        const double x = grid.x(j), s = sech(x);
        f[j] = kSqrt2 * (2.0 / 3.0 * log_bracket(x) * std::cosh(x) + 2.0 / 3.0 * s + 3.0 * std::pow(s, 3) -
                         4.0 * std::pow(s, 5));
    }
    return f;
}

RealField sstar_squared(const RealField& f, const Grid& grid) {
    const RealField phi = phi3(grid);
    RealField w(f.size());
    for (std::size_t j = 0; j < f.size(); ++j) w[j] = phi[j] * f[j];
    RealField d = d2(w, grid.h);
    for (std::size_t j = 0; j < f.size(); ++j) d[j] /= phi[j];
    return d;
}

SstarRhs sstar_rhs(const Grid& grid) {
    SstarRhs out;
    const RealField phi = phi3(grid);
    RealField g20(grid.n), g02(grid.n);
    for (std::size_t j = 0; j < grid.n; ++j) {
        const double t = std::pow(sech(grid.x(j)), 2);
        const double x10 = 1.0 - t, x01 = -t;
        // (p-1)/8 phi^{p-2}((p+1) a^2 + 2(p+1) a b + (p-3) b^2) at p = 3
        g20[j] = phi[j] * (x10 * x10 + 2.0 * x10 * x01);
        g02[j] = phi[j] * (x01 * x01 + 2.0 * x01 * x10);
    }
    out.f1.resize(grid.n);
    out.f2.resize(grid.n);
    for (std::size_t j = 0; j < grid.n; ++j) {
        out.f1[j] = g20[j] - g02[j];
        out.f2[j] = -(g20[j] + g02[j]);
    }
    out.psi = solve_lplus(3.0, grid, phi);
    out.a = -inner(phi, out.f1, grid.h) / (2.0 * inner(phi, out.psi, grid.h));
    const RealField lf2 = apply_lminus(3.0, grid, out.f2);
    out.rhs.resize(grid.n);
    for (std::size_t j = 0; j < grid.n; ++j) out.rhs[j] = 2.0 * out.f1[j] - lf2[j] + 4.0 * out.a * out.psi[j];
    return out;
}

double sstar_residual(const RealField& f, const Grid& grid, double x_max) {
    const RealField lhs = sstar_squared(f, grid);
    const SstarRhs r = sstar_rhs(grid);
    double num = 0, den = 0;
    for (std::size_t j = 0; j < grid.n; ++j) {
        if (std::abs(grid.x(j)) > x_max) continue;
        num = std::max(num, std::abs(lhs[j] - r.rhs[j]));
        den = std::max(den, std::abs(r.rhs[j]));
    }
    return num / std::max(den, 1e-300);
}

double cos_pairing_b(const RealField& f, const Grid& grid) {
    RealField c(grid.n);
    for (std::size_t j = 0; j < grid.n; ++j) c[j] = std::cos(grid.x(j)) * f[j];
    return simpson(c, grid.h) / 8.0;
}

double im_gamma1_closed() {
    const double r = kSqrt2;
    return (-164.0 / 105.0 + 59.0 / 63.0 * r) * kPi * sech(0.5 * kPi * (r - 1.0)) +
           (164.0 / 105.0 + 59.0 / 63.0 * r) * kPi * sech(0.5 * kPi * (r + 1.0));
}

double im_gamma1_ab(double h) {
    const double r = kSqrt2, m = r - 1.0, q = r + 1.0;
    auto A = [&](double a, int n) { return sech_cos_integral(a, n, h); };
    auto B = [&](double a, int n) { return sech_tanh_sin_integral(a, n, h); };
    return -4.0 * A(m, 1) + (12.0 - r) * A(m, 3) - 10.0 * A(m, 5) + (3.0 * r + 2.0) * A(m, 7) + 4.0 * A(q, 1) +
           (-12.0 - r) * A(q, 3) + 10.0 * A(q, 5) + (3.0 * r - 2.0) * A(q, 7) - r * B(m, 1) + 4.0 * B(m, 3) +
           (-6.0 + 4.0 * r) * B(m, 5) - r * B(m, 7) + r * B(q, 1) + 4.0 * B(q, 3) + (-6.0 - 4.0 * r) * B(q, 5) +
           r * B(q, 7);
}

double im_gamma1_inner(double h) {
    const double r = kSqrt2;
    auto integrand = [&](double x) {
        const double s = sech(x), t = std::tanh(x), c2 = std::cos(r * x), s2 = std::sin(r * x);
        const double u = -s * s * std::cos(x) + t * std::sin(x);
        const double v = (1.0 - s * s) * t * std::sin(x);
        return u * r * (s - 3.0 * std::pow(s, 5)) * c2 + u * (-4.0 * s + 6.0 * std::pow(s, 3)) * t * s2 +
               v * (-r * std::pow(s, 5) * c2 + 2.0 * std::pow(s, 3) * t * s2);
    };
    // Im Gamma_1(3) = 4b (sum of the three pairings), divided by 8b
    return 0.5 * simpson_fn(integrand, -kOracleHalfWidth, kOracleHalfWidth, h);
}

cplx exp_kernel_convolution(double x, double h) {
    const double ax = std::abs(x);
    auto k = [&](double y) { return std::exp(cplx(0, 1) * std::abs(ax - y)) * std::exp(-kSqrt3 * std::abs(y)); };
    return simpson_fn(k, -kOracleHalfWidth, 0.0, h) + simpson_fn(k, 0.0, ax, h) +
           simpson_fn(k, ax, ax + kOracleHalfWidth, h);
}

cplx exp_kernel_convolution_closed(double x) {
    const double ax = std::abs(x);
    return 0.5 * kSqrt3 * std::exp(cplx(0, ax)) + cplx(0, 0.5) * std::exp(-kSqrt3 * ax);
}

ZetaShape im_zeta3_shape(const RealField& f, const Grid& grid) {
    const std::size_t n = grid.n;
    // w = (2 sqrt3)^{-1} e^{-sqrt3 |.|} * f, split at the kink
    RealField w(n), k(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double xi = grid.x(i);
        for (std::size_t j = 0; j < n; ++j) k[j] = std::exp(-kSqrt3 * std::abs(xi - grid.x(j))) * f[j];
        w[i] = (simpson_nodes(k, grid.h, 0, i) + simpson_nodes(k, grid.h, i, n - 1)) / (2.0 * kSqrt3);
    }
    // Im((i/2) e^{i|.|} * w) = (1/2) cos * w
    ZetaShape out;
    RealField c(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double xi = grid.x(i);
        if (std::abs(xi) > 10.0 + 1e-12) continue;
        for (std::size_t j = 0; j < n; ++j) c[j] = std::cos(xi - grid.x(j)) * w[j];
        out.x.push_back(xi);
        out.im_zeta.push_back(0.5 * simpson(c, grid.h));
    }
    const auto mid = std::find_if(out.x.begin(), out.x.end(), [](double v) { return std::abs(v) < 1e-12; });
    out.b = out.im_zeta[std::size_t(mid - out.x.begin())];
    for (std::size_t i = 0; i < out.x.size(); ++i)
        out.max_deviation = std::max(out.max_deviation, std::abs(out.im_zeta[i] - out.b * std::cos(out.x[i])));
    out.max_deviation /= std::max(std::abs(out.b), 1e-300);
    return out;
}

IntertwiningCheck intertwining_check(int functions, unsigned seed, std::vector<double> steps) {
    IntertwiningCheck out;
    std::mt19937 rng(seed);
    std::uniform_real_distribution<double> amp(0.5, 1.5), width(0.3, 1.0), shift(-1.0, 1.0);
    struct Test {
        double a, beta, x0;
    };
    std::vector<Test> tests;
    for (int i = 0; i < functions; ++i) tests.push_back({amp(rng), width(rng), shift(rng)});
    for (double h : steps) {
        const Grid g = Grid::make(12.0, h);
        const RealField phi = phi3(g);
        RealField t(g.n);
        for (std::size_t j = 0; j < g.n; ++j) t[j] = std::pow(sech(g.x(j)), 2);
        auto op = [&](const RealField& u, double c) {
            RealField d = fd2(u, h), r(u.size());
            for (std::size_t j = 0; j < u.size(); ++j) r[j] = -d[j] + u[j] - c * t[j] * u[j];
            return r;
        };
        auto s2 = [&](const RealField& u) {
            RealField w(u.size());
            for (std::size_t j = 0; j < u.size(); ++j) w[j] = phi[j] * u[j];
            RealField d = fd2(w, h);
            for (std::size_t j = 0; j < u.size(); ++j) d[j] /= phi[j];
            return d;
        };
        double worst = 0;
        for (const Test& ts : tests) {
            RealField u(g.n);
            for (std::size_t j = 0; j < g.n; ++j) {
                const double y = g.x(j) - ts.x0;
                u[j] = ts.a * std::exp(-ts.beta * y * y);
            }
            // p = 3: L_+ = K - 6 sech^2, L_- = K - 2 sech^2, L_2 = L_3 = K
            const RealField lhs = op(op(s2(u), 6.0), 2.0);
            const RealField rhs = s2(op(op(u, 0.0), 0.0));
            double num = 0, den = 0;
            for (std::size_t j = 0; j < g.n; ++j) {
                if (std::abs(g.x(j)) > 8.0) continue;
                num = std::max(num, std::abs(lhs[j] - rhs[j]));
                den = std::max(den, std::abs(lhs[j]));
            }
            worst = std::max(worst, num / den);
        }
        out.h.push_back(h);
        out.residual.push_back(worst);
    }
    if (out.h.size() >= 2)
        out.observed_order = std::log(out.residual[out.residual.size() - 2] / out.residual.back()) /
                             std::log(out.h[out.h.size() - 2] / out.h.back());
    return out;
}

std::vector<OracleReport> p3_oracle_reports() {
    std::vector<OracleReport> rep;
    const double r2 = kSqrt2;
    rep.push_back(make_report("A_{1,1} = pi sech(pi/2)", sech_cos_integral(1.0, 1), kPi * sech(0.5 * kPi), 1e-10));
    for (double a : {1.0, r2 - 1.0, r2 + 1.0})
        rep.push_back(make_report("A_{a,3} = (1+a^2)/2 A_{a,1}, a=" + std::to_string(a), sech_cos_integral(a, 3),
                                  0.5 * (1.0 + a * a) * sech_cos_integral(a, 1), 1e-10));
    for (double a : {5.0, 10.0})
        rep.push_back(make_report("A_{a,1} closed form, a=" + std::to_string(a), sech_cos_integral(a, 1),
                                  sech_cos_closed(a, 1), 1e-10));
    rep.push_back(make_report("B_{1,1} = A_{1,1}", sech_tanh_sin_integral(1.0, 1), sech_cos_integral(1.0, 1), 1e-10));
    rep.push_back(make_report("B_{a,7} = a/7 A_{a,7}, a=sqrt2+1", sech_tanh_sin_integral(r2 + 1.0, 7),
                              (r2 + 1.0) / 7.0 * sech_cos_integral(r2 + 1.0, 7), 1e-10));

    rep.push_back(make_report("laplace n=1 against printed 1/5", laplace_cos_cosh(1), 0.2, 1e-12, false,
                              "printed value is half of the integral"));
    rep.back().advisory = true;
    for (int n : {1, 2, 3})
        rep.push_back(make_report("laplace n=" + std::to_string(n) + " = 2n^3/(4n^4+1)", laplace_cos_cosh(n),
                                  2.0 * std::pow(n, 3) / (4.0 * std::pow(n, 4) + 1.0), 1e-12));

    const AlternatingSeries s3 = alternating_series_check(1000), s4 = alternating_series_check(10000);
    OracleReport lb = make_report("alternating sum exceeds (1/24)(23701/1950 - pi^2)", s4.accelerated,
                                  s4.lower_bound, 0.0);
    lb.pass = s4.exceeds_bound;
    lb.note = "lower bound " + std::to_string(s4.lower_bound);
    rep.push_back(lb);
    rep.push_back(make_report("alternating sum stable 1e3 vs 1e4 terms", s3.accelerated, s4.accelerated, 1e-10));

    const BConstant b = b_constant();
    rep.push_back(make_report("A11 + 21 A13 - 20 A15 = (1+21-100/6) A11", b.a_part, b.a_part_closed, 1e-10));
    rep.push_back(make_report("log integral over R = -4 sum", b.log_integral, b.log_series, 1e-8));
    rep.push_back(make_report("log integral over [0,inf) = -2 sum", b.half_line_log, 0.5 * b.log_series, 1e-8));
    OracleReport bp = make_report("b > 0 (printed f3)", b.value, 0.0, 0.0);
    bp.pass = b.value > 0;
    rep.push_back(bp);

    const double cf = im_gamma1_closed();
    rep.push_back(make_report("(1/8b) Im Gamma_1(3) closed form", cf, -0.203, 0.002));
    rep.push_back(make_report("(1/8b) Im Gamma_1(3) A/B expansion by quadrature", im_gamma1_ab(), cf, 1e-9));
    rep.push_back(make_report("(1/8b) Im Gamma_1(3) from the pairing line", im_gamma1_inner(), cf, 1e-9, false,
                              "pairing line evaluates to one quarter of the A/B expansion"));
    rep.back().advisory = true;

    const Grid g = Grid::make(40.0, 0.005);
    const RealField fp = f3_explicit(g), fc = f3_consistent(g);
    rep.push_back(make_report("(S*)^2 f3 = rhs, printed f3", sstar_residual(fp, g), 0.0, 1e-6, false,
                              "printed coefficients do not solve the equation"));
    rep.back().advisory = true;
    rep.push_back(make_report("(S*)^2 f3 = rhs, derived f3", sstar_residual(fc, g), 0.0, 1e-6));
    rep.push_back(make_report("b = (1/8) int cos f3, printed f3", cos_pairing_b(fp, g), b.value, 1e-8));
    rep.push_back(make_report("b = (1/8) int cos f3, derived f3", cos_pairing_b(fc, g), 0.0, 1e-10, false,
                              "the derived f3 is orthogonal to cos"));

    const Grid gz = Grid::make(40.0, 0.01);
    const ZetaShape zs = im_zeta3_shape(f3_explicit(gz), gz);
    rep.push_back(make_report("Im zeta3 = b cos(x) shape, printed f3", zs.max_deviation, 0.0, 1e-6));
    rep.push_back(make_report("Im zeta3(0) = b", zs.b, b.value, 1e-8));
    for (double x : {0.0, 1.0, 3.0}) {
        const cplx d = exp_kernel_convolution(x) - exp_kernel_convolution_closed(x);
        rep.push_back(make_report("e^{i|.|} * e^{-sqrt3|.|} at x=" + std::to_string(int(x)), std::abs(d), 0.0, 1e-10));
    }
    const IntertwiningCheck ic = intertwining_check();
    rep.push_back(make_report("intertwining residual order", ic.observed_order, 2.0, 0.2, false,
                              "residual " + std::to_string(ic.residual.back())));
    return rep;
}

}  // namespace fgrlab
