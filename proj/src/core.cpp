#include "fgrlab/core.hpp"

#include <cmath>

namespace fgrlab {

void check_power(double p) {
    if (!std::isfinite(p) || !(p > 1.0) || !(p < 5.0))
        throw Error(ErrorKind::Domain, "p must lie in (1,5), got " + std::to_string(p), p);
}

namespace {
void check_omega(double omega) {
    if (!std::isfinite(omega) || !(omega > 0.0))
        throw Error(ErrorKind::Domain, "omega must be positive", omega);
}
}  // namespace

double soliton_value(double p, double omega, double x) {
    const double q = p - 1.0;
    const double amp = std::pow(omega * (p + 1.0) / 2.0, 1.0 / q);
    // sech^{2/q}(y) = (2 e^{-|y|} / (1 + e^{-2|y|}))^{2/q}, safe for large |y|
    const double y = std::abs(0.5 * q * std::sqrt(omega) * x);
    const double e = std::exp(-y);
    return amp * std::pow(2.0 * e / (1.0 + e * e), 2.0 / q);
}

double soliton_domega(double p, double omega, double x) {
    // d/domega [omega^{1/q} phi_1(sqrt(omega) x)] = (1/q) phi / omega + x phi_1'(s x)/(2 sqrt(omega)) omega^{1/q}
    const double q = p - 1.0;
    const double s = std::sqrt(omega);
    const double phi = soliton_value(p, omega, x);
    const double y = 0.5 * q * s * x;
    // phi_1'(r) = -tanh(q r / 2) phi_1(r)
    const double dphi1 = -std::tanh(y) * soliton_value(p, 1.0, s * x);
    return phi / (q * omega) + std::pow(omega, 1.0 / q) * x * dphi1 / (2.0 * s);
}

RealField soliton_profile(double p, double omega, const Grid& grid) {
    check_power(p);
    check_omega(omega);
    const RealField x = grid.coords();
    RealField f(grid.n);
    for (std::size_t j = 0; j < grid.n; ++j) f[j] = soliton_value(p, omega, x[j]);
    return f;
}

RealField soliton_domega_profile(double p, double omega, const Grid& grid) {
    check_power(p);
    check_omega(omega);
    const RealField x = grid.coords();
    RealField f(grid.n);
    for (std::size_t j = 0; j < grid.n; ++j) f[j] = soliton_domega(p, omega, x[j]);
    return f;
}

RealField lambda_p_phi(double p, const Grid& grid) { return soliton_domega_profile(p, 1.0, grid); }

TaylorCoeffs taylor_coeffs(double p, int max_order) {
    check_power(p);
    if (max_order < 0) throw Error(ErrorKind::Domain, "taylor order must be >= 0");
    if (max_order > 4)
        throw Error(ErrorKind::UnsupportedOrder, "f is not smooth enough beyond the 4th derivative", max_order);
    TaylorCoeffs t;
    t.p = p;
    t.order = max_order;
    t.a.assign(static_cast<std::size_t>(max_order) + 1, {});
    t.a[0] = {1.0};
    if (max_order >= 1) t.a[1] = {(p + 1.0) / 2.0, (p - 1.0) / 2.0};
    for (int N = 2; N <= max_order; ++N) {
        t.a[N].assign(static_cast<std::size_t>(N) + 1, 0.0);
        for (int n = 0; n <= N; ++n) {
            double v = 0.0;
            if (n >= 1) v += (p + 1.0 - 2.0 * n) / 2.0 * t.a[N - 1][n - 1];
            if (n <= N - 1) v += ((p + 3.0) / 2.0 + n - N) * t.a[N - 1][n];
            t.a[N][n] = v;
        }
    }
    return t;
}

double potential_shape(double p, double x) {
    const double y = std::abs(0.5 * (p - 1.0) * x);
    const double e = std::exp(-2.0 * y);
    // sech^2 y = 4 e^{-2y} / (1 + e^{-2y})^2
    return 4.0 * e / ((1.0 + e) * (1.0 + e));
}

std::array<double, 4> potential_at(double p, double x) {
    const double s = potential_shape(p, x);
    const double a = (p + 1.0) * (p + 1.0) / 4.0;
    const double b = (p * p - 1.0) / 4.0;
    return {-a * s, -b * s, b * s, a * s};
}

PotentialSamples potential_matrix(double p, const Grid& grid) {
    check_power(p);
    PotentialSamples v;
    v.v11.resize(grid.n);
    v.v12.resize(grid.n);
    v.v21.resize(grid.n);
    v.v22.resize(grid.n);
    const RealField x = grid.coords();
    for (std::size_t j = 0; j < grid.n; ++j) {
        auto m = potential_at(p, x[j]);
        v.v11[j] = m[0];
        v.v12[j] = m[1];
        v.v21[j] = m[2];
        v.v22[j] = m[3];
    }
    return v;
}

namespace {
void check_finite(const ComplexField& u) {
    for (const auto& z : u)
        if (!std::isfinite(z.real()) || !std::isfinite(z.imag()))
            throw Error(ErrorKind::Data, "non-finite sample in field");
}
}  // namespace

double mass(const ComplexField& u, const Grid& grid, std::vector<std::string>* warnings) {
    check_finite(u);
    RealField d(u.size());
    for (std::size_t j = 0; j < u.size(); ++j) d[j] = std::norm(u[j]);
    if (warnings && !tails_below(d, 1e-16)) warnings->push_back("mass: integrand not below 1e-16 at +-L");
    return 0.5 * simpson(d, grid.h);
}

double mass(const RealField& u, const Grid& grid) {
    ComplexField c(u.begin(), u.end());
    return mass(c, grid);
}

double energy(double p, const ComplexField& u, const Grid& grid, std::vector<std::string>* warnings) {
    check_finite(u);
    const ComplexField du = d1(u, grid.h);
    RealField d(u.size());
    for (std::size_t j = 0; j < u.size(); ++j)
        d[j] = 0.5 * std::norm(du[j]) - std::pow(std::abs(u[j]), p + 1.0) / (p + 1.0);
    if (warnings && !tails_below(d, 1e-16)) warnings->push_back("energy: integrand not below 1e-16 at +-L");
    return simpson(d, grid.h);
}

double static_residual(double p, double omega, const Grid& grid) {
    const RealField phi = soliton_profile(p, omega, grid);
    const RealField dd = d2(phi, grid.h);
    double m = 0;
    for (std::size_t j = 0; j < grid.n; ++j)
        m = std::max(m, std::abs(-dd[j] + omega * phi[j] - std::pow(phi[j], p)));
    return m;
}

}  // namespace fgrlab
