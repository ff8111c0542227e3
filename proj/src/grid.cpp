#include "fgrlab/grid.hpp"

#include <algorithm>
#include <cmath>

namespace fgrlab {

const char* error_kind_name(ErrorKind k) {
    switch (k) {
        case ErrorKind::Domain: return "parameter-domain";
        case ErrorKind::UnsupportedOrder: return "unsupported-order";
        case ErrorKind::Data: return "data";
        case ErrorKind::Convergence: return "convergence";
        case ErrorKind::SpectralWindow: return "spectral-window";
        case ErrorKind::Degenerate: return "degenerate";
        case ErrorKind::Bracketing: return "bracketing";
        case ErrorKind::NearSingular: return "near-singular";
        case ErrorKind::EmbeddedSpectrum: return "embedded-spectrum";
        case ErrorKind::Conditioning: return "conditioning";
        case ErrorKind::Strip: return "strip";
        case ErrorKind::KernelSingularity: return "kernel-singularity";
        case ErrorKind::EmbeddedEigenvalue: return "embedded-eigenvalue";
        case ErrorKind::Instability: return "instability";
        case ErrorKind::OutOfTube: return "out-of-tube";
        case ErrorKind::Usage: return "usage";
    }
    return "unknown";
}

Grid Grid::make(double L, double h) {
    if (!(L > 0) || !(h > 0) || !std::isfinite(L) || !std::isfinite(h))
        throw Error(ErrorKind::Domain, "grid: L and h must be positive");
    const double cells = 2.0 * L / h;
    const double r = std::round(cells);
    if (std::abs(cells - r) > 1e-9 * std::max(1.0, r))
        throw Error(ErrorKind::Domain, "grid: 2L/h must be an integer");
    auto c = static_cast<std::size_t>(r);
    if (c % 2 != 0) throw Error(ErrorKind::Domain, "grid: node count must be odd (2L/h even)");
    if (c < 8) throw Error(ErrorKind::Domain, "grid: too few nodes");
    Grid g;
    g.L = L;
    g.h = h;
    g.n = c + 1;
    return g;
}

RealField Grid::coords() const {
    RealField x(n);
    for (std::size_t j = 0; j < n; ++j) x[j] = this->x(j);
    // exact mirror symmetry
    for (std::size_t j = 0; j < n / 2; ++j) x[n - 1 - j] = -x[j];
    x[center()] = 0.0;
    return x;
}

std::size_t Grid::index_at_or_after(double a) const {
    double t = std::ceil((a + L) / h - 1e-9);
    if (t < 0) return 0;
    return std::min<std::size_t>(n - 1, static_cast<std::size_t>(t));
}

namespace {
template <class T>
T simpson_impl(const std::vector<T>& f, double h, std::size_t i0, std::size_t i1) {
    if (i1 <= i0) return T(0);
    if ((i1 - i0) % 2 != 0) throw Error(ErrorKind::Data, "simpson: even interval count required");
    T s = f[i0] + f[i1];
    T odd(0), even(0);
    for (std::size_t j = i0 + 1; j < i1; j += 2) odd += f[j];
    for (std::size_t j = i0 + 2; j < i1; j += 2) even += f[j];
    return (s + 4.0 * odd + 2.0 * even) * (h / 3.0);
}

template <class T>
std::vector<T> d1_impl(const std::vector<T>& f, double h) {
    const std::size_t n = f.size();
    std::vector<T> g(n);
    const double c = 1.0 / (12.0 * h);
    for (std::size_t j = 2; j + 2 < n; ++j)
        g[j] = (f[j - 2] - 8.0 * f[j - 1] + 8.0 * f[j + 1] - f[j + 2]) * c;
    auto fwd = [&](std::size_t j) {
        return (-25.0 * f[j] + 48.0 * f[j + 1] - 36.0 * f[j + 2] + 16.0 * f[j + 3] - 3.0 * f[j + 4]) * c;
    };
    auto bwd = [&](std::size_t j) {
        return (25.0 * f[j] - 48.0 * f[j - 1] + 36.0 * f[j - 2] - 16.0 * f[j - 3] + 3.0 * f[j - 4]) * c;
    };
    g[0] = fwd(0);
    g[1] = (-3.0 * f[0] - 10.0 * f[1] + 18.0 * f[2] - 6.0 * f[3] + f[4]) * c;
    g[n - 1] = bwd(n - 1);
    g[n - 2] = (3.0 * f[n - 1] + 10.0 * f[n - 2] - 18.0 * f[n - 3] + 6.0 * f[n - 4] - f[n - 5]) * c;
    return g;
}

template <class T>
std::vector<T> d2_impl(const std::vector<T>& f, double h) {
    const std::size_t n = f.size();
    std::vector<T> g(n);
    const double c = 1.0 / (12.0 * h * h);
    for (std::size_t j = 2; j + 2 < n; ++j)
        g[j] = (-f[j - 2] + 16.0 * f[j - 1] - 30.0 * f[j] + 16.0 * f[j + 1] - f[j + 2]) * c;
    // one-sided, 4th order (6-point)
    auto fwd = [&](std::size_t j) {
        return (45.0 * f[j] - 154.0 * f[j + 1] + 214.0 * f[j + 2] - 156.0 * f[j + 3] + 61.0 * f[j + 4] -
                10.0 * f[j + 5]) * c;
    };
    auto bwd = [&](std::size_t j) {
        return (45.0 * f[j] - 154.0 * f[j - 1] + 214.0 * f[j - 2] - 156.0 * f[j - 3] + 61.0 * f[j - 4] -
                10.0 * f[j - 5]) * c;
    };
    g[0] = fwd(0);
    g[1] = (10.0 * f[0] - 15.0 * f[1] - 4.0 * f[2] + 14.0 * f[3] - 6.0 * f[4] + f[5]) * c;
    g[n - 1] = bwd(n - 1);
    g[n - 2] = (10.0 * f[n - 1] - 15.0 * f[n - 2] - 4.0 * f[n - 3] + 14.0 * f[n - 4] - 6.0 * f[n - 5] + f[n - 6]) * c;
    return g;
}

template <class T>
std::vector<T> d2_dir_impl(const std::vector<T>& f, double h) {
    const std::size_t n = f.size();
    std::vector<T> g(n);
    const double c = 1.0 / (12.0 * h * h);
    auto at = [&](std::ptrdiff_t j) -> T {
        if (j < 0 || j >= static_cast<std::ptrdiff_t>(n)) return T(0);
        return f[static_cast<std::size_t>(j)];
    };
    for (std::size_t j = 0; j < n; ++j) {
        auto k = static_cast<std::ptrdiff_t>(j);
        g[j] = (-at(k - 2) + 16.0 * at(k - 1) - 30.0 * f[j] + 16.0 * at(k + 1) - at(k + 2)) * c;
    }
    return g;
}
}  // namespace

double simpson(const RealField& f, double h) { return simpson_impl(f, h, 0, f.size() - 1); }
cplx simpson(const ComplexField& f, double h) { return simpson_impl(f, h, 0, f.size() - 1); }
double simpson_range(const RealField& f, double h, std::size_t i0, std::size_t i1) {
    return simpson_impl(f, h, i0, i1);
}

double inner(const RealField& a, const RealField& b, double h) {
    RealField t(a.size());
    for (std::size_t j = 0; j < a.size(); ++j) t[j] = a[j] * b[j];
    return simpson(t, h);
}
double inner(const Spinor& a, const Spinor& b, double h) {
    RealField t(a.size());
    for (std::size_t j = 0; j < a.size(); ++j) t[j] = a.first[j] * b.first[j] + a.second[j] * b.second[j];
    return simpson(t, h);
}
double l2norm(const RealField& a, double h) { return std::sqrt(std::max(0.0, inner(a, a, h))); }
double l2norm(const Spinor& a, double h) { return std::sqrt(std::max(0.0, inner(a, a, h))); }
double sup_norm(const RealField& a) {
    double m = 0;
    for (double v : a) m = std::max(m, std::abs(v));
    return m;
}
double sup_norm(const Spinor& a) { return std::max(sup_norm(a.first), sup_norm(a.second)); }

RealField d1(const RealField& f, double h) { return d1_impl(f, h); }
RealField d2(const RealField& f, double h) { return d2_impl(f, h); }
ComplexField d1(const ComplexField& f, double h) { return d1_impl(f, h); }
ComplexField d2(const ComplexField& f, double h) { return d2_impl(f, h); }
RealField d2_dirichlet(const RealField& f, double h) { return d2_dir_impl(f, h); }
ComplexField d2_dirichlet(const ComplexField& f, double h) { return d2_dir_impl(f, h); }

RealField fold_even(const RealField& full) {
    const std::size_t c = full.size() / 2;
    return RealField(full.begin() + static_cast<std::ptrdiff_t>(c), full.end());
}

RealField unfold_even(const RealField& half) {
    const std::size_t m = half.size();
    RealField full(2 * m - 1);
    for (std::size_t j = 0; j < m; ++j) {
        full[m - 1 + j] = half[j];
        full[m - 1 - j] = half[j];
    }
    return full;
}

double even_defect(const RealField& f) {
    double m = 0;
    const std::size_t n = f.size();
    for (std::size_t j = 0; j < n / 2; ++j) m = std::max(m, std::abs(f[j] - f[n - 1 - j]));
    return m;
}

bool tails_below(const RealField& f, double tol) {
    return std::abs(f.front()) < tol && std::abs(f.back()) < tol;
}

}  // namespace fgrlab
