#pragma once

#include <complex>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace fgrlab {

using cplx = std::complex<double>;
using RealField = std::vector<double>;
using ComplexField = std::vector<cplx>;

enum class ErrorKind {
    Domain,
    UnsupportedOrder,
    Data,
    Convergence,
    SpectralWindow,
    Degenerate,
    Bracketing,
    NearSingular,
    EmbeddedSpectrum,
    Conditioning,
    Strip,
    KernelSingularity,
    EmbeddedEigenvalue,
    Instability,
    OutOfTube,
    Usage,
};

const char* error_kind_name(ErrorKind k);

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what, double value = 0.0)
        : std::runtime_error(what), kind_(kind), value_(value) {}
    ErrorKind kind() const { return kind_; }
    // diagnostic number attached to the failure (last residual, distance, ...)
    double value() const { return value_; }

private:
    ErrorKind kind_;
    double value_;
};

// Symmetric uniform lattice x_j = -L + j h on [-L, L] with an odd node count.
struct Grid {
    double L = 50.0;
    double h = 0.005;
    std::size_t n = 20001;

    static Grid make(double L, double h);

    double x(std::size_t j) const { return -L + static_cast<double>(j) * h; }
    std::size_t center() const { return n / 2; }
    // nodes on [0, L]
    std::size_t half() const { return n / 2 + 1; }
    RealField coords() const;
    // first node with x >= a
    std::size_t index_at_or_after(double a) const;
};

template <class T>
struct SpinorT {
    std::vector<T> first, second;
    SpinorT() = default;
    SpinorT(std::vector<T> a, std::vector<T> b) : first(std::move(a)), second(std::move(b)) {}
    explicit SpinorT(std::size_t n) : first(n), second(n) {}
    std::size_t size() const { return first.size(); }
};
using Spinor = SpinorT<double>;
using ComplexSpinor = SpinorT<cplx>;

// composite Simpson over the whole grid
double simpson(const RealField& f, double h);
cplx simpson(const ComplexField& f, double h);
// Simpson over nodes [i0, i1] (i1 - i0 even)
double simpson_range(const RealField& f, double h, std::size_t i0, std::size_t i1);
double inner(const RealField& a, const RealField& b, double h);
double inner(const Spinor& a, const Spinor& b, double h);
double l2norm(const RealField& a, double h);
double l2norm(const Spinor& a, double h);
double sup_norm(const RealField& a);
double sup_norm(const Spinor& a);

// 4th-order derivatives; centered inside, one-sided at the two ends on each side
RealField d1(const RealField& f, double h);
RealField d2(const RealField& f, double h);
ComplexField d1(const ComplexField& f, double h);
ComplexField d2(const ComplexField& f, double h);
// 4th-order second difference with zero Dirichlet ghosts (matches the banded operators)
RealField d2_dirichlet(const RealField& f, double h);
ComplexField d2_dirichlet(const ComplexField& f, double h);

// even-sector helpers: samples on [0, L] <-> full grid
RealField fold_even(const RealField& full);
RealField unfold_even(const RealField& half);
double even_defect(const RealField& f);

// tail check |f(+-L)| below tol
bool tails_below(const RealField& f, double tol);

}  // namespace fgrlab
