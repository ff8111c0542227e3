#pragma once

#include <string>
#include <vector>

#include "fgrlab/grid.hpp"

namespace fgrlab {

struct OracleReport {
    std::string name;
    double value = 0;
    double reference = 0;
    double abs_error = 0;
    double rel_error = 0;
    double tolerance = 0;
    bool relative = false;  // tolerance applies to rel_error
    bool pass = false;
    // documents a printed formula that disagrees with direct evaluation; shown but not counted by the exit code
    bool advisory = false;
    std::string note;
};
OracleReport make_report(const std::string& name, double value, double reference, double tol, bool relative = false,
                         const std::string& note = {});

// Simpson step used by every oracle quadrature
inline constexpr double kOracleStep = 0.0025;
inline constexpr double kOracleHalfWidth = 40.0;
// the e^{-(2n+1)x} Laplace integrands need a finer step for 1e-12
inline constexpr double kLaplaceStep = kOracleStep / 8.0;

// A_{a,n} = int sech^n(x) cos(ax) dx over [-40, 40]
double sech_cos_integral(double a, int n, double h = kOracleStep);
// B_{a,n} = int sech^n(x) tanh(x) sin(ax) dx over [-40, 40]
double sech_tanh_sin_integral(double a, int n, double h = kOracleStep);
// A_{a,1} = pi sech(pi a / 2) lifted by A_{a,n+2} = (n^2 + a^2)/(n^2 + n) A_{a,n}
double sech_cos_closed(double a, int n);
// B_{a,n} = (a / n) A_{a,n}
double sech_tanh_sin_closed(double a, int n);

// int_0^inf cos(x) e^{-2nx} cosh(x) dx by Simpson on [0, 40]
double laplace_cos_cosh(int n, double h = kLaplaceStep);
// direct evaluation: (1/2)((2n-1)/((2n-1)^2+1) + (2n+1)/((2n+1)^2+1)) = 2n^3/(4n^4+1)
double laplace_cos_cosh_closed(int n);
// the printed value n^3/(4n^4+1)
double laplace_cos_cosh_printed(int n);

struct AlternatingSeries {
    int terms = 0;
    double partial = 0;      // S_N = sum_{n<=N} (-1)^{n-1} n^2/(4n^4+1)
    double tail_bound = 0;   // |S - S_N| <= next term
    double accelerated = 0;  // repeated averaging of the last partial sums
    double first_three = 0;  // 1/5 - 4/65 + 9/325
    double lower_bound = 0;  // (1/24)(23701/1950 - pi^2)
    bool exceeds_bound = false;
};
AlternatingSeries alternating_series_check(int terms);

struct BConstant {
    double value = 0;          // (sqrt2/60)(-11 I + A11 + 21 A13 - 20 A15)
    double log_integral = 0;   // I = int cos(x)(x tanh x - log(e^x + e^-x)) cosh(x) dx over R
    double log_series = 0;     // -4 sum (-1)^{n-1} n^2/(4n^4+1), the series route for I
    double half_line_log = 0;  // the same integral over [0, inf)
    double a_part = 0;         // A11 + 21 A13 - 20 A15 by quadrature
    double a_part_closed = 0;  // (1 + 21 - 100/6) A11
};
BConstant b_constant(double h = kOracleStep);

// phi_3 = sqrt2 sech
RealField phi3(const Grid& grid);
// the printed f_3 (coefficients -22/15, 2/15, 14/5, -8/3 times sqrt2)
RealField f3_explicit(const Grid& grid);
// solution of (S*)^2 f = 2F1 - L_- F2 + 4 a psi with F assembled from G_(2,0), G_(0,2) at p = 3:
// sqrt2 (2/3 (x tanh x - log(2cosh x)) cosh x + 2/3 sech + 3 sech^3 - 4 sech^5)
RealField f3_consistent(const Grid& grid);
// (S*)^2 f = phi^{-1} (phi f)'' with phi = phi_3, 4th-order differences
RealField sstar_squared(const RealField& f, const Grid& grid);
struct SstarRhs {
    RealField rhs, f1, f2, psi;
    double a = 0;
};
// 2F1 - L_- F2 + 4 a psi at p = 3 (lambda = 1) from G-terms with xi_(1,0) = 1 - sech^2, xi_(0,1) = -sech^2;
// psi = L_+^{-1} phi solved on the grid
SstarRhs sstar_rhs(const Grid& grid);
// sup over |x| <= x_max of |(S*)^2 f - rhs| / sup |rhs|
double sstar_residual(const RealField& f, const Grid& grid, double x_max = 10.0);

// b = (1/8) int cos(x) f(x) dx, the coefficient of Im zeta3 = b cos x
double cos_pairing_b(const RealField& f, const Grid& grid);

// (sqrt2 - 1) and (sqrt2 + 1) closed form of (1/8b) Im Gamma_1(3)
double im_gamma1_closed();
// the A/B expansion with every A, B by quadrature
double im_gamma1_ab(double h = kOracleStep);
// (1/2)(<u, ...> + <u, ...> + <v, ...>): the inner-product line divided by 8b, by quadrature
double im_gamma1_inner(double h = kOracleStep);

// int e^{i|x-y|} e^{-sqrt3 |y|} dy by Simpson on [-40, 40] split at 0 and x
cplx exp_kernel_convolution(double x, double h = kOracleStep);
cplx exp_kernel_convolution_closed(double x);

struct ZetaShape {
    double b = 0;              // Im zeta3(0)
    double max_deviation = 0;  // sup_{|x|<=10} |Im zeta3 - b cos x| / |b|
    RealField x, im_zeta;
};
// Im of (-d^2 - 1 - i0)^{-1}(-d^2 + 3)^{-1} f by the two kernel convolutions
ZetaShape im_zeta3_shape(const RealField& f, const Grid& grid);

struct IntertwiningCheck {
    std::vector<double> h;             // grid steps
    // max over test functions of relative sup residual on |x| <= 8; below h ~ 0.01 the four composed
    // second differences are roundoff dominated (~eps / h^8)
    std::vector<double> residual;
    double observed_order = 0;
};
// L_- L_+ (S*)^2 u = (S*)^2 L_3 L_2 u at p = 3 on random smooth decaying u, 2nd-order differences
IntertwiningCheck intertwining_check(int functions = 5, unsigned seed = 7, std::vector<double> steps = {0.08, 0.04, 0.02});

// the full table
std::vector<OracleReport> p3_oracle_reports();

}  // namespace fgrlab
