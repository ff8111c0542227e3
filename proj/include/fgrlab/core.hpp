#pragma once

#include <array>
#include <string>
#include <vector>

#include "fgrlab/grid.hpp"

namespace fgrlab {

// throws Domain unless 1 < p < 5
void check_power(double p);

// phi_omega(x) = omega^{1/(p-1)} ((p+1)/2)^{1/(p-1)} sech^{2/(p-1)}((p-1) sqrt(omega) x / 2)
double soliton_value(double p, double omega, double x);
// d phi_omega / d omega, closed form
double soliton_domega(double p, double omega, double x);
RealField soliton_profile(double p, double omega, const Grid& grid);
RealField soliton_domega_profile(double p, double omega, const Grid& grid);
// Lambda_p phi = (x d/dx / 2 + 1/(p-1)) phi  (= d_omega phi_omega at omega = 1)
RealField lambda_p_phi(double p, const Grid& grid);

// a[N][n] of D^N f(psi)(w,...,w) = sum_n a_{N,n} |psi|^{p-1-2n} psi^{1-N+2n} w^{N-n} conj(w)^n
struct TaylorCoeffs {
    double p = 3.0;
    int order = 0;
    std::vector<std::vector<double>> a;
    double operator()(int N, int n) const { return a[N][n]; }
};
TaylorCoeffs taylor_coeffs(double p, int max_order);

// sech^2((p-1)x/2)
double potential_shape(double p, double x);
// 2x2 potential of H at one point, row-major {V11, V12, V21, V22}
std::array<double, 4> potential_at(double p, double x);
struct PotentialSamples {
    RealField v11, v12, v21, v22;
};
PotentialSamples potential_matrix(double p, const Grid& grid);

// Q = ||u||^2 / 2 ;  E = ||u'||^2 / 2 - int |u|^{p+1} / (p+1)
double mass(const ComplexField& u, const Grid& grid, std::vector<std::string>* warnings = nullptr);
double energy(double p, const ComplexField& u, const Grid& grid, std::vector<std::string>* warnings = nullptr);
double mass(const RealField& u, const Grid& grid);

// sup |-phi'' + omega phi - phi^p| with the 4th-order stencil
double static_residual(double p, double omega, const Grid& grid);

}  // namespace fgrlab
