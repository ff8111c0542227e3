#pragma once

#include <complex>
#include <map>
#include <utility>
#include <vector>

#include "fgrlab/discrete_operator.hpp"
#include "fgrlab/grid.hpp"

namespace fgrlab {

// m = (m1, m2) labels z^{m1} conj(z)^{m2}
using MultiIndex = std::pair<int, int>;
inline MultiIndex swap_index(const MultiIndex& m) { return {m.second, m.first}; }
inline int order_of(const MultiIndex& m) { return m.first + m.second; }

// NR_3 or NR_4
std::vector<MultiIndex> nonresonant_set(int n);

using FieldMap = std::map<MultiIndex, RealField>;

// z^m coefficients of sum_{N>=2} (1/N!) D^N f(phi)(w,...,w), w = sum_mu z^mu xi_mu, for all |m| = order.
// Only xi entries of order < `order` contribute.
FieldMap assemble_sources(double p, const Grid& grid, const FieldMap& xi, int order);
// xi map seeded with (1,0), (0,1)
FieldMap mode_coefficients(const InternalMode& mode);

FieldMap assemble_sources_order2(double p, const Grid& grid, const InternalMode& mode);
FieldMap solve_order2(double p, const Grid& grid, const InternalMode& mode, const FieldMap& sources);
// xi must hold orders 1 and 2
FieldMap assemble_sources_order3(double p, const Grid& grid, const FieldMap& xi);

struct Lambda21Result {
    double lambda21 = 0;             // bordered-solve multiplier
    double lambda21_projection = 0;  // -2 <(xi10, xi01), (G21, G12)>
    RealField xi21, xi12;
    double residual = 0;
};
Lambda21Result compute_lambda21_and_xi21(double p, const Grid& grid, const InternalMode& mode, const RealField& g21,
                                         const RealField& g12);

struct RefinedProfileSet {
    int order = 3;
    double p = 0;
    Grid grid;
    InternalMode mode;
    FieldMap xi;         // every m in NR_n
    FieldMap G;          // every 2 <= |m| <= n
    double lambda21 = 0;
    double lambda21_projection = 0;
    std::map<MultiIndex, double> solve_residuals;  // relative back-substitution residuals
    ComplexField gperp_n0, gperp_0n;
};

// full order-n pipeline (n in {3,4}); n = 4 needs 3 lambda < 1
RefinedProfileSet build_refined_profile(double p, const Grid& grid, int n, const InternalMode& mode);
RefinedProfileSet build_refined_profile(double p, const Grid& grid, int n);

// order-4 step applied to an order-3 set (adds xi30, xi03, xi31, xi13, xi22 and the order-4 sources)
void assemble_order4(RefinedProfileSet& set);

// symplectic projection onto the complement of span{i phi, Lambda_p phi, xi_1, xi_2} at (omega, z) = (1, 0)
class PerpProjector {
public:
    PerpProjector(double p, const Grid& grid, const InternalMode& mode);
    ComplexField apply(const ComplexField& psi) const;
    // <phi, Lambda_p phi>
    double phi_lambda_pairing() const { return phi_lambda_; }

private:
    Grid grid_;
    std::vector<ComplexField> basis_;
    double omega_inv_[4][4];
    double phi_lambda_ = 0;
};

// <a, b> = Re int a conj(b)
double real_pairing(const ComplexField& a, const ComplexField& b, double h);

std::pair<ComplexField, ComplexField> project_Gperp(double p, const Grid& grid, const InternalMode& mode,
                                                    const RealField& g_n0, const RealField& g_0n);

// kappa = min(0.1, (p-1)/8)
double residual_weight_kappa(double p);
// || sech(kappa x) (R[z] - R[0]) ||_{L^2}; R[0] is the discrete static residual of the sampled soliton
double residual_scaling(const RefinedProfileSet& set, std::complex<double> z);
// least-squares log-log slope of residual_scaling over |z| in `radii` along arg z = angle
double residual_slope(const RefinedProfileSet& set, const std::vector<double>& radii, double angle = 0.7);

}  // namespace fgrlab
