#pragma once

#include <array>
#include <string>
#include <vector>

#include "fgrlab/discrete_operator.hpp"
#include "fgrlab/grid.hpp"

namespace fgrlab {

enum class JostSpecies { F1, F2, F3, F4 };
const char* species_name(JostSpecies s);

// sqrt(2 + k^2), principal branch
cplx jost_s(cplx k);

// Lattice and iteration controls. Nodes are x_min + i h with h = grid.h / refine,
// so every grid node inside [x_min, x_max] is a lattice node.
struct JostOptions {
    double x_min = -12.0;
    double x_max = 0.0;    // 0: max(anchor + 6, 40 / (p - 1)) rounded to the lattice
    double anchor = 0.0;   // 0: 4 / (p - 1); canonical gauge anchor and f4 Volterra start
    int refine = 1;
    double tol = 1e-12;
    int max_iter = 200;
    double potential_scale = 1.0;  // 0 switches the potential off
    double strip_gamma = 0.0;      // 0: (p - 1) / 2
    double strip_eps0 = 0.05;
};

struct JostSolution {
    JostSpecies species = JostSpecies::F1;
    double p = 0;
    cplx k;
    double h = 0;
    RealField x;
    ComplexSpinor f, df;   // f and f'
    ComplexSpinor m, dm;   // m = e^{-mu x} f with mu = ik, -ik, -s, s for f1..f4
    int iterations = 0;
    double correction = 0;  // last Picard correction (relative sup norm)
    // f1: u(x_anchor) fixed from the large-x series; f4: coefficients of the Wronskian corrections
    double anchor = 0;
    cplx c1, c2, d3;
    std::vector<std::string> notes;

    std::size_t size() const { return x.size(); }
    // index of the lattice node closest to xv; throws Domain when outside the lattice
    std::size_t index(double xv) const;
    std::array<cplx, 2> value(std::size_t i) const { return {f.first[i], f.second[i]}; }
    std::array<cplx, 2> deriv(std::size_t i) const { return {df.first[i], df.second[i]}; }
};

// Convergent expansion f = e^{mu x} sum_j a_j zeta^j, zeta = e^{-(p-1)x}, valid for x > 0.
// Fixes the canonical member of each Jost family (no e^{-sx} admixture in f1 and f4).
struct JostSeries {
    JostSpecies species = JostSpecies::F1;
    double p = 0;
    cplx k, mu;
    std::vector<std::array<cplx, 2>> a;
    void eval(double x, std::array<cplx, 2>& f, std::array<cplx, 2>& df) const;
};
JostSeries jost_series(double p, cplx k, JostSpecies species, double x_from, double potential_scale = 1.0);

JostSolution jost_f3(double p, cplx k, const Grid& grid, const JostOptions& opt = {});
JostSolution jost_f1(double p, cplx k, const Grid& grid, const JostOptions& opt = {});
JostSolution jost_f1(double p, cplx k, const Grid& grid, const JostOptions& opt, const JostSolution& f3);
// f2(x, k) = conj(f1(x, conj k))
JostSolution jost_f2(double p, cplx k, const Grid& grid, const JostOptions& opt = {});
JostSolution conjugate_species(const JostSolution& f1_at_conj_k);
JostSolution jost_f4(double p, cplx k, const Grid& grid, const JostOptions& opt = {});

// W[f, g] = f'^T g - f^T g'
cplx wronskian(const std::array<cplx, 2>& f, const std::array<cplx, 2>& df, const std::array<cplx, 2>& g,
               const std::array<cplx, 2>& dg);
cplx wronskian(const JostSolution& a, const JostSolution& b, std::size_t i);
// W[f_a, g_b](x) with g_b(x) = f_b(-x)
cplx reflected_wronskian(const JostSolution& a, const JostSolution& b, double x);

// march H f = (k^2 + 1) f from (x0, f0, df0) through the given nodes (monotone, starting at x0)
void march_jost_ode(double p, cplx k, double x0, const std::array<cplx, 2>& f0, const std::array<cplx, 2>& df0,
                    const RealField& nodes, ComplexSpinor& f, ComplexSpinor& df, double potential_scale = 1.0);

struct ScatteringData {
    double p = 0;
    cplx k;
    std::array<cplx, 4> D{};  // row-major W[F1, G2] at x = 0
    cplx det;
    // W[f_a, g_b] at x = 0 for a, b in {f1, f3}: {11, 13, 31, 33}
    std::array<cplx, 4> wronskians{};
    // max relative entry change of D over x in {-5, 0, 5} (negative when not evaluated)
    double x_variation = -1;
};
ScatteringData scattering_matrix(double p, cplx k, const Grid& grid, const JostOptions& opt = {});
ScatteringData scattering_matrix(const JostSolution& f1, const JostSolution& f3, bool check_x = true);
std::array<cplx, 4> scattering_matrix_at(const JostSolution& f1, const JostSolution& f3, double x);

// p = 3 closed forms
std::array<cplx, 2> p3_f1(double x, cplx k);
std::array<cplx, 2> p3_f3(double x, cplx k);
std::array<cplx, 2> p3_f4(double x, cplx k);
cplx p3_det_d(cplx k);

struct ResonanceRow {
    double p = 0;
    cplx det;
    bool ok = true;
    bool flag = false;  // |det| below threshold or real part changes sign against the previous row
    std::string error;
};
struct ResonanceSweep {
    std::vector<ResonanceRow> rows;
    double min_modulus = 0;
    double flag_threshold = 1e-8;
    std::vector<double> flagged_p;
};
ResonanceSweep resonance_sweep(double p_min, double p_max, int steps, const Grid& grid, const JostOptions& opt = {});

struct ImaginaryRoot {
    double p = 0;
    double beta = 0;  // k = i beta
    double lambda = 0;
    double det_imag = 0;  // largest |Im det D| seen on the axis (should be roundoff)
    int evaluations = 0;
};
// root of det D(p, i beta) for beta in the bracket; bracket {0, 0} scans (0.002, 0.95)
ImaginaryRoot eigen_root_imaginary_axis(double p, const Grid& grid, std::array<double, 2> beta_bracket = {0, 0},
                                        const JostOptions& opt = {});

// lambda(p) on `points` samples of [p_min, p_max] from the imaginary-axis root; near p = 3 the mode decays
// like e^{-beta |x|} with beta ~ 1e-3, out of reach of any truncated lattice
MonotonicityAudit audit_monotonicity_jost(double p_min, double p_max, int points, const Grid& grid);

}  // namespace fgrlab
