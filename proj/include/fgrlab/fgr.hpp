#pragma once

#include <string>
#include <vector>

#include "fgrlab/discrete_operator.hpp"
#include "fgrlab/grid.hpp"
#include "fgrlab/jost.hpp"
#include "fgrlab/refined_profile.hpp"

namespace fgrlab {

struct EmbeddedSolution {
    double p = 0;
    double energy = 0;   // n lambda
    double kappa = 0;    // sqrt(energy - 1)
    RealField g_n0, g_0n;  // components of g_n on the grid
    cplx det_d;            // det D(p, kappa)
    double theta = 0;      // phase with Re(e^{i theta} g~) closest to a multiple of g_n
    double theta_fit_residual = 0;
    double amplitude_raw = 0;  // asymptotic amplitude before scaling to 1
    double phase_delta = 0;    // g_n0 ~ cos(kappa x + delta) at large x
    double residual = 0;       // ||sech(0.1x)(H - E) g|| / ||sech(0.1x) g|| on interior nodes
};

// even real bounded solution of H g = E g, E > 1, normalized so that g_n0 ~ cos(kappa x + delta) with
// cos(delta) >= 0 on [L - 15, L - 5]
EmbeddedSolution embedded_solution_at(double p, double energy, const Grid& grid, const JostOptions& opt = {});
EmbeddedSolution embedded_solution_gn(double p, int n, const Grid& grid);
EmbeddedSolution embedded_solution_gn(double p, int n, const Grid& grid, const InternalMode& mode);

// g_3(3) in closed form
Spinor p3_g3(const Grid& grid);

struct FgrPoint {
    double p = 0;
    int n = 3;
    double lambda = 0;
    double kappa = 0;
    double kappa_printed = 0;  // sqrt(9 lambda^2 - 1) from the printed formula, logged only
    double gamma = 0;
    double gamma_perp = 0;
    double gamma_imag = 0;  // |Im| of the complex perp pairing
    // |gamma - gamma_perp| / |gamma|; O(h^4), amplified by the large modal part of G removed by P_perp
    double perp_mismatch = 0;
    double g_residual = 0;
    double g_scale = 1.0;
    std::string normalization = "asymptotic-cos-unit";
    bool ok = true;
    bool zero_flag = false;
    std::string error;
};

FgrPoint gamma_from(const RefinedProfileSet& set, const EmbeddedSolution& g, double g_scale = 1.0);
FgrPoint gamma_n(double p, int n, const Grid& grid, double g_scale = 1.0);

struct GammaSweep {
    int n = 3;
    double p_lo = 0, p_hi = 0;  // threshold interval (p_{n-1}, p_n)
    std::vector<FgrPoint> rows;
    std::vector<double> zeros;  // refined zero candidates
};
// steps uniform points in (p_{n-1} + 0.01, p_n - 0.01); pass thresholds to skip recomputing them
GammaSweep sweep_gamma(int n, int steps, const Grid& grid, double g_scale = 1.0, double p_lo = 0, double p_hi = 0);

}  // namespace fgrlab
