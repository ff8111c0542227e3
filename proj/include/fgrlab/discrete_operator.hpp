#pragma once

#include <memory>
#include <vector>

#include "fgrlab/banded.hpp"
#include "fgrlab/grid.hpp"

namespace fgrlab {

// Operators act on the even sector: unknowns are the samples on [0, L], the
// stencil reflects across x = 0 and sees zero ghosts beyond x = L.
struct BandedOperator {
    enum class Layout { Scalar, Interleaved };
    Layout layout = Layout::Scalar;
    Grid grid;
    std::size_t nodes = 0;  // half-grid node count
    BandedMatrix matrix;
};

BandedOperator build_lplus(double p, const Grid& grid);
BandedOperator build_lminus(double p, const Grid& grid);
BandedOperator build_h(double p, const Grid& grid);

// weights w_0 = 1, w_j = 2 turning half-grid sums into full-grid sums
RealField even_weights(std::size_t nodes);

// Full-grid applications with the same discretization (4th-order stencil, zero ghosts).
RealField apply_lplus(double p, const Grid& grid, const RealField& f);
RealField apply_lminus(double p, const Grid& grid, const RealField& f);
Spinor apply_h(double p, const Grid& grid, const Spinor& f);
// half-grid interleaving helpers
std::vector<double> interleave_even(const Spinor& full);
Spinor deinterleave_even(const std::vector<double>& v);

struct InternalMode {
    double p = 0;
    double lambda = 0;
    RealField xi10, xi01;
    double residual_norm = 0;        // ||(H - lambda) xi|| / ||xi||
    double normalization_constant = 1;
    int iterations = 0;
};

// rough lambda(p) from a coarse dense eigen-solve, used when no guess is given
double lambda_estimate(double p);
InternalMode internal_mode(double p, const Grid& grid, double lambda_guess = 0.0);
// int (xi10^2 - xi01^2)
double symplectic_pairing(const InternalMode& mode, const Grid& grid);
InternalMode normalize_mode(const InternalMode& mode, const Grid& grid);

// p_n with lambda(p_n) = 1/n, n in {2,3,4}
double threshold_p(int n, const Grid& grid);

struct MonotonicityAudit {
    std::vector<double> p, lambda;
    bool strictly_decreasing = true;
};
MonotonicityAudit audit_monotonicity(double p_min, double p_max, int points, const Grid& grid);

// factorized (H - mu) on the even sector, reusable for many right-hand sides
class ShiftedSolver {
public:
    ShiftedSolver(double p, const Grid& grid, double mu, const InternalMode* mode = nullptr);
    Spinor solve(const Spinor& rhs) const;
    double rcond() const { return lu_->rcond(); }
    double mu() const { return mu_; }

private:
    double mu_;
    std::shared_ptr<const BandedLU> lu_;
};

Spinor solve_shifted(double p, const Grid& grid, double mu, const Spinor& rhs, const InternalMode* mode = nullptr);
// L_+ u = rhs on the even sector
RealField solve_lplus(double p, const Grid& grid, const RealField& rhs);

struct DeflatedSolution {
    Spinor u;
    double c = 0;          // solvability multiplier
    double residual = 0;   // ||(H - lambda) u - c xi - rhs|| / ||rhs||
    int refinements = 0;
};
// (H - lambda) u = c (xi10, xi01) + rhs with u orthogonal to (xi10, xi01)
DeflatedSolution solve_deflated_at_lambda(double p, const Grid& grid, const InternalMode& mode, const Spinor& rhs);

}  // namespace fgrlab
