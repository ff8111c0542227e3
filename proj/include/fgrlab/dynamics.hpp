#pragma once

#include <array>
#include <functional>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "fgrlab/discrete_operator.hpp"
#include "fgrlab/grid.hpp"
#include "fgrlab/refined_profile.hpp"

namespace fgrlab {

// periodic lattice x_j = -L + j h, j = 0..N-1, N = 2L/h even; x_{N-j} mirrors x_j
struct PeriodicGrid {
    double L = 80.0;
    double h = 0.05;
    std::size_t N = 3200;
    static PeriodicGrid make(double L, double h);
    double x(std::size_t j) const { return -L + static_cast<double>(j) * h; }
    RealField coords() const;
    // angular wavenumber of FFT bin j
    double k(std::size_t j) const;
};

struct SpongeOptions {
    bool on = false;
    double rate = 0.005;  // peak absorption per unit time
    double start = 0.8;   // mask support |x| > start * L
};
// 1 - exp(-rate s(x) dt) with s a sin^2 ramp from start*L to L
RealField sponge_profile(const PeriodicGrid& grid, const SpongeOptions& opt);

// Strang splitting for i u_t = -u_xx - |u|^{p-1} u: exact spectral half steps, exact pointwise phase step
class SplitStepSolver {
public:
    SplitStepSolver(double p, const PeriodicGrid& grid, double dt, SpongeOptions sponge = {});
    ~SplitStepSolver();
    SplitStepSolver(const SplitStepSolver&) = delete;
    SplitStepSolver& operator=(const SplitStepSolver&) = delete;

    // advance by `steps` full steps; adjacent linear half steps are fused
    void advance(ComplexField& u, std::size_t steps);
    // exact free propagation e^{i t d_xx}
    void free_flow(ComplexField& u, double t);
    double dt() const { return dt_; }

private:
    void linear(ComplexField& u, double tau);
    void nonlinear(ComplexField& u);
    struct Plans;
    std::unique_ptr<Plans> plans_;
    double p_, dt_;
    PeriodicGrid grid_;
    SpongeOptions sponge_;
    RealField mask_;
};

// Q = ||u||^2 / 2 and E = ||u_x||^2 / 2 - int |u|^{p+1}/(p+1) with spectral derivatives
double periodic_mass(const ComplexField& u, const PeriodicGrid& grid);
double periodic_energy(double p, const ComplexField& u, const PeriodicGrid& grid);
ComplexField spectral_derivative(const ComplexField& u, const PeriodicGrid& grid);

struct EvolveResult {
    ComplexField u;
    std::vector<double> t, mass, energy;
};
// raw evolution with Q, E recorded every `record_every` steps (0: only the endpoints)
EvolveResult evolve(double p, const ComplexField& u0, const PeriodicGrid& grid, double dt, double T,
                    SpongeOptions sponge = {}, std::size_t record_every = 0);

// ||u(T) - e^{iT} phi||_{L^2} for u0 = phi
double soliton_orbit_error(double p, const PeriodicGrid& grid, double dt, double T);

// phi[omega, z](x) = omega^{1/(p-1)} (phi + sum_m z^m xi_m)(sqrt(omega) x); phi in closed form, xi_m interpolated
class ModulationProfile {
public:
    ModulationProfile() = default;
    // linear profile phi + z xi_(1,0) + conj(z) xi_(0,1)
    static ModulationProfile linear(const InternalMode& mode, const Grid& grid);
    // every xi_m of a refined set
    static ModulationProfile refined(const RefinedProfileSet& set);

    double p() const { return p_; }
    int order() const { return order_; }
    // field and its partials (omega, z1, z2) on the lattice
    struct Sample {
        ComplexField value, d_omega, d_z1, d_z2;
    };
    Sample sample(const PeriodicGrid& grid, double omega, cplx z) const;
    ComplexField field(const PeriodicGrid& grid, double omega, cplx z) const;

private:
    struct Interp;
    double p_ = 0;
    int order_ = 1;
    std::map<MultiIndex, std::shared_ptr<const Interp>> xi_;
};

struct ModulationState {
    double t = 0;
    double theta = 0;
    double omega = 1;
    cplx z;
    ComplexField eta;
    double residual = 0;  // max |orthogonality condition|
    int iterations = 0;
    double eta_weighted = 0;  // ||e^{-<x>} eta||_{L^2}
};

struct DecomposeOptions {
    double tol = 1e-12;
    int max_iter = 30;
    double accept = 1e-8;
    double z_max = 0.5;
    double omega_band = 0.5;  // |omega - 1| allowed
};
// Newton on <eta, i Phi> = <eta, d_omega Phi> = <eta, d_z1 Phi> = <eta, d_z2 Phi> = 0, eta = e^{-i theta} u - Phi
ModulationState modulation_decompose(const ModulationProfile& profile, const PeriodicGrid& grid, const ComplexField& u,
                                     const ModulationState& guess, const DecomposeOptions& opt = {});
// {i Phi, d_omega Phi, d_z1 Phi, d_z2 Phi}
std::array<ComplexField, 4> modulation_frame(const ModulationProfile& profile, const PeriodicGrid& grid, double omega,
                                             cplx z);
// removes the frame components of eta in the real pairing
ComplexField orthogonalize(const ComplexField& eta, const std::array<ComplexField, 4>& frame, const PeriodicGrid& grid);

struct TrajectoryRow {
    double t = 0, theta = 0, omega = 0;
    cplx z;
    double eta_weighted = 0;
    double mass = 0, energy = 0;
    double residual = 0;
};
struct Trajectory {
    double p = 0;
    cplx z0;
    bool sponge = false;
    std::vector<TrajectoryRow> rows;
    double max_mass_drift = 0;    // relative
    double max_energy_drift = 0;  // relative
    bool mass_monotone = true;    // sponge on: Q non-increasing within 1e-12 slack
    std::string profile_kind;
    ModulationState final_state;
};

struct TrackOptions {
    double p = 4.3;
    cplx z0 = 0.05;
    double dt = 1e-3;
    double T = 400.0;
    SpongeOptions sponge;
    double L = 80.0;
    double h = 0.05;
    double output_every = 0.1;
    // grid for the internal mode / refined profile
    double profile_L = 50.0;
    double profile_h = 0.005;
};
// u0 = phi[1, z0]; decomposition every output_every time units, warm started
Trajectory track_run(const TrackOptions& opt, const std::function<void(const TrajectoryRow&)>& on_row = {});

}  // namespace fgrlab
