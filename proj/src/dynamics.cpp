#include "fgrlab/dynamics.hpp"

#include <fftw3.h>

#include <algorithm>
#include <boost/math/interpolators/cardinal_quintic_b_spline.hpp>
#include <cmath>
#include <mutex>
#include <numbers>

#include <Eigen/Dense>

#include "fgrlab/core.hpp"

namespace fgrlab {

namespace {

std::mutex& fftw_mutex() {
    static std::mutex m;
    return m;
}

double sup_abs(const ComplexField& u) {
    double m = 0;
    for (const cplx& v : u) m = std::max(m, std::abs(v));
    return m;
}

double real_pair(const ComplexField& a, const ComplexField& b, double h) {
    double s = 0;
    for (std::size_t j = 0; j < a.size(); ++j) s += a[j].real() * b[j].real() + a[j].imag() * b[j].imag();
    return s * h;
}

// z^{m1} conj(z)^{m2} and its partials in z1 = Re z, z2 = Im z
struct Monomial {
    cplx value, d1, d2;
};
Monomial monomial(cplx z, const MultiIndex& m) {
    auto pw = [](cplx b, int e) { return e == 0 ? cplx(1) : std::pow(b, e); };
    const cplx zb = std::conj(z);
    Monomial r;
    r.value = pw(z, m.first) * pw(zb, m.second);
    const cplx a = m.first > 0 ? double(m.first) * pw(z, m.first - 1) * pw(zb, m.second) : cplx(0);
    const cplx b = m.second > 0 ? double(m.second) * pw(z, m.first) * pw(zb, m.second - 1) : cplx(0);
    r.d1 = a + b;
    r.d2 = cplx(0, 1) * (a - b);
    return r;
}

}  // namespace

PeriodicGrid PeriodicGrid::make(double L, double h) {
    if (!(L > 0) || !(h > 0)) throw Error(ErrorKind::Domain, "PeriodicGrid: L and h must be positive");
    const double r = 2.0 * L / h;
    const auto n = static_cast<std::size_t>(std::llround(r));
    if (std::abs(r - double(n)) > 1e-9 * r || n % 2 != 0 || n < 8)
        throw Error(ErrorKind::Domain, "PeriodicGrid: 2L/h must be an even integer", r);
    PeriodicGrid g;
    g.L = L;
    g.h = h;
    g.N = n;
    return g;
}

RealField PeriodicGrid::coords() const {
    RealField x(N);
    for (std::size_t j = 0; j < N; ++j) x[j] = this->x(j);
    return x;
}

double PeriodicGrid::k(std::size_t j) const {
    const double base = std::numbers::pi / L;
    const long jj = j <= N / 2 ? long(j) : long(j) - long(N);
    return base * double(jj);
}

RealField sponge_profile(const PeriodicGrid& grid, const SpongeOptions& opt) {
    RealField s(grid.N, 0.0);
    const double a = opt.start * grid.L, w = grid.L - a;
    for (std::size_t j = 0; j < grid.N; ++j) {
        const double ax = std::abs(grid.x(j));
        if (ax <= a) continue;
        const double r = std::sin(0.5 * std::numbers::pi * std::min(1.0, (ax - a) / w));
        s[j] = r * r;
    }
    return s;
}

struct SplitStepSolver::Plans {
    fftw_complex* buf = nullptr;
    fftw_plan fwd = nullptr, bwd = nullptr;
    std::size_t n = 0;
    explicit Plans(std::size_t n_) : n(n_) {
        std::lock_guard<std::mutex> lock(fftw_mutex());
        buf = fftw_alloc_complex(n);
        fwd = fftw_plan_dft_1d(int(n), buf, buf, FFTW_FORWARD, FFTW_ESTIMATE);
        bwd = fftw_plan_dft_1d(int(n), buf, buf, FFTW_BACKWARD, FFTW_ESTIMATE);
    }
    ~Plans() {
        std::lock_guard<std::mutex> lock(fftw_mutex());
        fftw_destroy_plan(fwd);
        fftw_destroy_plan(bwd);
        fftw_free(buf);
    }
    cplx* data() { return reinterpret_cast<cplx*>(buf); }
};

SplitStepSolver::SplitStepSolver(double p, const PeriodicGrid& grid, double dt, SpongeOptions sponge)
    : plans_(std::make_unique<Plans>(grid.N)), p_(p), dt_(dt), grid_(grid), sponge_(sponge) {
    check_power(p);
    if (!(dt > 0)) throw Error(ErrorKind::Domain, "split step: dt must be positive", dt);
    if (sponge_.on) {
        const RealField s = sponge_profile(grid, sponge_);
        mask_.resize(grid.N);
        for (std::size_t j = 0; j < grid.N; ++j) mask_[j] = std::exp(-sponge_.rate * s[j] * dt);
    }
}

SplitStepSolver::~SplitStepSolver() = default;

void SplitStepSolver::linear(ComplexField& u, double tau) {
    cplx* b = plans_->data();
    std::copy(u.begin(), u.end(), b);
    fftw_execute(plans_->fwd);
    const double inv = 1.0 / double(grid_.N);
    for (std::size_t j = 0; j < grid_.N; ++j) {
        const double k = grid_.k(j);
        b[j] *= std::exp(cplx(0, -k * k * tau)) * inv;
    }
    fftw_execute(plans_->bwd);
    std::copy(b, b + grid_.N, u.begin());
}

void SplitStepSolver::nonlinear(ComplexField& u) {
    const double q = 0.5 * (p_ - 1.0);
    for (std::size_t j = 0; j < u.size(); ++j) {
        const double a2 = std::norm(u[j]);
        u[j] *= std::exp(cplx(0, std::pow(a2, q) * dt_));
    }
    if (sponge_.on)
        for (std::size_t j = 0; j < u.size(); ++j) u[j] *= mask_[j];
}

void SplitStepSolver::advance(ComplexField& u, std::size_t steps) {
    if (u.size() != grid_.N) throw Error(ErrorKind::Data, "split step: field size does not match the grid");
    if (steps == 0) return;
    linear(u, 0.5 * dt_);
    for (std::size_t s = 0; s < steps; ++s) {
        const double before = sup_abs(u);
        nonlinear(u);
        linear(u, s + 1 == steps ? 0.5 * dt_ : dt_);
        const double after = sup_abs(u);
        if (!std::isfinite(after) || after > 2.0 * before)
            throw Error(ErrorKind::Instability, "split step: sup norm doubled within one step", after / before);
    }
}

void SplitStepSolver::free_flow(ComplexField& u, double t) { linear(u, t); }

ComplexField spectral_derivative(const ComplexField& u, const PeriodicGrid& grid) {
    ComplexField out(grid.N);
    std::vector<cplx> buf(u.begin(), u.end());
    fftw_plan f, b;
    {
        std::lock_guard<std::mutex> lock(fftw_mutex());
        auto* p = reinterpret_cast<fftw_complex*>(buf.data());
        f = fftw_plan_dft_1d(int(grid.N), p, p, FFTW_FORWARD, FFTW_ESTIMATE);
        b = fftw_plan_dft_1d(int(grid.N), p, p, FFTW_BACKWARD, FFTW_ESTIMATE);
    }
    fftw_execute(f);
    for (std::size_t j = 0; j < grid.N; ++j) {
        // the Nyquist mode has no odd derivative
        const double k = (j == grid.N / 2) ? 0.0 : grid.k(j);
        buf[j] *= cplx(0, k) / double(grid.N);
    }
    fftw_execute(b);
    {
        std::lock_guard<std::mutex> lock(fftw_mutex());
        fftw_destroy_plan(f);
        fftw_destroy_plan(b);
    }
    std::copy(buf.begin(), buf.end(), out.begin());
    return out;
}

double periodic_mass(const ComplexField& u, const PeriodicGrid& grid) {
    double s = 0;
    for (const cplx& v : u) s += std::norm(v);
    return 0.5 * s * grid.h;
}

double periodic_energy(double p, const ComplexField& u, const PeriodicGrid& grid) {
    const ComplexField du = spectral_derivative(u, grid);
    double kin = 0, pot = 0;
    for (std::size_t j = 0; j < u.size(); ++j) {
        kin += std::norm(du[j]);
        pot += std::pow(std::abs(u[j]), p + 1.0);
    }
    return grid.h * (0.5 * kin - pot / (p + 1.0));
}

EvolveResult evolve(double p, const ComplexField& u0, const PeriodicGrid& grid, double dt, double T,
                    SpongeOptions sponge, std::size_t record_every) {
    const auto steps = static_cast<std::size_t>(std::llround(T / dt));
    if (std::abs(double(steps) * dt - T) > 1e-9 * std::max(1.0, T))
        throw Error(ErrorKind::Domain, "evolve: T must be a multiple of dt", T);
    for (std::size_t j = 1; j < grid.N / 2; ++j)
        if (std::abs(u0[j] - u0[grid.N - j]) > 1e-12 * (1.0 + std::abs(u0[j])))
            throw Error(ErrorKind::Domain, "evolve: initial datum must be even");
    SplitStepSolver solver(p, grid, dt, sponge);
    EvolveResult r;
    r.u = u0;
    auto record = [&](double t) {
        r.t.push_back(t);
        r.mass.push_back(periodic_mass(r.u, grid));
        r.energy.push_back(periodic_energy(p, r.u, grid));
    };
    record(0.0);
    const std::size_t chunk = record_every ? record_every : steps;
    std::size_t done = 0;
    while (done < steps) {
        const std::size_t m = std::min(chunk, steps - done);
        solver.advance(r.u, m);
        done += m;
        record(double(done) * dt);
    }
    return r;
}

double soliton_orbit_error(double p, const PeriodicGrid& grid, double dt, double T) {
    ComplexField u0(grid.N);
    for (std::size_t j = 0; j < grid.N; ++j) u0[j] = soliton_value(p, 1.0, grid.x(j));
    const EvolveResult r = evolve(p, u0, grid, dt, T);
    const cplx ph = std::exp(cplx(0, T));
    double s = 0;
    for (std::size_t j = 0; j < grid.N; ++j) s += std::norm(r.u[j] - ph * u0[j]);
    return std::sqrt(s * grid.h);
}

struct ModulationProfile::Interp {
    boost::math::interpolators::cardinal_quintic_b_spline<double> spline;
    double lo, hi;
    Interp(const RealField& f, const Grid& g)
        : spline(f.data(), f.size(), -g.L, g.h, {0.0, 0.0}, {0.0, 0.0}), lo(-g.L), hi(g.L) {}
    double value(double x) const { return (x <= lo || x >= hi) ? 0.0 : spline(x); }
    double prime(double x) const { return (x <= lo || x >= hi) ? 0.0 : spline.prime(x); }
};

ModulationProfile ModulationProfile::linear(const InternalMode& mode, const Grid& grid) {
    ModulationProfile pr;
    pr.p_ = mode.p;
    pr.order_ = 1;
    pr.xi_[{1, 0}] = std::make_shared<Interp>(mode.xi10, grid);
    pr.xi_[{0, 1}] = std::make_shared<Interp>(mode.xi01, grid);
    return pr;
}

ModulationProfile ModulationProfile::refined(const RefinedProfileSet& set) {
    ModulationProfile pr;
    pr.p_ = set.p;
    pr.order_ = set.order;
    for (const auto& [m, f] : set.xi) pr.xi_[m] = std::make_shared<Interp>(f, set.grid);
    return pr;
}

ModulationProfile::Sample ModulationProfile::sample(const PeriodicGrid& grid, double omega, cplx z) const {
    const double a = 1.0 / (p_ - 1.0), beta = 0.5 * (p_ - 1.0);
    const double so = std::sqrt(omega), wa = std::pow(omega, a);
    std::vector<std::pair<const Interp*, Monomial>> terms;
    for (const auto& [m, f] : xi_) terms.push_back({f.get(), monomial(z, m)});
    Sample s;
    s.value.resize(grid.N);
    s.d_omega.resize(grid.N);
    s.d_z1.resize(grid.N);
    s.d_z2.resize(grid.N);
    for (std::size_t j = 0; j < grid.N; ++j) {
        const double x = grid.x(j), y = so * x;
        const double ph = soliton_value(p_, 1.0, y);
        cplx psi = ph, dpsi = -std::tanh(beta * y) * ph, d1 = 0, d2 = 0;
        for (const auto& [f, mono] : terms) {
            const double v = f->value(y);
            if (v == 0.0 && f->prime(y) == 0.0) continue;
            psi += mono.value * v;
            dpsi += mono.value * f->prime(y);
            d1 += mono.d1 * v;
            d2 += mono.d2 * v;
        }
        s.value[j] = wa * psi;
        s.d_omega[j] = a * wa / omega * psi + wa * dpsi * (0.5 * x / so);
        s.d_z1[j] = wa * d1;
        s.d_z2[j] = wa * d2;
    }
    return s;
}

ComplexField ModulationProfile::field(const PeriodicGrid& grid, double omega, cplx z) const {
    return sample(grid, omega, z).value;
}

std::array<ComplexField, 4> modulation_frame(const ModulationProfile& profile, const PeriodicGrid& grid, double omega,
                                             cplx z) {
    ModulationProfile::Sample s = profile.sample(grid, omega, z);
    ComplexField ip(grid.N);
    for (std::size_t j = 0; j < grid.N; ++j) ip[j] = cplx(0, 1) * s.value[j];
    return {std::move(ip), std::move(s.d_omega), std::move(s.d_z1), std::move(s.d_z2)};
}

ComplexField orthogonalize(const ComplexField& eta, const std::array<ComplexField, 4>& frame, const PeriodicGrid& grid) {
    Eigen::Matrix4d g;
    Eigen::Vector4d r;
    for (int a = 0; a < 4; ++a) {
        r[a] = real_pair(eta, frame[a], grid.h);
        for (int b = 0; b < 4; ++b) g(a, b) = real_pair(frame[a], frame[b], grid.h);
    }
    const Eigen::Vector4d c = g.fullPivLu().solve(r);
    ComplexField out = eta;
    for (int a = 0; a < 4; ++a)
        for (std::size_t j = 0; j < out.size(); ++j) out[j] -= c[a] * frame[a][j];
    return out;
}

ModulationState modulation_decompose(const ModulationProfile& profile, const PeriodicGrid& grid, const ComplexField& u,
                                     const ModulationState& guess, const DecomposeOptions& opt) {
    if (u.size() != grid.N) throw Error(ErrorKind::Data, "modulation_decompose: field size does not match the grid");
    using V = Eigen::Vector4d;
    auto conditions = [&](const V& v, ComplexField* eta_out) {
        const double th = v[0], om = v[1];
        const cplx z(v[2], v[3]);
        if (!(om > 0)) throw Error(ErrorKind::OutOfTube, "modulation_decompose: omega left (0, inf)", om);
        const auto frame = modulation_frame(profile, grid, om, z);
        const cplx rot = std::exp(cplx(0, -th));
        ComplexField eta(grid.N);
        const ComplexField& phi_i = frame[0];
        for (std::size_t j = 0; j < grid.N; ++j) eta[j] = rot * u[j] - cplx(0, -1) * phi_i[j];
        V f;
        for (int a = 0; a < 4; ++a) f[a] = real_pair(eta, frame[a], grid.h);
        if (eta_out) *eta_out = std::move(eta);
        return f;
    };
    V v(guess.theta, guess.omega, guess.z.real(), guess.z.imag());
    {
        // phase start from the overlap with the guessed profile
        const ComplexField phi = profile.field(grid, guess.omega, guess.z);
        cplx ov = 0;
        for (std::size_t j = 0; j < grid.N; ++j) ov += u[j] * std::conj(phi[j]);
        if (std::abs(ov) > 0) v[0] = std::arg(ov);
    }
    V f = conditions(v, nullptr);
    int it = 0;
    const double step = 1e-6;
    while (f.cwiseAbs().maxCoeff() > opt.tol && it < opt.max_iter) {
        Eigen::Matrix4d jac;
        for (int c = 0; c < 4; ++c) {
            V vp = v, vm = v;
            vp[c] += step;
            vm[c] -= step;
            jac.col(c) = (conditions(vp, nullptr) - conditions(vm, nullptr)) / (2.0 * step);
        }
        const V dv = jac.fullPivLu().solve(-f);
        if (!dv.allFinite()) throw Error(ErrorKind::OutOfTube, "modulation_decompose: singular Newton system");
        // backtracking on the max-norm of the conditions
        double t = 1.0;
        V vn, fn;
        for (int b = 0; b < 20; ++b, t *= 0.5) {
            vn = v + t * dv;
            if (vn[1] <= 0) continue;
            fn = conditions(vn, nullptr);
            if (fn.cwiseAbs().maxCoeff() < f.cwiseAbs().maxCoeff()) break;
        }
        if (!(fn.cwiseAbs().maxCoeff() < f.cwiseAbs().maxCoeff()))
            throw Error(ErrorKind::OutOfTube, "modulation_decompose: Newton made no progress", f.cwiseAbs().maxCoeff());
        v = vn;
        ++it;
        if (std::abs(v[1] - 1.0) > opt.omega_band || std::hypot(v[2], v[3]) > opt.z_max)
            throw Error(ErrorKind::OutOfTube, "modulation_decompose: iterate left the soliton neighborhood",
                        std::hypot(v[2], v[3]));
        f = fn;
    }
    ModulationState s;
    s.t = guess.t;
    s.theta = v[0];
    s.omega = v[1];
    s.z = cplx(v[2], v[3]);
    s.iterations = it;
    f = conditions(v, &s.eta);
    s.residual = f.cwiseAbs().maxCoeff();
    if (!(s.residual <= opt.accept))
        throw Error(ErrorKind::OutOfTube, "modulation_decompose: orthogonality residual above tolerance", s.residual);
    double w = 0;
    for (std::size_t j = 0; j < grid.N; ++j) {
        const double x = grid.x(j);
        w += std::exp(-2.0 * std::sqrt(1.0 + x * x)) * std::norm(s.eta[j]);
    }
    s.eta_weighted = std::sqrt(w * grid.h);
    return s;
}

Trajectory track_run(const TrackOptions& opt, const std::function<void(const TrajectoryRow&)>& on_row) {
    if (std::abs(opt.z0) > 0.1) throw Error(ErrorKind::Domain, "track_run: |z0| must not exceed 0.1", std::abs(opt.z0));
    const PeriodicGrid grid = PeriodicGrid::make(opt.L, opt.h);
    const Grid pg = Grid::make(opt.profile_L, opt.profile_h);
    const InternalMode mode = normalize_mode(internal_mode(opt.p, pg), pg);

    Trajectory tr;
    tr.p = opt.p;
    tr.z0 = opt.z0;
    tr.sponge = opt.sponge.on;
    ModulationProfile profile;
    const double lam = mode.lambda;
    if (2.0 * lam < 1.0 && 3.0 * lam > 1.0) {
        profile = ModulationProfile::refined(build_refined_profile(opt.p, pg, 3, mode));
        tr.profile_kind = "refined-3";
    } else if (3.0 * lam < 1.0 && 4.0 * lam > 1.0) {
        profile = ModulationProfile::refined(build_refined_profile(opt.p, pg, 4, mode));
        tr.profile_kind = "refined-4";
    } else {
        // 2 lambda > 1: the second harmonic is already resonant and no higher refined profile exists
        profile = ModulationProfile::linear(mode, pg);
        tr.profile_kind = "linear";
    }

    ComplexField u = profile.field(grid, 1.0, opt.z0);
    const auto steps_per_out = static_cast<std::size_t>(std::llround(opt.output_every / opt.dt));
    if (steps_per_out == 0) throw Error(ErrorKind::Domain, "track_run: output interval shorter than dt");
    const auto outputs = static_cast<std::size_t>(std::llround(opt.T / (double(steps_per_out) * opt.dt)));
    SplitStepSolver solver(opt.p, grid, opt.dt, opt.sponge);

    ModulationState state;
    state.omega = 1.0;
    state.z = opt.z0;
    double q0 = 0, e0 = 0, q_prev = 0;
    for (std::size_t o = 0; o <= outputs; ++o) {
        if (o > 0) solver.advance(u, steps_per_out);
        const double t = double(o) * double(steps_per_out) * opt.dt;
        ModulationState guess = state;
        guess.t = t;
        state = modulation_decompose(profile, grid, u, guess);
        TrajectoryRow row;
        row.t = t;
        row.theta = state.theta;
        row.omega = state.omega;
        row.z = state.z;
        row.eta_weighted = state.eta_weighted;
        row.residual = state.residual;
        row.mass = periodic_mass(u, grid);
        row.energy = periodic_energy(opt.p, u, grid);
        if (o == 0) {
            q0 = row.mass;
            e0 = row.energy;
        } else {
            tr.max_mass_drift = std::max(tr.max_mass_drift, std::abs(row.mass - q0) / q0);
            tr.max_energy_drift = std::max(tr.max_energy_drift, std::abs(row.energy - e0) / std::abs(e0));
            if (row.mass > q_prev + 1e-12) tr.mass_monotone = false;
        }
        q_prev = row.mass;
        tr.rows.push_back(row);
        if (on_row) on_row(row);
    }
    tr.final_state = state;
    return tr;
}

}  // namespace fgrlab
