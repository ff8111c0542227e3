#include "fgrlab/jost.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include <boost/math/tools/roots.hpp>
#include <boost/numeric/odeint.hpp>

#include "fgrlab/core.hpp"
#include "fgrlab/parallel.hpp"

namespace fgrlab {

namespace {

const cplx I1(0.0, 1.0);

// W[r][m] = int_r^{r+1} l_m(t) dt for the Lagrange basis on nodes 0..5
struct CellWeights {
    double w[5][6];
    CellWeights() {
        const double gx[4] = {-0.8611363115940526, -0.3399810435848563, 0.3399810435848563, 0.8611363115940526};
        const double gw[4] = {0.3478548451374538, 0.6521451548625461, 0.6521451548625461, 0.3478548451374538};
        for (int r = 0; r < 5; ++r)
            for (int m = 0; m < 6; ++m) {
                double acc = 0;
                for (int g = 0; g < 4; ++g) {
                    double t = r + 0.5 + 0.5 * gx[g];
                    double l = 1;
                    for (int j = 0; j < 6; ++j)
                        if (j != m) l *= (t - j) / double(m - j);
                    acc += 0.5 * gw[g] * l;
                }
                w[r][m] = acc;
            }
    }
};
const CellWeights& cell_weights() {
    static const CellWeights cw;
    return cw;
}

// sin(k t) / k, stable at k -> 0
cplx sinc_k(cplx k, double t) {
    cplx z = k * t;
    if (std::abs(z) < 1e-3) {
        cplx z2 = z * z;
        return t * (1.0 - z2 / 6.0 * (1.0 - z2 / 20.0 * (1.0 - z2 / 42.0)));
    }
    return std::sin(z) / k;
}

struct Lattice {
    double x0 = 0, h = 0;
    std::size_t n = 0;
    double x(std::size_t i) const { return x0 + double(i) * h; }
};

// Kernel values on stencil offsets o = j - i in [-5, 5], stored at o + 5.
using Table = std::array<cplx, 11>;

// h * sum_m W[r][m] table[j - i] q[j] over the 6-point stencil of cell [x_i, x_{i+1}]
cplx cell(const Lattice& lat, std::size_t i, const Table& t, const ComplexField& q, std::size_t lo = 0) {
    const auto& cw = cell_weights();
    std::size_t i0 = i >= lo + 2 ? i - 2 : lo;
    if (i0 + 5 > lat.n - 1) i0 = lat.n - 6;
    int r = int(i - i0);
    cplx acc = 0;
    for (int m = 0; m < 6; ++m) {
        int o = int(i0 + m) - int(i);
        acc += cw.w[r][m] * t[o + 5] * q[i0 + m];
    }
    return lat.h * acc;
}

// I_i = int_{x_i}^{x_end} e^{a (x_i - y)} q(y) dy
ComplexField backward_exp(const Lattice& lat, cplx a, const ComplexField& q, std::size_t i_begin = 0) {
    ComplexField out(lat.n, 0.0);
    Table t;
    for (int o = -5; o <= 5; ++o) t[o + 5] = std::exp(-a * (o * lat.h));
    const cplx step = std::exp(-a * lat.h);
    for (std::size_t i = lat.n - 1; i-- > i_begin;) out[i] = cell(lat, i, t, q, i_begin) + step * out[i + 1];
    return out;
}

// C_i = int_{x_i}^{x_end} e^{sig (x_i - y)} cos(k (y - x_i)) q,  S_i: same with sin(k (y - x_i)) / k
void backward_rot(const Lattice& lat, cplx sig, cplx k, const ComplexField& q, ComplexField& C, ComplexField& S,
                  std::size_t i_begin = 0) {
    C.assign(lat.n, 0.0);
    S.assign(lat.n, 0.0);
    Table tc, ts;
    for (int o = -5; o <= 5; ++o) {
        double tt = o * lat.h;
        cplx e = std::exp(-sig * tt);
        tc[o + 5] = e * std::cos(k * tt);
        ts[o + 5] = e * sinc_k(k, tt);
    }
    const cplx damp = std::exp(-sig * lat.h);
    const cplx ckh = std::cos(k * lat.h), ksk = k * std::sin(k * lat.h), skk = sinc_k(k, lat.h);
    for (std::size_t i = lat.n - 1; i-- > i_begin;) {
        cplx c1 = C[i + 1], s1 = S[i + 1];
        C[i] = cell(lat, i, tc, q, i_begin) + damp * (ckh * c1 - ksk * s1);
        S[i] = cell(lat, i, ts, q, i_begin) + damp * (ckh * s1 + skk * c1);
    }
}

// L_i = int_{x_start}^{x_i} e^{-a (x_i - y)} q(y) dy for i >= start
ComplexField forward_exp(const Lattice& lat, cplx a, const ComplexField& q, std::size_t start) {
    ComplexField out(lat.n, 0.0);
    Table t;
    // reference x_{i+1}: x_{i+1} - y_j = (1 - o) h
    for (int o = -5; o <= 5; ++o) t[o + 5] = std::exp(-a * ((1 - o) * lat.h));
    const cplx step = std::exp(-a * lat.h);
    for (std::size_t i = start; i + 1 < lat.n; ++i) out[i + 1] = step * out[i] + cell(lat, i, t, q, start);
    return out;
}

// C_i = int_{x_start}^{x_i} e^{-sig (x_i - y)} cos(k (x_i - y)) q, S_i with sin(k (x_i - y)) / k
void forward_rot(const Lattice& lat, cplx sig, cplx k, const ComplexField& q, std::size_t start, ComplexField& C,
                 ComplexField& S) {
    C.assign(lat.n, 0.0);
    S.assign(lat.n, 0.0);
    Table tc, ts;
    for (int o = -5; o <= 5; ++o) {
        double tt = (1 - o) * lat.h;
        cplx e = std::exp(-sig * tt);
        tc[o + 5] = e * std::cos(k * tt);
        ts[o + 5] = e * sinc_k(k, tt);
    }
    const cplx damp = std::exp(-sig * lat.h);
    const cplx ckh = std::cos(k * lat.h), ksk = k * std::sin(k * lat.h), skk = sinc_k(k, lat.h);
    for (std::size_t i = start; i + 1 < lat.n; ++i) {
        C[i + 1] = cell(lat, i, tc, q, start) + damp * (ckh * C[i] - ksk * S[i]);
        S[i + 1] = cell(lat, i, ts, q, start) + damp * (ckh * S[i] + skk * C[i]);
    }
}

// U_i = int_{x_a}^{x_i} q (signed)
ComplexField cumulative_from(const Lattice& lat, const ComplexField& q, std::size_t ia) {
    ComplexField out(lat.n, 0.0);
    Table t;
    t.fill(1.0);
    for (std::size_t i = ia; i + 1 < lat.n; ++i) out[i + 1] = out[i] + cell(lat, i, t, q);
    for (std::size_t i = ia; i-- > 0;) out[i] = out[i + 1] - cell(lat, i, t, q);
    return out;
}

struct Potential {
    RealField v11, v12, v21, v22;
};

Potential sample_potential(double p, const Lattice& lat, double scale) {
    Potential v;
    v.v11.resize(lat.n);
    v.v12.resize(lat.n);
    v.v21.resize(lat.n);
    v.v22.resize(lat.n);
    for (std::size_t i = 0; i < lat.n; ++i) {
        auto m = potential_at(p, lat.x(i));
        v.v11[i] = scale * m[0];
        v.v12[i] = scale * m[1];
        v.v21[i] = scale * m[2];
        v.v22[i] = scale * m[3];
    }
    return v;
}

double snap(double x, double h) { return std::round(x / h) * h; }

struct Setup {
    Lattice lat;
    double anchor = 0;
    std::size_t ia = 0;
};

Setup make_setup(double p, const Grid& grid, const JostOptions& opt) {
    check_power(p);
    if (opt.refine < 1) throw Error(ErrorKind::Domain, "jost: refine must be >= 1");
    Setup st;
    const double h = grid.h / opt.refine;
    const double c = p - 1.0;
    double anchor = opt.anchor > 0 ? opt.anchor : 4.0 / c;
    anchor = std::max(anchor, 0.5);
    double x_max = opt.x_max > 0 ? opt.x_max : std::max(anchor + 6.0, 40.0 / c);
    double x_min = snap(opt.x_min, grid.h);
    x_max = snap(x_max, grid.h);
    anchor = snap(anchor, grid.h);
    if (!(x_min < anchor && anchor < x_max))
        throw Error(ErrorKind::Domain, "jost: need x_min < anchor < x_max");
    st.lat.x0 = x_min;
    st.lat.h = h;
    st.lat.n = std::size_t(std::llround((x_max - x_min) / h)) + 1;
    if (st.lat.n < 12) throw Error(ErrorKind::Domain, "jost: lattice too short");
    st.ia = std::size_t(std::llround((anchor - x_min) / h));
    st.anchor = st.lat.x(st.ia);
    return st;
}

double strip_gamma(double p, const JostOptions& opt) { return opt.strip_gamma > 0 ? opt.strip_gamma : (p - 1.0) / 2.0; }

void check_strip3(cplx k) {
    if (!(k.imag() >= -std::sqrt(2.0) && k.imag() <= 1.0))
        throw Error(ErrorKind::Strip, "jost_f3: Im k outside [-sqrt2, 1]", k.imag());
}
void check_strip1(double p, cplx k, const JostOptions& opt) {
    check_strip3(k);
    double g = strip_gamma(p, opt);
    if (!(k.imag() <= 1.0 - opt.strip_eps0 && k.imag() >= -g / 2.0))
        throw Error(ErrorKind::Strip, "jost_f1: Im k outside [-gamma/2, 1 - eps0]", k.imag());
}
void check_strip4(double p, cplx k, const JostOptions& opt) {
    double a2 = std::min(1.0 - opt.strip_eps0, strip_gamma(p, opt) / 2.0);
    if (std::abs(k.imag()) > a2) throw Error(ErrorKind::Strip, "jost_f4: |Im k| above min(1 - eps0, gamma/2)", k.imag());
}

cplx mu_of(JostSpecies sp, cplx k) {
    switch (sp) {
        case JostSpecies::F1: return I1 * k;
        case JostSpecies::F2: return -I1 * k;
        case JostSpecies::F3: return -jost_s(k);
        case JostSpecies::F4: return jost_s(k);
    }
    return 0.0;
}

void fill_normalized(JostSolution& sol) {
    const cplx mu = mu_of(sol.species, sol.k);
    const std::size_t n = sol.x.size();
    sol.m = ComplexSpinor(n);
    sol.dm = ComplexSpinor(n);
    for (std::size_t i = 0; i < n; ++i) {
        cplx e = std::exp(-mu * sol.x[i]);
        sol.m.first[i] = e * sol.f.first[i];
        sol.m.second[i] = e * sol.f.second[i];
        sol.dm.first[i] = e * (sol.df.first[i] - mu * sol.f.first[i]);
        sol.dm.second[i] = e * (sol.df.second[i] - mu * sol.f.second[i]);
    }
}

double rel_change(const ComplexField& a, const ComplexField& b) {
    double worst = 0;
    for (std::size_t i = 0; i < a.size(); ++i)
        worst = std::max(worst, std::abs(a[i] - b[i]) / std::max(1.0, std::abs(a[i])));
    return worst;
}

JostSeries series_raw(double p, cplx k, JostSpecies sp, double x_from, double scale, bool& resonant) {
    JostSeries ser;
    ser.species = sp;
    ser.p = p;
    ser.k = k;
    ser.mu = mu_of(sp, k);
    const double c = p - 1.0;
    const cplx s = jost_s(k);
    const double A = scale * (p + 1) * (p + 1) / 4.0, B = scale * (p * p - 1) / 4.0;
    std::array<cplx, 2> a0{};
    if (sp == JostSpecies::F1 || sp == JostSpecies::F2)
        a0 = {1.0, 0.0};
    else
        a0 = {0.0, 1.0};
    ser.a.push_back(a0);
    const double zeta = std::exp(-c * std::max(x_from, 0.05));
    resonant = false;
    int small_run = 0;
    for (int j = 1; j < 4000; ++j) {
        cplx b1 = 0, b2 = 0;
        for (int l = 1; l <= j; ++l) {
            double w = 4.0 * l * ((l % 2) ? 1.0 : -1.0);
            const auto& am = ser.a[j - l];
            b1 += w * (-A * am[0] - B * am[1]);
            b2 += w * (B * am[0] + A * am[1]);
        }
        cplx muj = ser.mu - double(j) * c;
        cplx den1 = muj * muj + k * k, den2 = muj * muj - s * s;
        double scale_den = std::max(1.0, std::norm(muj));
        if (std::abs(den1) < 1e-9 * scale_den || std::abs(den2) < 1e-9 * scale_den) resonant = true;
        std::array<cplx, 2> aj{b1 / den1, -b2 / den2};
        ser.a.push_back(aj);
        double mag = (std::abs(aj[0]) + std::abs(aj[1])) * std::pow(zeta, j) * (1.0 + j * c);
        small_run = mag < 1e-18 ? small_run + 1 : 0;
        if (small_run >= 4) break;
    }
    return ser;
}

}  // namespace

const char* species_name(JostSpecies s) {
    switch (s) {
        case JostSpecies::F1: return "f1";
        case JostSpecies::F2: return "f2";
        case JostSpecies::F3: return "f3";
        case JostSpecies::F4: return "f4";
    }
    return "?";
}

cplx jost_s(cplx k) { return std::sqrt(2.0 + k * k); }

std::size_t JostSolution::index(double xv) const {
    if (x.empty() || xv < x.front() - 0.5 * h || xv > x.back() + 0.5 * h)
        throw Error(ErrorKind::Domain, "jost: x outside the lattice", xv);
    return std::size_t(std::llround((xv - x.front()) / h));
}

void JostSeries::eval(double x, std::array<cplx, 2>& f, std::array<cplx, 2>& df) const {
    const double c = p - 1.0;
    const double zeta = std::exp(-c * x);
    cplx s0 = 0, s1 = 0, d0 = 0, d1 = 0;
    double zj = 1;
    for (std::size_t j = 0; j < a.size(); ++j) {
        cplx muj = mu - double(j) * c;
        s0 += a[j][0] * zj;
        s1 += a[j][1] * zj;
        d0 += muj * a[j][0] * zj;
        d1 += muj * a[j][1] * zj;
        zj *= zeta;
        if (zj == 0) break;
    }
    cplx e = std::exp(mu * x);
    f = {e * s0, e * s1};
    df = {e * d0, e * d1};
}

JostSeries jost_series(double p, cplx k, JostSpecies species, double x_from, double potential_scale) {
    check_power(p);
    if (species == JostSpecies::F2) {
        bool r = false;
        JostSeries s1 = series_raw(p, std::conj(k), JostSpecies::F1, x_from, potential_scale, r);
        JostSeries out = s1;
        out.species = JostSpecies::F2;
        out.k = k;
        out.mu = std::conj(s1.mu);
        for (auto& aj : out.a) aj = {std::conj(aj[0]), std::conj(aj[1])};
        return out;
    }
    bool resonant = false;
    JostSeries ser = series_raw(p, k, species, x_from, potential_scale, resonant);
    if (!resonant) return ser;
    // removable resonance (exponent of f3 reached by the f4 ladder): symmetric limit in k
    const double delta = 1e-5 * std::max(1.0, std::abs(k));
    bool r1 = false, r2 = false;
    JostSeries a = series_raw(p, k + delta, species, x_from, potential_scale, r1);
    JostSeries b = series_raw(p, k - delta, species, x_from, potential_scale, r2);
    std::size_t n = std::min(a.a.size(), b.a.size());
    ser.a.resize(n);
    for (std::size_t j = 0; j < n; ++j)
        for (int c = 0; c < 2; ++c) ser.a[j][c] = 0.5 * (a.a[j][c] + b.a[j][c]);
    return ser;
}

cplx wronskian(const std::array<cplx, 2>& f, const std::array<cplx, 2>& df, const std::array<cplx, 2>& g,
               const std::array<cplx, 2>& dg) {
    return df[0] * g[0] + df[1] * g[1] - f[0] * dg[0] - f[1] * dg[1];
}

cplx wronskian(const JostSolution& a, const JostSolution& b, std::size_t i) {
    return wronskian(a.value(i), a.deriv(i), b.value(i), b.deriv(i));
}

cplx reflected_wronskian(const JostSolution& a, const JostSolution& b, double x) {
    std::size_t ip = a.index(x), im = b.index(-x);
    auto fa = a.value(ip), dfa = a.deriv(ip);
    auto gb = b.value(im), dgb = b.deriv(im);
    dgb = {-dgb[0], -dgb[1]};
    return wronskian(fa, dfa, gb, dgb);
}

JostSolution jost_f3(double p, cplx k, const Grid& grid, const JostOptions& opt) {
    check_strip3(k);
    Setup st = make_setup(p, grid, opt);
    const Lattice& lat = st.lat;
    Potential V = sample_potential(p, lat, opt.potential_scale);
    const cplx s = jost_s(k);
    const std::size_t n = lat.n;
    ComplexField m1(n, 0.0), m2(n, 1.0), dm1(n, 0.0), dm2(n, 0.0), q1(n), q2(n), C, S;
    JostSolution sol;
    sol.species = JostSpecies::F3;
    sol.p = p;
    sol.k = k;
    sol.h = lat.h;
    int it = 0;
    double corr = 1;
    for (; it < opt.max_iter && corr >= opt.tol; ++it) {
        for (std::size_t i = 0; i < n; ++i) {
            q1[i] = V.v11[i] * m1[i] + V.v12[i] * m2[i];
            q2[i] = V.v21[i] * m1[i] + V.v22[i] * m2[i];
        }
        backward_rot(lat, s, k, q1, C, S);
        ComplexField E = backward_exp(lat, 2.0 * s, q2);
        ComplexField Z = backward_exp(lat, 0.0, q2);
        ComplexField n1(n), n2(n);
        for (std::size_t i = 0; i < n; ++i) {
            n1[i] = S[i];
            n2[i] = 1.0 + (E[i] - Z[i]) / (2.0 * s);
            dm1[i] = s * S[i] - C[i];
            dm2[i] = E[i];
        }
        corr = std::max(rel_change(n1, m1), rel_change(n2, m2));
        m1.swap(n1);
        m2.swap(n2);
    }
    if (corr >= opt.tol)
        throw Error(ErrorKind::Convergence, "jost_f3: Picard iteration cap reached", corr);
    sol.iterations = it;
    sol.correction = corr;
    sol.anchor = st.anchor;
    sol.x.resize(n);
    sol.f = ComplexSpinor(n);
    sol.df = ComplexSpinor(n);
    for (std::size_t i = 0; i < n; ++i) {
        double x = lat.x(i);
        sol.x[i] = x;
        cplx e = std::exp(-s * x);
        sol.f.first[i] = e * m1[i];
        sol.f.second[i] = e * m2[i];
        sol.df.first[i] = e * (dm1[i] - s * m1[i]);
        sol.df.second[i] = e * (dm2[i] - s * m2[i]);
    }
    sol.m = ComplexSpinor(m1, m2);
    sol.dm = ComplexSpinor(dm1, dm2);
    return sol;
}

JostSolution jost_f1(double p, cplx k, const Grid& grid, const JostOptions& opt) {
    check_strip1(p, k, opt);
    JostSolution f3 = jost_f3(p, k, grid, opt);
    return jost_f1(p, k, grid, opt, f3);
}

JostSolution jost_f1(double p, cplx k, const Grid& grid, const JostOptions& opt, const JostSolution& f3) {
    check_strip1(p, k, opt);
    Setup st = make_setup(p, grid, opt);
    const Lattice& lat = st.lat;
    if (f3.x.size() != lat.n || std::abs(f3.k - k) > 0)
        throw Error(ErrorKind::Data, "jost_f1: f3 built on a different lattice or k");
    Potential V = sample_potential(p, lat, opt.potential_scale);
    const cplx s = jost_s(k);
    const std::size_t n = lat.n;
    const auto& m31 = f3.m.first;
    const auto& m32 = f3.m.second;
    const auto& d31 = f3.dm.first;
    const auto& d32 = f3.dm.second;
    ComplexField coefA(n), coefH(n), w21(n);
    for (std::size_t i = 0; i < n; ++i) {
        if (std::abs(m32[i]) < 1e-10) {
            std::ostringstream os;
            os << "jost_f1: f3 second component vanishes near x = " << lat.x(i);
            throw Error(ErrorKind::KernelSingularity, os.str(), lat.x(i));
        }
        coefA[i] = V.v11[i] + m31[i] / m32[i] * V.v21[i];
        coefH[i] = (d31[i] - m31[i] * d32[i] / m32[i]) / (m32[i] * m32[i]);
        w21[i] = m32[i] * V.v21[i];
    }
    ComplexField v(n), dv(n), J, F(n), q(n), C, S, plane(n);
    for (std::size_t i = 0; i < n; ++i) plane[i] = std::exp(I1 * k * lat.x(i));
    v = plane;
    int it = 0;
    double corr = 1;
    for (; it < opt.max_iter && corr >= opt.tol; ++it) {
        for (std::size_t i = 0; i < n; ++i) q[i] = w21[i] * v[i];
        J = backward_exp(lat, s, q);
        for (std::size_t i = 0; i < n; ++i) F[i] = coefA[i] * v[i] - 2.0 * coefH[i] * J[i];
        backward_rot(lat, 0.0, k, F, C, S);
        ComplexField nv(n);
        for (std::size_t i = 0; i < n; ++i) {
            nv[i] = plane[i] + S[i];
            dv[i] = I1 * k * plane[i] - C[i];
        }
        corr = rel_change(nv, v);
        v.swap(nv);
    }
    if (corr >= opt.tol)
        throw Error(ErrorKind::Convergence, "jost_f1: Picard iteration cap reached", corr);
    for (std::size_t i = 0; i < n; ++i) q[i] = w21[i] * v[i];
    J = backward_exp(lat, s, q);
    ComplexField du(n);
    for (std::size_t i = 0; i < n; ++i) du[i] = std::exp(s * lat.x(i)) * J[i] / (m32[i] * m32[i]);
    ComplexField u = cumulative_from(lat, du, st.ia);
    // canonical gauge: u at the anchor from the large-x series
    JostSeries ser = jost_series(p, k, JostSpecies::F1, st.anchor, opt.potential_scale);
    std::array<cplx, 2> fa, dfa;
    ser.eval(st.anchor, fa, dfa);
    const cplx ua = fa[1] / f3.f.second[st.ia];
    for (auto& x : u) x += ua;

    JostSolution sol;
    sol.species = JostSpecies::F1;
    sol.p = p;
    sol.k = k;
    sol.h = lat.h;
    sol.iterations = it;
    sol.correction = corr;
    sol.anchor = st.anchor;
    sol.x = f3.x;
    sol.f = ComplexSpinor(n);
    sol.df = ComplexSpinor(n);
    for (std::size_t i = 0; i < n; ++i) {
        sol.f.first[i] = v[i] + u[i] * f3.f.first[i];
        sol.f.second[i] = u[i] * f3.f.second[i];
        sol.df.first[i] = dv[i] + du[i] * f3.f.first[i] + u[i] * f3.df.first[i];
        sol.df.second[i] = du[i] * f3.f.second[i] + u[i] * f3.df.second[i];
    }
    fill_normalized(sol);
    return sol;
}

JostSolution conjugate_species(const JostSolution& f1c) {
    JostSolution out = f1c;
    out.species = JostSpecies::F2;
    out.k = std::conj(f1c.k);
    for (auto* fld : {&out.f.first, &out.f.second, &out.df.first, &out.df.second})
        for (auto& z : *fld) z = std::conj(z);
    fill_normalized(out);
    return out;
}

JostSolution jost_f2(double p, cplx k, const Grid& grid, const JostOptions& opt) {
    return conjugate_species(jost_f1(p, std::conj(k), grid, opt));
}

void march_jost_ode(double p, cplx k, double x0, const std::array<cplx, 2>& f0, const std::array<cplx, 2>& df0,
                    const RealField& nodes, ComplexSpinor& f, ComplexSpinor& df, double potential_scale) {
    using State = std::array<double, 8>;
    namespace ode = boost::numeric::odeint;
    const cplx k2 = k * k, s2 = 2.0 + k * k;
    auto rhs = [&](const State& y, State& dy, double x) {
        auto v = potential_at(p, x);
        cplx a(y[0], y[1]), b(y[2], y[3]);
        cplx r1 = -k2 * a + potential_scale * (v[0] * a + v[1] * b);
        cplx r2 = s2 * b - potential_scale * (v[2] * a + v[3] * b);
        dy = {y[4], y[5], y[6], y[7], r1.real(), r1.imag(), r2.real(), r2.imag()};
    };
    State y{f0[0].real(), f0[0].imag(), f0[1].real(), f0[1].imag(),
            df0[0].real(), df0[0].imag(), df0[1].real(), df0[1].imag()};
    std::vector<double> times;
    times.push_back(x0);
    for (double xv : nodes) times.push_back(xv);
    f = ComplexSpinor(nodes.size());
    df = ComplexSpinor(nodes.size());
    std::size_t count = 0;
    auto observer = [&](const State& st, double) {
        if (count > 0) {
            std::size_t j = count - 1;
            f.first[j] = {st[0], st[1]};
            f.second[j] = {st[2], st[3]};
            df.first[j] = {st[4], st[5]};
            df.second[j] = {st[6], st[7]};
        }
        ++count;
    };
    if (nodes.empty()) return;
    double dir = nodes.back() < x0 ? -1.0 : 1.0;
    auto stepper = ode::make_controlled(1e-15, 1e-14, ode::runge_kutta_fehlberg78<State>());
    ode::integrate_times(stepper, rhs, y, times.begin(), times.end(), dir * 1e-3, observer);
}

JostSolution jost_f4(double p, cplx k, const Grid& grid, const JostOptions& opt) {
    check_strip4(p, k, opt);
    if (std::abs(k) < 1e-8)
        throw Error(ErrorKind::Degenerate, "jost_f4: |k| < 1e-8, W[f1, f2] = 2ik degenerates", std::abs(k));
    Setup st = make_setup(p, grid, opt);
    const Lattice& lat = st.lat;
    Potential V = sample_potential(p, lat, opt.potential_scale);
    const cplx s = jost_s(k);
    const std::size_t n = lat.n, ia = st.ia;
    ComplexField m1(n, 0.0), m2(n, 1.0), dm1(n, 0.0), dm2(n, 0.0), q1(n, 0.0), q2(n, 0.0), C, S;
    int it = 0;
    double corr = 1;
    for (; it < opt.max_iter && corr >= opt.tol; ++it) {
        for (std::size_t i = ia; i < n; ++i) {
            q1[i] = V.v11[i] * m1[i] + V.v12[i] * m2[i];
            q2[i] = V.v21[i] * m1[i] + V.v22[i] * m2[i];
        }
        forward_rot(lat, s, k, q1, ia, C, S);
        ComplexField Ef = forward_exp(lat, 2.0 * s, q2, ia);
        ComplexField Z = backward_exp(lat, 0.0, q2, ia);
        ComplexField n1(n, 0.0), n2(n, 1.0);
        for (std::size_t i = ia; i < n; ++i) {
            n1[i] = S[i];
            n2[i] = 1.0 + (Z[i] + Ef[i]) / (2.0 * s);
            dm1[i] = -s * S[i] + C[i];
            dm2[i] = -Ef[i];
        }
        corr = std::max(rel_change(n1, m1), rel_change(n2, m2));
        m1.swap(n1);
        m2.swap(n2);
    }
    if (corr >= opt.tol)
        throw Error(ErrorKind::Convergence, "jost_f4: Picard iteration cap reached", corr);

    JostSolution f3 = jost_f3(p, k, grid, opt);
    JostSolution f1 = jost_f1(p, k, grid, opt, f3);
    JostSolution f2 = (k.imag() == 0.0) ? conjugate_species(f1) : jost_f2(p, k, grid, opt);
    f2.k = k;

    JostSolution sol;
    sol.species = JostSpecies::F4;
    sol.p = p;
    sol.k = k;
    sol.h = lat.h;
    sol.iterations = it;
    sol.correction = corr;
    sol.anchor = st.anchor;
    sol.x = f3.x;
    sol.f = ComplexSpinor(n);
    sol.df = ComplexSpinor(n);
    for (std::size_t i = ia; i < n; ++i) {
        cplx e = std::exp(s * lat.x(i));
        sol.f.first[i] = e * m1[i];
        sol.f.second[i] = e * m2[i];
        sol.df.first[i] = e * (dm1[i] + s * m1[i]);
        sol.df.second[i] = e * (dm2[i] + s * m2[i]);
    }
    // f4 = -c1 f1 - c2 f2 + f~4, then the f3 admixture of the canonical member removed
    const cplx w1 = wronskian(f1, sol, ia), w2 = wronskian(f2, sol, ia);
    sol.c2 = w1 / (2.0 * I1 * k);
    sol.c1 = -w2 / (2.0 * I1 * k);
    for (std::size_t i = ia; i < n; ++i) {
        sol.f.first[i] -= sol.c1 * f1.f.first[i] + sol.c2 * f2.f.first[i];
        sol.f.second[i] -= sol.c1 * f1.f.second[i] + sol.c2 * f2.f.second[i];
        sol.df.first[i] -= sol.c1 * f1.df.first[i] + sol.c2 * f2.df.first[i];
        sol.df.second[i] -= sol.c1 * f1.df.second[i] + sol.c2 * f2.df.second[i];
    }
    JostSeries ser = jost_series(p, k, JostSpecies::F4, st.anchor, opt.potential_scale);
    std::array<cplx, 2> fs, dfs;
    ser.eval(st.anchor, fs, dfs);
    sol.d3 = wronskian(sol.value(ia), sol.deriv(ia), fs, dfs) / (2.0 * s);
    for (std::size_t i = ia; i < n; ++i) {
        sol.f.first[i] += sol.d3 * f3.f.first[i];
        sol.f.second[i] += sol.d3 * f3.f.second[i];
        sol.df.first[i] += sol.d3 * f3.df.first[i];
        sol.df.second[i] += sol.d3 * f3.df.second[i];
    }
    // extension to the left of the anchor
    if (ia > 0) {
        RealField nodes;
        for (std::size_t i = ia; i-- > 0;) nodes.push_back(lat.x(i));
        ComplexSpinor fl, dfl;
        march_jost_ode(p, k, st.anchor, sol.value(ia), sol.deriv(ia), nodes, fl, dfl, opt.potential_scale);
        for (std::size_t j = 0; j < nodes.size(); ++j) {
            std::size_t i = ia - 1 - j;
            sol.f.first[i] = fl.first[j];
            sol.f.second[i] = fl.second[j];
            sol.df.first[i] = dfl.first[j];
            sol.df.second[i] = dfl.second[j];
        }
    }
    fill_normalized(sol);
    return sol;
}

std::array<cplx, 4> scattering_matrix_at(const JostSolution& f1, const JostSolution& f3, double x) {
    return {reflected_wronskian(f1, f1, x), reflected_wronskian(f1, f3, x), reflected_wronskian(f3, f1, x),
            reflected_wronskian(f3, f3, x)};
}

ScatteringData scattering_matrix(const JostSolution& f1, const JostSolution& f3, bool check_x) {
    ScatteringData sd;
    sd.p = f1.p;
    sd.k = f1.k;
    sd.D = scattering_matrix_at(f1, f3, 0.0);
    sd.det = sd.D[0] * sd.D[3] - sd.D[1] * sd.D[2];
    sd.wronskians = sd.D;
    if (check_x && f1.x.front() <= -5.0 + 0.5 * f1.h && f1.x.back() >= 5.0) {
        double scale = 0;
        for (auto z : sd.D) scale = std::max(scale, std::abs(z));
        double worst = 0;
        for (double xv : {-5.0, 5.0}) {
            auto Dx = scattering_matrix_at(f1, f3, xv);
            for (int e = 0; e < 4; ++e) worst = std::max(worst, std::abs(Dx[e] - sd.D[e]) / scale);
        }
        sd.x_variation = worst;
    }
    return sd;
}

ScatteringData scattering_matrix(double p, cplx k, const Grid& grid, const JostOptions& opt) {
    JostSolution f3 = jost_f3(p, k, grid, opt);
    JostSolution f1 = jost_f1(p, k, grid, opt, f3);
    return scattering_matrix(f1, f3, true);
}

std::array<cplx, 2> p3_f1(double x, cplx k) {
    double t = std::tanh(x), s2 = 1.0 / (std::cosh(x) * std::cosh(x));
    cplx pre = std::exp(I1 * k * x) / (1.0 - k * k - 2.0 * I1 * k);
    return {pre * (1.0 - k * k - 2.0 * I1 * k * t - s2), pre * (-s2)};
}

std::array<cplx, 2> p3_f3(double x, cplx k) {
    cplx s = jost_s(k);
    double t = std::tanh(x), s2 = 1.0 / (std::cosh(x) * std::cosh(x));
    cplx pre = std::exp(-s * x) / (3.0 + k * k + 2.0 * s);
    return {pre * (-s2), pre * (3.0 + k * k + 2.0 * s * t - s2)};
}

std::array<cplx, 2> p3_f4(double x, cplx k) {
    cplx s = jost_s(k);
    double t = std::tanh(x), s2 = 1.0 / (std::cosh(x) * std::cosh(x));
    cplx pre = std::exp(s * x) / (3.0 + k * k - 2.0 * s);
    return {pre * (-s2), pre * (3.0 + k * k - 2.0 * s * t - s2)};
}

cplx p3_det_d(cplx k) {
    cplx s = jost_s(k);
    return -4.0 * I1 * k * ((1.0 - k * k + 2.0 * I1 * k) / (1.0 - k * k - 2.0 * I1 * k)) * s *
           ((3.0 + k * k - 2.0 * s) / (3.0 + k * k + 2.0 * s));
}

ResonanceSweep resonance_sweep(double p_min, double p_max, int steps, const Grid& grid, const JostOptions& opt) {
    if (steps < 2 || !(p_min < p_max)) throw Error(ErrorKind::Domain, "resonance_sweep: need steps >= 2 and p_min < p_max");
    ResonanceSweep out;
    out.rows.resize(steps);
    JostOptions o = opt;
    o.x_min = std::max(opt.x_min, 0.0);
    parallel_for(std::size_t(steps), [&](std::size_t i) {
        ResonanceRow& row = out.rows[i];
        row.p = p_min + (p_max - p_min) * double(i) / double(steps - 1);
        try {
            JostSolution f3 = jost_f3(row.p, 0.0, grid, o);
            JostSolution f1 = jost_f1(row.p, 0.0, grid, o, f3);
            row.det = scattering_matrix(f1, f3, false).det;
        } catch (const std::exception& e) {
            row.ok = false;
            row.error = e.what();
        }
    });
    out.min_modulus = std::numeric_limits<double>::infinity();
    const ResonanceRow* prev = nullptr;
    for (auto& row : out.rows) {
        if (!row.ok) continue;
        out.min_modulus = std::min(out.min_modulus, std::abs(row.det));
        const bool small = std::abs(row.det) < out.flag_threshold;
        if (small) row.flag = true;
        // a sign change next to a row already flagged as a zero carries no new information
        if (!small && prev && std::abs(prev->det) >= out.flag_threshold &&
            (prev->det.real() > 0) != (row.det.real() > 0))
            row.flag = true;
        if (row.flag) out.flagged_p.push_back(row.p);
        prev = &row;
    }
    return out;
}

ImaginaryRoot eigen_root_imaginary_axis(double p, const Grid& grid, std::array<double, 2> bracket,
                                        const JostOptions& opt) {
    JostOptions o = opt;
    o.x_min = std::max(opt.x_min, 0.0);
    ImaginaryRoot out;
    out.p = p;
    auto det_at = [&](double beta) {
        ++out.evaluations;
        cplx k(0.0, beta);
        JostSolution f3 = jost_f3(p, k, grid, o);
        JostSolution f1 = jost_f1(p, k, grid, o, f3);
        cplx d = scattering_matrix(f1, f3, false).det;
        out.det_imag = std::max(out.det_imag, std::abs(d.imag()) / std::max(1e-300, std::abs(d)));
        return d.real();
    };
    double lo = bracket[0], hi = bracket[1];
    double flo = 0, fhi = 0;
    if (lo == 0.0 && hi == 0.0) {
        const int scan = 48;
        const double b0 = 0.002, b1 = 1.0 - o.strip_eps0;
        double prev_b = b0, prev_f = det_at(b0);
        bool found = false;
        for (int j = 1; j <= scan && !found; ++j) {
            double b = b0 + (b1 - b0) * j / scan;
            double fb = det_at(b);
            if ((prev_f > 0) != (fb > 0)) {
                lo = prev_b;
                hi = b;
                flo = prev_f;
                fhi = fb;
                found = true;
            }
            prev_b = b;
            prev_f = fb;
        }
        if (!found) throw Error(ErrorKind::Bracketing, "eigen_root_imaginary_axis: no sign change on the scanned axis");
    } else {
        if (!(0.0 < lo && lo < hi && hi < 1.0))
            throw Error(ErrorKind::Bracketing, "eigen_root_imaginary_axis: bracket must lie in (0, 1)");
        flo = det_at(lo);
        fhi = det_at(hi);
        if ((flo > 0) == (fhi > 0))
            throw Error(ErrorKind::Bracketing, "eigen_root_imaginary_axis: no sign change on the bracket");
    }
    boost::uintmax_t max_it = 100;
    auto tol = [](double a, double b) { return std::abs(a - b) <= 1e-14 * std::max(1.0, std::abs(a)); };
    auto r = boost::math::tools::toms748_solve(det_at, lo, hi, flo, fhi, tol, max_it);
    out.beta = 0.5 * (r.first + r.second);
    out.lambda = 1.0 - out.beta * out.beta;
    return out;
}

MonotonicityAudit audit_monotonicity_jost(double p_min, double p_max, int points, const Grid& grid) {
    if (points < 2 || !(p_min < p_max)) throw Error(ErrorKind::Domain, "audit: need points >= 2 and p_min < p_max");
    MonotonicityAudit out;
    out.p.resize(points);
    out.lambda.resize(points);
    parallel_for(std::size_t(points), [&](std::size_t i) {
        out.p[i] = p_min + (p_max - p_min) * double(i) / double(points - 1);
        out.lambda[i] = eigen_root_imaginary_axis(out.p[i], grid).lambda;
    });
    for (std::size_t i = 1; i < out.lambda.size(); ++i)
        if (!(out.lambda[i] < out.lambda[i - 1])) out.strictly_decreasing = false;
    return out;
}

}  // namespace fgrlab
