#include "fgrlab/banded.hpp"

#include <algorithm>
#include <cmath>

#include "fgrlab/grid.hpp"

extern "C" {
void dgbtrf_(const int* m, const int* n, const int* kl, const int* ku, double* ab, const int* ldab, int* ipiv,
             int* info);
void dgbtrs_(const char* trans, const int* n, const int* kl, const int* ku, const int* nrhs, const double* ab,
             const int* ldab, const int* ipiv, double* b, const int* ldb, int* info);
void dgbcon_(const char* norm, const int* n, const int* kl, const int* ku, const double* ab, const int* ldab,
             const int* ipiv, const double* anorm, double* rcond, double* work, int* iwork, int* info);
}

namespace fgrlab {

BandedMatrix::BandedMatrix(std::size_t n, int kl, int ku)
    : n_(n), kl_(kl), ku_(ku), ab_(static_cast<std::size_t>(2 * kl + ku + 1) * n, 0.0) {}

bool BandedMatrix::in_band(std::size_t i, std::size_t j) const {
    const auto d = static_cast<long>(j) - static_cast<long>(i);
    return d <= ku_ && -d <= kl_ && i < n_ && j < n_;
}

double BandedMatrix::get(std::size_t i, std::size_t j) const {
    if (!in_band(i, j)) return 0.0;
    return ab_[j * static_cast<std::size_t>(ldab()) + static_cast<std::size_t>(kl_ + ku_) + i - j];
}

void BandedMatrix::set(std::size_t i, std::size_t j, double v) {
    if (!in_band(i, j)) throw Error(ErrorKind::Data, "banded: entry outside band");
    ab_[j * static_cast<std::size_t>(ldab()) + static_cast<std::size_t>(kl_ + ku_) + i - j] = v;
}

void BandedMatrix::add(std::size_t i, std::size_t j, double v) {
    if (!in_band(i, j)) throw Error(ErrorKind::Data, "banded: entry outside band");
    ab_[j * static_cast<std::size_t>(ldab()) + static_cast<std::size_t>(kl_ + ku_) + i - j] += v;
}

void BandedMatrix::shift_diagonal(double mu) {
    for (std::size_t i = 0; i < n_; ++i) add(i, i, -mu);
}

std::vector<double> BandedMatrix::apply(const std::vector<double>& x) const {
    std::vector<double> y(n_, 0.0);
    for (std::size_t i = 0; i < n_; ++i) {
        const std::size_t j0 = i >= static_cast<std::size_t>(kl_) ? i - static_cast<std::size_t>(kl_) : 0;
        const std::size_t j1 = std::min(n_ - 1, i + static_cast<std::size_t>(ku_));
        double s = 0;
        for (std::size_t j = j0; j <= j1; ++j) s += get(i, j) * x[j];
        y[i] = s;
    }
    return y;
}

BandedMatrix BandedMatrix::operator*(const BandedMatrix& b) const {
    BandedMatrix c(n_, kl_ + b.kl_, ku_ + b.ku_);
    for (std::size_t i = 0; i < n_; ++i) {
        const std::size_t k0 = i >= static_cast<std::size_t>(kl_) ? i - static_cast<std::size_t>(kl_) : 0;
        const std::size_t k1 = std::min(n_ - 1, i + static_cast<std::size_t>(ku_));
        for (std::size_t k = k0; k <= k1; ++k) {
            const double aik = get(i, k);
            if (aik == 0.0) continue;
            const std::size_t j0 = k >= static_cast<std::size_t>(b.kl_) ? k - static_cast<std::size_t>(b.kl_) : 0;
            const std::size_t j1 = std::min(n_ - 1, k + static_cast<std::size_t>(b.ku_));
            for (std::size_t j = j0; j <= j1; ++j) c.add(i, j, aik * b.get(k, j));
        }
    }
    return c;
}

BandedLU::BandedLU(const BandedMatrix& a) : lu_(a), ipiv_(a.size()) {
    const int n = static_cast<int>(a.size());
    const int kl = a.lower(), ku = a.upper(), ld = a.ldab();
    // 1-norm of the original matrix for dgbcon
    std::vector<double> col(a.size(), 0.0);
    for (std::size_t j = 0; j < a.size(); ++j) {
        const std::size_t i0 = j >= static_cast<std::size_t>(ku) ? j - static_cast<std::size_t>(ku) : 0;
        const std::size_t i1 = std::min(a.size() - 1, j + static_cast<std::size_t>(kl));
        for (std::size_t i = i0; i <= i1; ++i) col[j] += std::abs(a.get(i, j));
    }
    anorm_ = col.empty() ? 0.0 : *std::max_element(col.begin(), col.end());
    dgbtrf_(&n, &n, &kl, &ku, lu_.storage().data(), &ld, ipiv_.data(), &info_);
    if (info_ < 0) throw Error(ErrorKind::Data, "dgbtrf: illegal argument");
}

std::vector<double> BandedLU::solve(const std::vector<double>& b) const {
    if (singular()) throw Error(ErrorKind::NearSingular, "banded LU is exactly singular");
    std::vector<double> x = b;
    const int n = static_cast<int>(lu_.size());
    const int kl = lu_.lower(), ku = lu_.upper(), ld = lu_.ldab(), nrhs = 1;
    int info = 0;
    const char t = 'N';
    dgbtrs_(&t, &n, &kl, &ku, &nrhs, lu_.storage().data(), &ld, ipiv_.data(), x.data(), &n, &info);
    if (info != 0) throw Error(ErrorKind::Data, "dgbtrs failed");
    return x;
}

double BandedLU::rcond() const {
    if (singular()) return 0.0;
    const int n = static_cast<int>(lu_.size());
    const int kl = lu_.lower(), ku = lu_.upper(), ld = lu_.ldab();
    double rc = 0;
    std::vector<double> work(3 * lu_.size());
    std::vector<int> iwork(lu_.size());
    int info = 0;
    const char norm = '1';
    dgbcon_(&norm, &n, &kl, &ku, lu_.storage().data(), &ld, ipiv_.data(), &anorm_, &rc, work.data(), iwork.data(),
            &info);
    return rc;
}

}  // namespace fgrlab
