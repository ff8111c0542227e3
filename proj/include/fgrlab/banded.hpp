#pragma once

#include <cstddef>
#include <vector>

namespace fgrlab {

// General real band matrix in LAPACK band storage with room for the LU fill-in.
class BandedMatrix {
public:
    BandedMatrix() = default;
    BandedMatrix(std::size_t n, int kl, int ku);

    std::size_t size() const { return n_; }
    int lower() const { return kl_; }
    int upper() const { return ku_; }

    double get(std::size_t i, std::size_t j) const;
    void set(std::size_t i, std::size_t j, double v);
    void add(std::size_t i, std::size_t j, double v);
    bool in_band(std::size_t i, std::size_t j) const;
    void shift_diagonal(double mu);

    std::vector<double> apply(const std::vector<double>& x) const;
    // product of two band matrices (bandwidths add)
    BandedMatrix operator*(const BandedMatrix& b) const;

    const std::vector<double>& storage() const { return ab_; }
    std::vector<double>& storage() { return ab_; }
    int ldab() const { return 2 * kl_ + ku_ + 1; }

private:
    std::size_t n_ = 0;
    int kl_ = 0, ku_ = 0;
    std::vector<double> ab_;
};

// dgbtrf factorization; immutable after construction
class BandedLU {
public:
    explicit BandedLU(const BandedMatrix& a);
    bool singular() const { return info_ > 0; }
    std::vector<double> solve(const std::vector<double>& b) const;
    // reciprocal 1-norm condition estimate (dgbcon)
    double rcond() const;

private:
    BandedMatrix lu_;
    std::vector<int> ipiv_;
    double anorm_ = 0;
    int info_ = 0;
};

}  // namespace fgrlab
