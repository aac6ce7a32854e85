#pragma once

// Small dense complex linear algebra and the Jaynes-Cummings operator set.
//
// Joint Hilbert space ordering is atom (x) cavity: the basis index of |s, n> is
// s * (N + 1) + n, with s = 0 for the ground state |g> and s = 1 for |e>.

#include <complex>
#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

namespace epcav {

using cplx = std::complex<double>;
using CVector = std::vector<cplx>;

namespace qops {

class ComplexMatrix {
public:
    ComplexMatrix() = default;
    /// Zero-filled rows x cols matrix.
    ComplexMatrix(std::size_t rows, std::size_t cols);
    /// Row-major entries; throws InvalidInput on size mismatch or non-finite values.
    ComplexMatrix(std::size_t rows, std::size_t cols, std::vector<cplx> entries);
    ComplexMatrix(std::initializer_list<std::initializer_list<cplx>> rows);

    static ComplexMatrix identity(std::size_t n);
    static ComplexMatrix diagonal(std::span<const cplx> values);

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }
    bool square() const noexcept { return rows_ == cols_; }
    std::span<const cplx> entries() const noexcept { return data_; }

    cplx operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }
    cplx& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }

    ComplexMatrix adjoint() const;
    ComplexMatrix transpose() const;
    ComplexMatrix conjugate() const;
    cplx trace() const;
    /// Largest entry modulus.
    double max_abs() const noexcept;
    double frobenius_norm() const noexcept;

    CVector apply(std::span<const cplx> v) const;

    ComplexMatrix& operator+=(const ComplexMatrix& o);
    ComplexMatrix& operator-=(const ComplexMatrix& o);
    ComplexMatrix& operator*=(cplx s);

    friend ComplexMatrix operator+(ComplexMatrix a, const ComplexMatrix& b) { return a += b; }
    friend ComplexMatrix operator-(ComplexMatrix a, const ComplexMatrix& b) { return a -= b; }
    friend ComplexMatrix operator*(ComplexMatrix a, cplx s) { return a *= s; }
    friend ComplexMatrix operator*(cplx s, ComplexMatrix a) { return a *= s; }
    friend ComplexMatrix operator*(const ComplexMatrix& a, const ComplexMatrix& b);
    friend bool operator==(const ComplexMatrix&, const ComplexMatrix&) = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<cplx> data_;
};

/// Kronecker product a (x) b.
ComplexMatrix kron(const ComplexMatrix& a, const ComplexMatrix& b);

/// max |a_ij - b_ij|
double max_abs_diff(const ComplexMatrix& a, const ComplexMatrix& b);

double norm2(std::span<const cplx> v) noexcept;

struct OperatorSet {
    std::size_t n_fock = 0;
    ComplexMatrix a;
    ComplexMatrix a_dag;
    ComplexMatrix sigma_minus;
    ComplexMatrix sigma_plus;
    ComplexMatrix identity;

    std::size_t dim() const noexcept { return 2 * (n_fock + 1); }
    /// Basis index of |atom, n>, atom = 0 (ground) or 1 (excited).
    std::size_t index(std::size_t atom, std::size_t n) const noexcept { return atom * (n_fock + 1) + n; }
    ComplexMatrix photon_number() const { return a_dag * a; }
    ComplexMatrix excitation() const { return sigma_plus * sigma_minus; }
};

/// Ladder operators on the truncated joint space; n_fock = 0 is rejected.
OperatorSet build_operators(std::size_t n_fock);

struct Eig2Result {
    cplx plus;
    cplx minus;
    /// Columns are unnormalized eigenvectors for (plus, minus).
    ComplexMatrix vectors;
    /// Discriminant vanished with nonzero coupling: the two columns coincide.
    bool defective = false;
};

/// Closed-form spectrum of a 2x2 matrix. `plus` takes the principal square root of the
/// discriminant (non-negative real part; non-negative imaginary part on the imaginary axis).
Eig2Result eig2(const ComplexMatrix& m);

/// Principal square root with the branch rule used throughout the library.
cplx principal_sqrt(cplx z) noexcept;

/// Solve A x = b by LU with partial pivoting. Throws NumericError on a singular matrix.
CVector solve_linear(const ComplexMatrix& a, std::span<const cplx> b);

}  // namespace qops
}  // namespace epcav
