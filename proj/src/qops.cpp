#include "epcav/qops.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "epcav/error.hpp"

namespace epcav::qops {

namespace {

bool finite(cplx z) { return std::isfinite(z.real()) && std::isfinite(z.imag()); }

void require_same_shape(const ComplexMatrix& a, const ComplexMatrix& b, const char* op) {
    if (a.rows() != b.rows() || a.cols() != b.cols()) {
        std::ostringstream msg;
        msg << op << ": shape mismatch " << a.rows() << "x" << a.cols() << " vs " << b.rows()
            << "x" << b.cols();
        throw InvalidInput(msg.str());
    }
}

}  // namespace

ComplexMatrix::ComplexMatrix(std::size_t rows, std::size_t cols)
    : rows_(rows), cols_(cols), data_(rows * cols, cplx{0.0, 0.0}) {}

ComplexMatrix::ComplexMatrix(std::size_t rows, std::size_t cols, std::vector<cplx> entries)
    : rows_(rows), cols_(cols), data_(std::move(entries)) {
    if (data_.size() != rows_ * cols_) {
        throw InvalidInput("ComplexMatrix: entry count does not match rows*cols");
    }
    if (!std::all_of(data_.begin(), data_.end(), finite)) {
        throw InvalidInput("ComplexMatrix: non-finite entry");
    }
}

ComplexMatrix::ComplexMatrix(std::initializer_list<std::initializer_list<cplx>> rows) {
    rows_ = rows.size();
    cols_ = rows_ ? rows.begin()->size() : 0;
    data_.reserve(rows_ * cols_);
    for (const auto& r : rows) {
        if (r.size() != cols_) throw InvalidInput("ComplexMatrix: ragged initializer");
        for (const auto& v : r) {
            if (!finite(v)) throw InvalidInput("ComplexMatrix: non-finite entry");
            data_.push_back(v);
        }
    }
}

ComplexMatrix ComplexMatrix::identity(std::size_t n) {
    ComplexMatrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
}

ComplexMatrix ComplexMatrix::diagonal(std::span<const cplx> values) {
    ComplexMatrix m(values.size(), values.size());
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (!finite(values[i])) throw InvalidInput("ComplexMatrix: non-finite entry");
        m(i, i) = values[i];
    }
    return m;
}

ComplexMatrix ComplexMatrix::adjoint() const {
    ComplexMatrix m(cols_, rows_);
    for (std::size_t r = 0; r < rows_; ++r)
        for (std::size_t c = 0; c < cols_; ++c) m(c, r) = std::conj((*this)(r, c));
    return m;
}

ComplexMatrix ComplexMatrix::transpose() const {
    ComplexMatrix m(cols_, rows_);
    for (std::size_t r = 0; r < rows_; ++r)
        for (std::size_t c = 0; c < cols_; ++c) m(c, r) = (*this)(r, c);
    return m;
}

ComplexMatrix ComplexMatrix::conjugate() const {
    ComplexMatrix m = *this;
    for (auto& v : m.data_) v = std::conj(v);
    return m;
}

cplx ComplexMatrix::trace() const {
    if (!square()) throw InvalidInput("trace: matrix is not square");
    cplx t = 0.0;
    for (std::size_t i = 0; i < rows_; ++i) t += (*this)(i, i);
    return t;
}

double ComplexMatrix::max_abs() const noexcept {
    double m = 0.0;
    for (const auto& v : data_) m = std::max(m, std::abs(v));
    return m;
}

double ComplexMatrix::frobenius_norm() const noexcept {
    double s = 0.0;
    for (const auto& v : data_) s += std::norm(v);
    return std::sqrt(s);
}

CVector ComplexMatrix::apply(std::span<const cplx> v) const {
    if (v.size() != cols_) throw InvalidInput("apply: vector length does not match columns");
    CVector out(rows_, cplx{0.0, 0.0});
    for (std::size_t r = 0; r < rows_; ++r) {
        cplx acc = 0.0;
        const cplx* row = data_.data() + r * cols_;
        for (std::size_t c = 0; c < cols_; ++c) acc += row[c] * v[c];
        out[r] = acc;
    }
    return out;
}

ComplexMatrix& ComplexMatrix::operator+=(const ComplexMatrix& o) {
    require_same_shape(*this, o, "operator+");
    for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += o.data_[i];
    return *this;
}

ComplexMatrix& ComplexMatrix::operator-=(const ComplexMatrix& o) {
    require_same_shape(*this, o, "operator-");
    for (std::size_t i = 0; i < data_.size(); ++i) data_[i] -= o.data_[i];
    return *this;
}

ComplexMatrix& ComplexMatrix::operator*=(cplx s) {
    for (auto& v : data_) v *= s;
    return *this;
}

ComplexMatrix operator*(const ComplexMatrix& a, const ComplexMatrix& b) {
    if (a.cols_ != b.rows_) throw InvalidInput("operator*: inner dimensions differ");
    ComplexMatrix m(a.rows_, b.cols_);
    for (std::size_t i = 0; i < a.rows_; ++i) {
        for (std::size_t k = 0; k < a.cols_; ++k) {
            const cplx aik = a(i, k);
            if (aik == cplx{0.0, 0.0}) continue;
            for (std::size_t j = 0; j < b.cols_; ++j) m(i, j) += aik * b(k, j);
        }
    }
    return m;
}

ComplexMatrix kron(const ComplexMatrix& a, const ComplexMatrix& b) {
    ComplexMatrix m(a.rows() * b.rows(), a.cols() * b.cols());
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j) {
            const cplx aij = a(i, j);
            if (aij == cplx{0.0, 0.0}) continue;
            for (std::size_t k = 0; k < b.rows(); ++k)
                for (std::size_t l = 0; l < b.cols(); ++l)
                    m(i * b.rows() + k, j * b.cols() + l) = aij * b(k, l);
        }
    return m;
}

double max_abs_diff(const ComplexMatrix& a, const ComplexMatrix& b) {
    require_same_shape(a, b, "max_abs_diff");
    double d = 0.0;
    for (std::size_t i = 0; i < a.entries().size(); ++i)
        d = std::max(d, std::abs(a.entries()[i] - b.entries()[i]));
    return d;
}

double norm2(std::span<const cplx> v) noexcept {
    double s = 0.0;
    for (const auto& x : v) s += std::norm(x);
    return s;
}

OperatorSet build_operators(std::size_t n_fock) {
    if (n_fock == 0) throw InvalidInput("build_operators: n_fock must be at least 1");
    const std::size_t nc = n_fock + 1;

    ComplexMatrix a_cav(nc, nc);
    for (std::size_t n = 1; n < nc; ++n) a_cav(n - 1, n) = std::sqrt(static_cast<double>(n));
    // sigma_minus = |g><e|
    ComplexMatrix lower{{0.0, 1.0}, {0.0, 0.0}};

    OperatorSet ops;
    ops.n_fock = n_fock;
    ops.a = kron(ComplexMatrix::identity(2), a_cav);
    ops.a_dag = ops.a.adjoint();
    ops.sigma_minus = kron(lower, ComplexMatrix::identity(nc));
    ops.sigma_plus = ops.sigma_minus.adjoint();
    ops.identity = ComplexMatrix::identity(2 * nc);
    return ops;
}

cplx principal_sqrt(cplx z) noexcept {
    cplx s = std::sqrt(z);
    if (s.real() == 0.0 && s.imag() < 0.0) s = -s;
    return s;
}

Eig2Result eig2(const ComplexMatrix& m) {
    if (m.rows() != 2 || m.cols() != 2) throw InvalidInput("eig2: matrix must be 2x2");
    const cplx a = m(0, 0), b = m(0, 1), c = m(1, 0), d = m(1, 1);
    const cplx diff = a - d;
    const cplx disc = diff * diff + 4.0 * b * c;
    const double scale = std::norm(diff) + 4.0 * std::abs(b * c);
    const bool coupled = b != cplx{0.0, 0.0} || c != cplx{0.0, 0.0};

    Eig2Result out;
    cplx root = principal_sqrt(disc);
    if (coupled && std::abs(disc) <= 1e-9 * scale) {
        out.defective = true;
        root = 0.0;
    }
    out.plus = 0.5 * (a + d + root);
    out.minus = 0.5 * (a + d - root);
    out.vectors = ComplexMatrix(2, 2);

    const double tiny = 1e-14 * std::max({std::abs(a), std::abs(b), std::abs(c), std::abs(d), 1e-300});
    auto column = [&](cplx lambda) -> std::pair<cplx, cplx> {
        if (!coupled) {
            return std::abs(lambda - a) <= std::abs(lambda - d) ? std::pair<cplx, cplx>{1.0, 0.0}
                                                                 : std::pair<cplx, cplx>{0.0, 1.0};
        }
        // Form (b, lambda - a); fall back to (lambda - d, c) when it vanishes.
        if (std::hypot(std::abs(b), std::abs(lambda - a)) > tiny) return {b, lambda - a};
        return {lambda - d, c};
    };
    // Diagonal matrices with equal entries keep the identity basis.
    auto [p0, p1] = column(out.plus);
    auto [m0, m1] = column(out.minus);
    if (!coupled && std::abs(a - d) <= tiny) {
        p0 = 1.0, p1 = 0.0, m0 = 0.0, m1 = 1.0;
    }
    out.vectors(0, 0) = p0;
    out.vectors(1, 0) = p1;
    out.vectors(0, 1) = m0;
    out.vectors(1, 1) = m1;
    return out;
}

CVector solve_linear(const ComplexMatrix& a, std::span<const cplx> b) {
    if (!a.square()) throw InvalidInput("solve_linear: matrix is not square");
    const std::size_t n = a.rows();
    if (b.size() != n) throw InvalidInput("solve_linear: right-hand side length mismatch");

    std::vector<cplx> lu(a.entries().begin(), a.entries().end());
    CVector x(b.begin(), b.end());
    const double scale = a.max_abs();
    if (scale == 0.0) throw NumericError("solve_linear: zero matrix");

    double max_pivot = 0.0;
    double min_pivot = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < n; ++k) {
        std::size_t p = k;
        double best = std::abs(lu[k * n + k]);
        for (std::size_t r = k + 1; r < n; ++r) {
            const double v = std::abs(lu[r * n + k]);
            if (v > best) best = v, p = r;
        }
        max_pivot = std::max(max_pivot, best);
        min_pivot = std::min(min_pivot, best);
        if (best <= std::numeric_limits<double>::epsilon() * static_cast<double>(n) * scale) {
            std::ostringstream msg;
            msg << "solve_linear: matrix singular to working precision (pivot " << best
                << " at column " << k << ", pivot ratio estimate "
                << (best > 0.0 ? max_pivot / best : std::numeric_limits<double>::infinity()) << ")";
            throw NumericError(msg.str());
        }
        if (p != k) {
            for (std::size_t c = 0; c < n; ++c) std::swap(lu[k * n + c], lu[p * n + c]);
            std::swap(x[k], x[p]);
        }
        const cplx pivot = lu[k * n + k];
        for (std::size_t r = k + 1; r < n; ++r) {
            const cplx f = lu[r * n + k] / pivot;
            if (f == cplx{0.0, 0.0}) continue;
            lu[r * n + k] = f;
            for (std::size_t c = k + 1; c < n; ++c) lu[r * n + c] -= f * lu[k * n + c];
            x[r] -= f * x[k];
        }
    }
    for (std::size_t k = n; k-- > 0;) {
        cplx acc = x[k];
        for (std::size_t c = k + 1; c < n; ++c) acc -= lu[k * n + c] * x[c];
        x[k] = acc / lu[k * n + k];
    }
    return x;
}

}  // namespace epcav::qops
