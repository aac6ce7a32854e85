#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "epcav/error.hpp"
#include "epcav/qops.hpp"

using epcav::cplx;
using epcav::CVector;
using epcav::qops::ComplexMatrix;
namespace qops = epcav::qops;

namespace {

ComplexMatrix random_matrix(std::mt19937_64& rng, std::size_t n) {
    std::normal_distribution<double> nd;
    ComplexMatrix m(n, n);
    for (std::size_t r = 0; r < n; ++r)
        for (std::size_t c = 0; c < n; ++c) m(r, c) = cplx(nd(rng), nd(rng));
    return m;
}

}  // namespace

TEST_CASE("matrix constructors validate shape and finiteness") {
    CHECK_THROWS_AS(ComplexMatrix(2, 2, {1.0, 2.0, 3.0}), epcav::InvalidInput);
    CHECK_THROWS_AS(ComplexMatrix(1, 1, {cplx(std::nan(""), 0.0)}), epcav::InvalidInput);
    CHECK_THROWS_AS((ComplexMatrix{{1.0, 2.0}, {3.0}}), epcav::InvalidInput);
    const ComplexMatrix m{{1.0, 2.0}, {3.0, 4.0}};
    CHECK(m.rows() == 2);
    CHECK(m(1, 0) == cplx(3.0));
    CHECK(m.trace() == cplx(5.0));
}

TEST_CASE("kron follows the left-factor-major convention") {
    const ComplexMatrix a{{1.0, 2.0}, {3.0, 4.0}};
    const ComplexMatrix b{{0.0, 1.0}, {1.0, 0.0}};
    const ComplexMatrix k = qops::kron(a, b);
    CHECK(k.rows() == 4);
    CHECK(k(0, 1) == cplx(1.0));
    CHECK(k(2, 1) == cplx(3.0));
    CHECK(k(3, 0) == cplx(3.0));
    CHECK(k(2, 3) == cplx(4.0));
    CHECK(k(1, 2) == cplx(2.0));
}

TEST_CASE("operator set for N=3") {
    const auto ops = qops::build_operators(3);
    CHECK(ops.dim() == 8);
    for (const auto* m : {&ops.a, &ops.a_dag, &ops.sigma_minus, &ops.sigma_plus, &ops.identity}) {
        CHECK(m->rows() == 8);
        CHECK(m->cols() == 8);
    }
    CHECK(ops.a_dag == ops.a.adjoint());
    CHECK(ops.sigma_plus == ops.sigma_minus.adjoint());

    for (std::size_t atom = 0; atom < 2; ++atom)
        for (std::size_t m = 0; m <= 3; ++m)
            for (std::size_t n = 0; n <= 3; ++n) {
                const cplx expect = (m + 1 == n) ? std::sqrt(static_cast<double>(n)) : 0.0;
                CHECK(ops.a(ops.index(atom, m), ops.index(atom, n)) == expect);
            }

    const ComplexMatrix num = ops.photon_number();
    for (std::size_t n = 0; n <= 3; ++n) CHECK(std::abs(num(ops.index(0, n), ops.index(0, n)) - cplx(double(n))) < 1e-14);

    const ComplexMatrix comm = ops.a * ops.a_dag - ops.a_dag * ops.a;
    for (std::size_t n = 0; n < 3; ++n) {
        CVector ket(8, 0.0);
        ket[ops.index(0, n)] = 1.0;
        const CVector out = comm.apply(ket);
        for (std::size_t i = 0; i < 8; ++i) CHECK(std::abs(out[i] - ket[i]) < 1e-15);
    }
    CHECK(ops.excitation().trace() == cplx(4.0));
    CHECK_THROWS_AS(qops::build_operators(0), epcav::InvalidInput);
}

TEST_CASE("principal square root branch") {
    CHECK(qops::principal_sqrt(cplx(4.0, 0.0)) == cplx(2.0, 0.0));
    const cplx r = qops::principal_sqrt(cplx(-4.0, -0.0));
    CHECK(r.real() == 0.0);
    CHECK(r.imag() == doctest::Approx(2.0));
    CHECK(qops::principal_sqrt(cplx(-1.0, -1e-3)).real() > 0.0);
}

TEST_CASE("eig2 diagonal and EP cases") {
    const auto d = qops::eig2(ComplexMatrix{{1.0, 0.0}, {0.0, 2.0}});
    CHECK(d.plus == cplx(2.0));
    CHECK(d.minus == cplx(1.0));
    CHECK(d.vectors(0, 0) == cplx(0.0));
    CHECK(d.vectors(1, 0) == cplx(1.0));
    CHECK(d.vectors(0, 1) == cplx(1.0));
    CHECK_FALSE(d.defective);

    const cplx i{0.0, 1.0};
    const auto ep = qops::eig2(ComplexMatrix{{-3.03 * i, 121.485}, {121.485, -246.0 * i}});
    CHECK(ep.defective);
    CHECK(ep.plus == ep.minus);
    CHECK(std::abs(ep.plus - cplx(0.0, -124.515)) < 1e-9);
    CHECK_THROWS_AS(qops::eig2(ComplexMatrix(3, 3)), epcav::InvalidInput);
}

TEST_CASE("eig2 trace and determinant identities on random matrices") {
    std::mt19937_64 rng(7);
    double worst = 0.0;
    for (int k = 0; k < 1000; ++k) {
        const ComplexMatrix m = random_matrix(rng, 2);
        const auto e = qops::eig2(m);
        const cplx tr = m.trace();
        const cplx det = m(0, 0) * m(1, 1) - m(0, 1) * m(1, 0);
        const double scale = std::max(1.0, m.max_abs() * m.max_abs());
        worst = std::max(worst, std::abs(e.plus + e.minus - tr) / std::max(1.0, m.max_abs()));
        worst = std::max(worst, std::abs(e.plus * e.minus - det) / scale);
        for (int col = 0; col < 2; ++col) {
            const cplx lambda = col == 0 ? e.plus : e.minus;
            const CVector v{e.vectors(0, col), e.vectors(1, col)};
            const CVector mv = m.apply(v);
            const double vn = std::sqrt(qops::norm2(v));
            worst = std::max(worst, std::abs(mv[0] - lambda * v[0]) / (vn * scale));
            worst = std::max(worst, std::abs(mv[1] - lambda * v[1]) / (vn * scale));
        }
    }
    CHECK(worst < 1e-12);
}

TEST_CASE("solve_linear") {
    const CVector b{2.0, 4.0};
    const CVector x = qops::solve_linear(ComplexMatrix{{2.0, 0.0}, {0.0, 4.0}}, b);
    CHECK(x[0] == cplx(1.0));
    CHECK(x[1] == cplx(1.0));
    CHECK(qops::solve_linear(ComplexMatrix::identity(2), b) == b);

    std::mt19937_64 rng(11);
    std::normal_distribution<double> nd;
    for (int k = 0; k < 50; ++k) {
        const ComplexMatrix a = random_matrix(rng, 8);
        CVector rhs(8);
        for (auto& v : rhs) v = cplx(nd(rng), nd(rng));
        const CVector sol = qops::solve_linear(a, rhs);
        const CVector back = a.apply(sol);
        double res = 0.0;
        for (std::size_t i = 0; i < 8; ++i) res += std::norm(back[i] - rhs[i]);
        CHECK(std::sqrt(res) <= 1e-10 * std::sqrt(qops::norm2(rhs)));
    }
    CHECK_THROWS_AS(qops::solve_linear(ComplexMatrix{{1.0, 2.0}, {2.0, 4.0}}, b), epcav::NumericError);
    CHECK_THROWS_AS(qops::solve_linear(ComplexMatrix(2, 3), b), epcav::InvalidInput);
}
