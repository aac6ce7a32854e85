#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <numbers>

#include "epcav/error.hpp"
#include "epcav/modegeom.hpp"

namespace mode = epcav::mode;
using epcav::cplx;

namespace {

const std::vector<mode::ModeRegion> kRegions{{2.09e-11, 1.0}, {2.00e-12, 1.4550 * 1.4550}, {1.24e-12, 2.0411 * 2.0411}};
constexpr double kW0 = 1.70e-6;
const double kOmega0 = 2.0 * std::numbers::pi * mode::kCodata.c / 780e-9;
const double kDipole = 3.584e-29 / std::sqrt(2.0);

mode::ScalarField2D scaled(mode::ScalarField2D f, cplx s) {
    for (auto& a : f.amplitudes) a *= s;
    return f;
}

}  // namespace

TEST_CASE("uniform field on the unit square") {
    mode::ScalarField2D f{mode::linspace(0, 1, 11), mode::linspace(0, 1, 7), std::vector<cplx>(77, 1.0)};
    CHECK(mode::effective_mode_area(f) == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("Gaussian mode area is pi w^2") {
    const auto f = mode::gaussian_field(1.0, 6.0, 401);
    const double a = mode::effective_mode_area(f);
    CHECK(std::abs(a - std::numbers::pi) < 1e-3 * std::numbers::pi);
    const double fine = mode::effective_mode_area(mode::gaussian_field(1.0, 6.0, 801));
    CHECK(std::abs(fine - a) < 1e-4 * a);
}

TEST_CASE("cosine-Gaussian mode area") {
    const double l = 10.15e-6;
    const auto f = mode::cosine_gaussian_field(780e-9, l, kW0, 6.0 * kW0, 4001, 401);
    const double a = mode::effective_mode_area(f);
    CHECK(std::abs(a - mode::cosine_gaussian_area(l, kW0)) < 5e-3 * a);
    CHECK(std::abs(a - 2.09e-11) < 0.05 * 2.09e-11);
}

TEST_CASE("mode area invariances") {
    const auto f = mode::gaussian_field(0.7, 4.0, 301);
    const double a = mode::effective_mode_area(f);
    for (cplx s : {cplx(1e-3, 0.0), cplx(0.0, 1e3), cplx(-2.0, 5.0)})
        CHECK(std::abs(mode::effective_mode_area(scaled(f, s)) - a) < 1e-12 * a);
    auto d = f;
    for (auto& v : d.x) v *= 2.0;
    for (auto& v : d.y) v *= 2.0;
    CHECK(std::abs(mode::effective_mode_area(d) - 4.0 * a) < 1e-3 * 4.0 * a);
}

TEST_CASE("mode area input validation") {
    mode::ScalarField2D bad{{0.0}, {0.0, 1.0}, {1.0, 1.0}};
    CHECK_THROWS_AS(mode::effective_mode_area(bad), epcav::InvalidInput);
    mode::ScalarField2D unsorted{{0.0, 0.0}, {0.0, 1.0}, std::vector<cplx>(4, 1.0)};
    CHECK_THROWS_AS(mode::effective_mode_area(unsorted), epcav::InvalidInput);
    mode::ScalarField2D zero{{0.0, 1.0}, {0.0, 1.0}, std::vector<cplx>(4, 0.0)};
    CHECK_THROWS_AS(mode::effective_mode_area(zero), epcav::InvalidInput);
    mode::ScalarField2D shape{{0.0, 1.0}, {0.0, 1.0}, std::vector<cplx>(3, 1.0)};
    CHECK_THROWS_AS(mode::effective_mode_area(shape), epcav::InvalidInput);
}

TEST_CASE("coupling constant") {
    const double g0 = mode::coupling_constant_g0(kOmega0, kRegions, kW0, kDipole);
    CHECK(std::abs(g0 / (2.0 * std::numbers::pi) / 1e6 - 480.0) < 0.02 * 480.0);
    CHECK(mode::coupling_constant_g0(kOmega0, kRegions, kW0, 2.0 * kDipole) == doctest::Approx(2.0 * g0).epsilon(1e-15));

    const std::vector<mode::ModeRegion> vac{kRegions[0]};
    double all = 0.0;
    for (const auto& r : kRegions) all += r.rel_permittivity * r.a_eff;
    CHECK(mode::coupling_constant_g0(kOmega0, vac, kW0, kDipole) ==
          doctest::Approx(g0 * std::sqrt(all / kRegions[0].a_eff)).epsilon(1e-12));

    auto bigger = kRegions;
    for (std::size_t i = 0; i < bigger.size(); ++i) {
        auto r = kRegions;
        r[i].a_eff *= 1.1;
        CHECK(mode::coupling_constant_g0(kOmega0, r, kW0, kDipole) < g0);
    }
    CHECK(mode::coupling_constant_g0(kOmega0, kRegions, 1.1 * kW0, kDipole) < g0);

    const std::vector<mode::ModeRegion> none;
    CHECK_THROWS_AS(mode::coupling_constant_g0(kOmega0, none, kW0, kDipole), epcav::InvalidInput);
    const std::vector<mode::ModeRegion> sub{{1e-12, 0.5}};
    CHECK_THROWS_AS(mode::coupling_constant_g0(kOmega0, sub, kW0, kDipole), epcav::InvalidInput);
}
