#include "epcav/modegeom.hpp"

#include <cmath>
#include <numbers>

#include "epcav/error.hpp"

namespace epcav::mode {

namespace {

void check_axis(const std::vector<double>& a, const char* name) {
    if (a.size() < 2) throw InvalidInput(std::string("ScalarField2D: ") + name + " needs at least 2 points");
    for (std::size_t i = 1; i < a.size(); ++i)
        if (!(a[i] > a[i - 1]))
            throw InvalidInput(std::string("ScalarField2D: ") + name + " must be strictly increasing");
}

// Trapezoid weights for a non-uniform axis.
std::vector<double> weights(const std::vector<double>& a) {
    std::vector<double> w(a.size(), 0.0);
    for (std::size_t i = 1; i < a.size(); ++i) {
        const double h = 0.5 * (a[i] - a[i - 1]);
        w[i - 1] += h;
        w[i] += h;
    }
    return w;
}

}  // namespace

void ScalarField2D::validate() const {
    check_axis(x, "x");
    check_axis(y, "y");
    if (amplitudes.size() != x.size() * y.size())
        throw InvalidInput("ScalarField2D: amplitude count does not match the grid");
    for (const auto& a : amplitudes)
        if (!std::isfinite(a.real()) || !std::isfinite(a.imag())) throw InvalidInput("ScalarField2D: non-finite amplitude");
}

double effective_mode_area(const ScalarField2D& field) {
    field.validate();
    const auto wx = weights(field.x);
    const auto wy = weights(field.y);
    double i2 = 0.0, i4 = 0.0;
    for (std::size_t iy = 0; iy < field.y.size(); ++iy)
        for (std::size_t ix = 0; ix < field.x.size(); ++ix) {
            const double e2 = std::norm(field.at(ix, iy));
            const double w = wx[ix] * wy[iy];
            i2 += w * e2;
            i4 += w * e2 * e2;
        }
    if (!(i4 > 0.0)) throw InvalidInput("effective_mode_area: field is identically zero");
    return i2 * i2 / i4;
}

double coupling_constant_g0(double omega0, std::span<const ModeRegion> regions, double w0, double d_ge,
                            const PhysicalConstants& k) {
    if (regions.empty()) throw InvalidInput("coupling_constant_g0: no mode regions");
    if (!(omega0 > 0.0) || !(w0 > 0.0) || !(d_ge > 0.0))
        throw InvalidInput("coupling_constant_g0: omega0, w0 and d_ge must be > 0");
    double weighted = 0.0;
    for (const auto& r : regions) {
        if (!(r.a_eff > 0.0)) throw InvalidInput("coupling_constant_g0: a_eff must be > 0");
        if (!(r.rel_permittivity >= 1.0)) throw InvalidInput("coupling_constant_g0: rel_permittivity must be >= 1");
        weighted += k.eps0 * r.rel_permittivity * r.a_eff;
    }
    return std::sqrt(omega0 / (2.0 * k.hbar * weighted * std::sqrt(std::numbers::pi) * w0)) * d_ge;
}

std::vector<double> linspace(double lo, double hi, std::size_t n) {
    if (n < 2) throw InvalidInput("linspace: need at least 2 points");
    std::vector<double> v(n);
    for (std::size_t i = 0; i < n; ++i) v[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
    return v;
}

ScalarField2D gaussian_field(double w, double half, std::size_t n) {
    if (!(w > 0.0) || !(half > 0.0)) throw InvalidInput("gaussian_field: w and half must be > 0");
    ScalarField2D f{linspace(-half, half, n), linspace(-half, half, n), {}};
    f.amplitudes.reserve(n * n);
    for (double y : f.y)
        for (double x : f.x) f.amplitudes.emplace_back(std::exp(-(x * x + y * y) / (w * w)));
    return f;
}

ScalarField2D cosine_gaussian_field(double wavelength, double length, double w0, double y_half, std::size_t nx,
                                    std::size_t ny) {
    if (!(wavelength > 0.0) || !(length > 0.0) || !(w0 > 0.0) || !(y_half > 0.0))
        throw InvalidInput("cosine_gaussian_field: lengths must be > 0");
    ScalarField2D f{linspace(0.0, length, nx), linspace(-y_half, y_half, ny), {}};
    f.amplitudes.reserve(nx * ny);
    const double k = 2.0 * std::numbers::pi / wavelength;
    for (double y : f.y)
        for (double x : f.x) f.amplitudes.emplace_back(std::cos(k * x) * std::exp(-y * y / (w0 * w0)));
    return f;
}

double cosine_gaussian_area(double length, double w0) noexcept {
    return 2.0 * length / 3.0 * std::sqrt(std::numbers::pi) * w0;
}

}  // namespace epcav::mode
