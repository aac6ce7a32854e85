#pragma once

// Effective mode area and the single-atom coupling constant, in SI units.

#include <span>
#include <vector>

#include "epcav/qops.hpp"

namespace epcav::mode {

struct ScalarField2D {
    std::vector<double> x;  // m, strictly increasing
    std::vector<double> y;  // m, strictly increasing
    /// amplitudes[iy * x.size() + ix]
    std::vector<cplx> amplitudes;

    /// Throws InvalidInput on a shape mismatch, non-monotone axes or fewer than two points per axis.
    void validate() const;
    cplx at(std::size_t ix, std::size_t iy) const { return amplitudes[iy * x.size() + ix]; }
};

struct PhysicalConstants {
    double hbar = 1.054571817e-34;   // J s
    double eps0 = 8.8541878128e-12;  // F / m
    double c = 299792458.0;          // m / s
};

inline constexpr PhysicalConstants kCodata{};

struct ModeRegion {
    double a_eff;             // m^2
    double rel_permittivity;  // n^2
};

/// (integral |E|^2)^2 / integral |E|^4 by the 2D trapezoid rule. Throws InvalidInput for a zero field.
double effective_mode_area(const ScalarField2D& field);

/// sqrt(omega0 / (2 hbar (sum eps0 n_i^2 A_i) sqrt(pi) w0)) d_ge, in rad/s.
double coupling_constant_g0(double omega0, std::span<const ModeRegion> regions, double w0, double d_ge,
                            const PhysicalConstants& k = kCodata);

std::vector<double> linspace(double lo, double hi, std::size_t n);

/// exp(-(x^2 + y^2) / w^2) on [-half, half]^2.
ScalarField2D gaussian_field(double w, double half, std::size_t n);

/// cos(2 pi x / wavelength) exp(-y^2 / w0^2) for x in [0, length], |y| <= y_half.
ScalarField2D cosine_gaussian_field(double wavelength, double length, double w0, double y_half, std::size_t nx,
                                    std::size_t ny);

/// (2 length / 3) sqrt(pi) w0, the many-period limit of the cosine-Gaussian mode area.
double cosine_gaussian_area(double length, double w0) noexcept;

}  // namespace epcav::mode
