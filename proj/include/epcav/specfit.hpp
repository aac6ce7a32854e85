#pragma once

// Levenberg-Marquardt least squares and the two spectral line-shape models.

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "epcav/dynamics.hpp"
#include "epcav/nonhermitian.hpp"

namespace epcav::fit {

/// y = f(x; p)
using ModelFn = std::function<double(double x, std::span<const double> p)>;

struct Bounds {
    std::vector<double> lower;
    std::vector<double> upper;
};

enum class Stop { gradient, step, iterations, stagnation };

struct FitResult {
    std::string model;
    std::vector<std::string> names;
    std::vector<double> params;
    /// One-sigma estimates from (J^T J)^-1 SSR / (m - n); empty when m == n or J^T J is singular.
    std::vector<double> errors;
    /// Sum of squared residuals.
    double residual_norm = 0.0;
    bool converged = false;
    int iterations = 0;
    Stop stop = Stop::iterations;
    /// |J^T r| at the returned parameters.
    double gradient_norm = 0.0;
    /// max_j |(J^T r)_j| / (|J_j| |r|), the scale-free stationarity measure.
    double scaled_gradient = 0.0;
    /// residual_norm after every accepted step, starting with the initial value.
    std::vector<double> history;

    double param(const std::string& name) const;
};

struct Options {
    int max_iterations = 500;
    double xtol = 1e-10;
    double gtol = 1e-10;
    /// Required scaled gradient before a step- or stagnation-terminated run counts as converged.
    double scaled_gtol = 1e-6;
};

/// Minimises sum (f(x_i; p) - y_i)^2 by damped Gauss-Newton with a forward-difference Jacobian
/// (step max(1e-8, 1e-8 |p_j|)). Throws InvalidInput on bad shapes or an init outside the bounds,
/// FitError when the normal equations are singular at the start. Non-convergence returns the best
/// point with converged = false.
FitResult least_squares(const ModelFn& model, std::span<const double> x, std::span<const double> y,
                        std::vector<double> init, const std::optional<Bounds>& bounds = std::nullopt,
                        std::vector<std::string> names = {}, const Options& opts = {});

struct LorentzianInit {
    double amplitude;
    double omega_c;
    double kappa;
};

/// A kappa^2 / (kappa^2 + (w - omega_c)^2)
double lorentzian(double w, double amplitude, double omega_c, double kappa) noexcept;

/// Heuristic start: argmax for omega_c, peak height for A, half width at half maximum for kappa.
LorentzianInit lorentzian_guess(const dyn::Spectrum& s);

/// Fits (A, omega_c, kappa); kappa is returned positive. Throws FitError on flat data.
FitResult fit_lorentzian(const dyn::Spectrum& s, std::optional<LorentzianInit> init = std::nullopt);

struct RabiInit {
    double kappa;
    double g;
    double delta_ca;
    double scale = 1.0;
};

struct RabiFit {
    FitResult fit;
    nh::SystemParams params;
    /// Eigenvalues of the fitted parameters with omega_a = 0, omega_c = delta_ca.
    nh::EigenPair eigen;
};

/// Vacuum-Rabi transmission model scale * T(delta'; kappa, g, delta_ca) with gamma fixed.
double rabi_model(double delta_pc, double gamma, double kappa, double g, double delta_ca, double scale);

/// Start from the two largest local maxima (midpoint and half separation) or, for one merged
/// feature, from its half width.
RabiInit rabi_guess(const dyn::Spectrum& s, double gamma);

/// Fits (kappa, g, delta_ca, scale). A negative fitted g is reflected. Throws FitError when the
/// fit does not converge.
RabiFit fit_rabi(const dyn::Spectrum& s, double gamma_fixed, std::optional<RabiInit> init = std::nullopt);

}  // namespace epcav::fit
