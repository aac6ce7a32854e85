#pragma once

// Eigenstructure of the 2x2 effective atom-cavity Hamiltonian
//
//     H = [[omega_a - i gamma, g], [g, omega_c - i kappa]]
//
// in the single-excitation basis (|e,0>, |g,1>).
//
// Units: every frequency and rate is stored as nu where the angular quantity is
// 2*pi*nu*1e6 rad/s, so a cavity with kappa/(2 pi) = 246 MHz is stored as 246.

#include <cstddef>
#include <span>
#include <vector>

#include "epcav/qops.hpp"

namespace epcav::nh {

class SystemParams {
public:
    struct Values {
        double omega_a = 0.0;
        double omega_c = 0.0;
        double gamma = 0.0;
        double kappa = 0.0;
        double g = 0.0;
    };

    /// Throws InvalidInput unless gamma > 0, kappa > 0, g >= 0 and all values finite.
    explicit SystemParams(const Values& v);

    double omega_a() const noexcept { return v_.omega_a; }
    double omega_c() const noexcept { return v_.omega_c; }
    double gamma() const noexcept { return v_.gamma; }
    double kappa() const noexcept { return v_.kappa; }
    double g() const noexcept { return v_.g; }
    const Values& values() const noexcept { return v_; }

    double delta_ca() const noexcept { return v_.omega_c - v_.omega_a; }
    double omega_plus() const noexcept { return 0.5 * (v_.omega_a + v_.omega_c); }
    double omega_minus() const noexcept { return 0.5 * (v_.omega_a - v_.omega_c); }
    double gamma_plus() const noexcept;
    /// |kappa - gamma| / 2
    double gamma_minus() const noexcept;
    /// (kappa - gamma) / 2 with sign; this is what enters the eigenvalues.
    double gamma_minus_signed() const noexcept { return 0.5 * (v_.kappa - v_.gamma); }
    /// kappa < gamma: the EP is then produced by the conjugate factor and winding signs flip.
    bool kappa_below_gamma() const noexcept { return v_.kappa < v_.gamma; }

    SystemParams with_g(double g) const;
    SystemParams with_kappa(double kappa) const;
    /// Keeps omega_a and moves the cavity to omega_a + delta_ca.
    SystemParams with_delta_ca(double delta_ca) const;

    qops::ComplexMatrix hamiltonian() const;
    /// Atom-referenced frame [[A, g], [g, B]] with A = -i gamma, B = delta_ca - i kappa.
    qops::ComplexMatrix shifted_hamiltonian() const;

private:
    Values v_;
};

struct EigenPair {
    cplx e_plus;
    cplx e_minus;
    /// Mixing angle: tan(theta) = (E+ - omega_a + i gamma) / g. Diverges at the EP.
    cplx theta_mix;
    cplx tan_theta;
    /// (delta_ca/2 - i (kappa-gamma)/2)^2 + g^2; E+- = omega_+ - i gamma_+ +- sqrt(discriminant).
    cplx discriminant;
    bool defective = false;

    double gap() const noexcept { return std::abs(e_plus - e_minus); }
};

/// E+- = (omega_+ - i gamma_+) +- sqrt(discriminant), principal root for E+.
/// `defective` when |discriminant| < 1e-9 gamma_+^2; the two roots are then reported equal.
EigenPair eigenvalues(const SystemParams& p);

/// The discriminant in factored form (h + i g)(h - i g), h = delta_ca/2 - i (kappa-gamma)/2.
cplx discriminant(const SystemParams& p) noexcept;

/// g at which the eigenvalues coalesce, |kappa - gamma| / 2 (requires delta_ca = 0 too).
double ep_condition(double gamma, double kappa);

struct ExceptionalLinePoint {
    double kappa;
    double g_ep;
};

std::vector<ExceptionalLinePoint> exceptional_line(double gamma, std::span<const double> kappa_values);

struct SurfaceSample {
    double delta_ca;
    double g;
    cplx sheet_plus;
    cplx sheet_minus;
    cplx discriminant;
};

struct GridEdge {
    std::size_t from;
    std::size_t to;
};

struct RiemannSurface {
    std::size_t n_delta = 0;
    std::size_t n_g = 0;
    /// Row-major: samples[ig * n_delta + id].
    std::vector<SurfaceSample> samples;
    /// Grid edges across which the sheet labelling is discontinuous.
    std::vector<GridEdge> branch_cut;
    double continuity_bound = 0.0;

    const SurfaceSample& at(std::size_t ig, std::size_t id) const { return samples[ig * n_delta + id]; }
};

/// Both sheets over the (delta_ca, g) grid. Rows are swept along delta_ca with nearest-neighbour
/// continuation; the first column is continued along g. Throws NumericError when a continuation
/// step cannot tell the two sheets apart (grid too coarse near the EP).
RiemannSurface riemann_surface(const SystemParams& base, std::span<const double> delta_grid,
                               std::span<const double> g_grid);

struct Decomposition {
    qops::ComplexMatrix theta;
    qops::ComplexMatrix lambda;
    qops::ComplexMatrix theta_inv;
    cplx a;  // -i gamma
    cplx b;  // delta_ca - i kappa
};

/// H' = Theta Lambda Theta^-1 with Theta columns (g, lambda+- - A). Rejects EP-proximal
/// (near-parallel columns) and uncoupled (g = 0) parameters with NumericError.
Decomposition eigen_decomposition(const SystemParams& p);

enum class Perturbation { coupling, dissipation };

struct ScalingFit {
    double slope;
    double intercept;
    std::vector<double> eps;
    std::vector<double> gaps;
};

/// Log-log regression of the exact gap |E+ - E-| against the perturbation size. The base point
/// must sit on the exceptional line; eps_values needs >= 4 positive entries spanning two decades.
ScalingFit scaling_exponent(const SystemParams& on_line, Perturbation perturb,
                            std::span<const double> eps_values);

}  // namespace epcav::nh
