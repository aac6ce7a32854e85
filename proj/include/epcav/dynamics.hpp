#pragma once

// Driven-dissipative atom-cavity dynamics in the frame rotating at the probe frequency.
//
// Decay convention: kappa and gamma are amplitude rates. Collapse operators are
// sqrt(2 kappa) a and sqrt(2 gamma) sigma_-, so the no-jump Hamiltonian carries
// -i kappa a^dag a - i gamma sigma_+ sigma_-, matching the 2x2 effective Hamiltonian.
//
// Probe detuning delta_pc (also written delta') is omega_p - omega_c throughout.

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "epcav/nonhermitian.hpp"
#include "epcav/qops.hpp"

namespace epcav::dyn {

using nh::SystemParams;
using qops::ComplexMatrix;
using qops::OperatorSet;

struct DriveParams {
    double epsilon = 1.0;
    double omega_p = 0.0;

    /// Drive at probe detuning delta_pc from the cavity of p.
    static DriveParams at_detuning(const SystemParams& p, double epsilon, double delta_pc);
};

/// omega_p - omega_c
double probe_detuning(const SystemParams& p, const DriveParams& d) noexcept;

struct SimConfig {
    std::size_t n_fock = 3;
    std::size_t n_trajectories = 500;
    /// Integrator step; 0 selects 1e-3 / max(kappa, g).
    double dt = 0.0;
    /// Evolution horizon; 0 selects 20 / min(gamma, kappa).
    double t_final = 0.0;
    std::uint64_t seed = 20250601;
    double ss_tol = 1e-10;

    /// Copy with automatic dt / t_final filled in for p; throws InvalidInput when invalid.
    SimConfig resolved(const SystemParams& p) const;
};

/// (omega_a - omega_p) s+ s- + (omega_c - omega_p) a^dag a + g (a^dag s- + s+ a) + eps (a + a^dag)
ComplexMatrix interaction_hamiltonian(const SystemParams& p, const DriveParams& d, const OperatorSet& ops);

/// Lindblad superoperator acting on column-stacked density matrices, vec(A X B) = (B^T (x) A) vec(X).
ComplexMatrix liouvillian(const SystemParams& p, const DriveParams& d, const OperatorSet& ops);

struct SteadyState {
    ComplexMatrix rho;
    /// max |L vec(rho)| / max |L_ij|
    double residual = 0.0;
    double hermiticity_error = 0.0;
    double min_eigenvalue = 0.0;
};

/// Null vector of L normalised to unit trace, found by replacing the first row of L with the
/// trace functional. Throws NumericError if the solve fails or the residual exceeds tol.
SteadyState steady_state(const ComplexMatrix& liouvillian, double tol = 1e-10);

/// Re tr(op rho)
double expectation(const ComplexMatrix& op, const ComplexMatrix& rho);

struct TrajectoryResult {
    double mean_photon = 0.0;
    double mean_excitation = 0.0;
    double se_photon = 0.0;
    double se_excitation = 0.0;
    std::uint64_t jumps = 0;
    /// Time averages of each trajectory, in trajectory-index order.
    std::vector<double> photon_per_trajectory;
    std::vector<double> excitation_per_trajectory;
};

struct MeanAndError {
    double mean;
    double standard_error;
};

MeanAndError summarize(std::span<const double> samples);

/// Monte Carlo wavefunction ensemble started in |g,0>. Observables are time-averaged over the
/// second half of each trajectory, then ensemble-averaged in trajectory-index order.
/// `workers` = 0 uses the hardware concurrency; results do not depend on it.
TrajectoryResult mc_trajectories(const SystemParams& p, const DriveParams& d, const SimConfig& cfg,
                                 unsigned workers = 0);

enum class Backend { analytic, lindblad, trajectory };

std::string_view to_string(Backend b) noexcept;
/// Throws InvalidInput on an unknown name.
Backend parse_backend(std::string_view name);

struct SpectrumPoint {
    double delta_pc;
    double transmission;
    std::optional<double> error;
};

struct Spectrum {
    std::vector<SpectrumPoint> points;
    Backend backend = Backend::analytic;

    /// Throws InvalidInput unless delta_pc is strictly increasing and transmission >= 0.
    void validate() const;
    std::vector<double> detunings() const;
    std::vector<double> transmissions() const;
};

/// T(delta_pc) for each detuning. lindblad / trajectory: T = <a^dag a> (kappa / eps)^2.
Spectrum transmission_spectrum(const SystemParams& p, const DriveParams& drive_template,
                               std::span<const double> detunings, Backend backend, const SimConfig& cfg);

/// Single-excitation steady-state cavity amplitude eps (delta' - A) / ((lambda- - delta')(lambda+ - delta'))
/// with A = -delta_ca - i gamma and lambda+- the eigenvalues measured from omega_c.
cplx analytic_beta_ss(const SystemParams& p, const DriveParams& d);

/// Same amplitude through Theta (Lambda - nu)^-1 Theta^-1 with nu = omega_p - omega_a.
cplx analytic_beta_ss_decomposed(const SystemParams& p, const DriveParams& d);

/// |kappa (delta' - A) / ((lambda- - delta')(lambda+ - delta'))|^2; independent of eps.
double analytic_transmission(const SystemParams& p, const DriveParams& d);

}  // namespace epcav::dyn
