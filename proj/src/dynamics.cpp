#include "epcav/dynamics.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <sstream>

#include "epcav/error.hpp"

namespace epcav::dyn {

namespace {

constexpr cplx I{0.0, 1.0};

double min_hermitian_eigenvalue(const ComplexMatrix& m) {
    const auto n = static_cast<Eigen::Index>(m.rows());
    Eigen::MatrixXcd h(n, n);
    for (Eigen::Index r = 0; r < n; ++r)
        for (Eigen::Index c = 0; c < n; ++c)
            h(r, c) = 0.5 * (m(r, c) + std::conj(m(c, r)));
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(h, Eigen::EigenvaluesOnly);
    return solver.eigenvalues().minCoeff();
}

}  // namespace

DriveParams DriveParams::at_detuning(const SystemParams& p, double epsilon, double delta_pc) {
    return DriveParams{epsilon, p.omega_c() + delta_pc};
}

double probe_detuning(const SystemParams& p, const DriveParams& d) noexcept { return d.omega_p - p.omega_c(); }

SimConfig SimConfig::resolved(const SystemParams& p) const {
    SimConfig c = *this;
    if (c.dt == 0.0) c.dt = 1e-3 / std::max(p.kappa(), p.g());
    if (c.t_final == 0.0) c.t_final = 20.0 / std::min(p.gamma(), p.kappa());
    if (c.n_fock < 1) throw InvalidInput("SimConfig: n_fock must be >= 1");
    if (c.n_trajectories < 1) throw InvalidInput("SimConfig: n_trajectories must be >= 1");
    if (!(c.dt > 0.0) || !std::isfinite(c.dt)) throw InvalidInput("SimConfig: dt must be > 0");
    if (!(c.t_final >= c.dt)) throw InvalidInput("SimConfig: t_final must be >= dt");
    if (!(c.ss_tol > 0.0)) throw InvalidInput("SimConfig: ss_tol must be > 0");
    return c;
}

ComplexMatrix interaction_hamiltonian(const SystemParams& p, const DriveParams& d, const OperatorSet& ops) {
    if (!(d.epsilon >= 0.0)) throw InvalidInput("DriveParams: epsilon must be >= 0");
    ComplexMatrix h = (p.omega_a() - d.omega_p) * ops.excitation();
    h += (p.omega_c() - d.omega_p) * ops.photon_number();
    h += p.g() * (ops.a_dag * ops.sigma_minus + ops.sigma_plus * ops.a);
    h += d.epsilon * (ops.a + ops.a_dag);
    return h;
}

ComplexMatrix liouvillian(const SystemParams& p, const DriveParams& d, const OperatorSet& ops) {
    const ComplexMatrix h = interaction_hamiltonian(p, d, ops);
    const ComplexMatrix& id = ops.identity;
    ComplexMatrix l = -I * (qops::kron(id, h) - qops::kron(h.transpose(), id));

    const ComplexMatrix collapse[] = {std::sqrt(2.0 * p.kappa()) * ops.a,
                                      std::sqrt(2.0 * p.gamma()) * ops.sigma_minus};
    for (const auto& c : collapse) {
        const ComplexMatrix cdc = c.adjoint() * c;
        l += qops::kron(c.conjugate(), c);
        l -= 0.5 * qops::kron(id, cdc);
        l -= 0.5 * qops::kron(cdc.transpose(), id);
    }
    return l;
}

SteadyState steady_state(const ComplexMatrix& liouvillian, double tol) {
    if (!liouvillian.square()) throw InvalidInput("steady_state: superoperator must be square");
    const auto dim = static_cast<std::size_t>(std::llround(std::sqrt(static_cast<double>(liouvillian.rows()))));
    if (dim * dim != liouvillian.rows()) throw InvalidInput("steady_state: dimension is not a perfect square");

    ComplexMatrix system = liouvillian;
    for (std::size_t c = 0; c < system.cols(); ++c) system(0, c) = 0.0;
    for (std::size_t i = 0; i < dim; ++i) system(0, i * dim + i) = 1.0;
    CVector rhs(system.rows(), cplx{0.0, 0.0});
    rhs[0] = 1.0;

    CVector vec;
    try {
        vec = qops::solve_linear(system, rhs);
    } catch (const NumericError& e) {
        throw NumericError(std::string("steady_state: null space is not one-dimensional (") + e.what() + ")");
    }

    SteadyState ss;
    ss.rho = ComplexMatrix(dim, dim);
    for (std::size_t c = 0; c < dim; ++c)
        for (std::size_t r = 0; r < dim; ++r) ss.rho(r, c) = vec[c * dim + r];

    const CVector lr = liouvillian.apply(vec);
    double worst = 0.0;
    for (const auto& v : lr) worst = std::max(worst, std::abs(v));
    ss.residual = worst / liouvillian.max_abs();
    ss.hermiticity_error = qops::max_abs_diff(ss.rho, ss.rho.adjoint());
    ss.min_eigenvalue = min_hermitian_eigenvalue(ss.rho);
    if (!(ss.residual <= tol)) {
        std::ostringstream msg;
        msg << "steady_state: residual " << ss.residual << " exceeds tolerance " << tol;
        throw NumericError(msg.str());
    }
    return ss;
}

double expectation(const ComplexMatrix& op, const ComplexMatrix& rho) { return (op * rho).trace().real(); }

std::string_view to_string(Backend b) noexcept {
    switch (b) {
        case Backend::analytic: return "analytic";
        case Backend::lindblad: return "lindblad";
        case Backend::trajectory: return "trajectory";
    }
    return "analytic";
}

Backend parse_backend(std::string_view name) {
    if (name == "analytic") return Backend::analytic;
    if (name == "lindblad") return Backend::lindblad;
    if (name == "trajectory") return Backend::trajectory;
    throw InvalidInput("unknown backend '" + std::string(name) + "' (expected analytic|lindblad|trajectory)");
}

void Spectrum::validate() const {
    for (std::size_t i = 0; i < points.size(); ++i) {
        if (!std::isfinite(points[i].delta_pc) || !std::isfinite(points[i].transmission))
            throw InvalidInput("Spectrum: non-finite sample at index " + std::to_string(i));
        if (points[i].transmission < 0.0)
            throw InvalidInput("Spectrum: negative transmission at index " + std::to_string(i));
        if (i > 0 && !(points[i].delta_pc > points[i - 1].delta_pc))
            throw InvalidInput("Spectrum: detunings must be strictly increasing (index " + std::to_string(i) + ")");
    }
}

std::vector<double> Spectrum::detunings() const {
    std::vector<double> x;
    x.reserve(points.size());
    for (const auto& pt : points) x.push_back(pt.delta_pc);
    return x;
}

std::vector<double> Spectrum::transmissions() const {
    std::vector<double> y;
    y.reserve(points.size());
    for (const auto& pt : points) y.push_back(pt.transmission);
    return y;
}

Spectrum transmission_spectrum(const SystemParams& p, const DriveParams& drive_template,
                               std::span<const double> detunings, Backend backend, const SimConfig& cfg) {
    for (std::size_t i = 1; i < detunings.size(); ++i)
        if (!(detunings[i] > detunings[i - 1]))
            throw InvalidInput("transmission_spectrum: detunings must be strictly increasing");
    if (backend != Backend::analytic && !(drive_template.epsilon > 0.0))
        throw InvalidInput("transmission_spectrum: simulated backends need epsilon > 0");

    Spectrum s;
    s.backend = backend;
    s.points.reserve(detunings.size());
    const double norm = std::pow(p.kappa() / drive_template.epsilon, 2);

    std::optional<OperatorSet> ops;
    SimConfig resolved = cfg;
    if (backend != Backend::analytic) {
        resolved = cfg.resolved(p);
        ops = qops::build_operators(resolved.n_fock);
    }

    for (double delta : detunings) {
        const DriveParams d = DriveParams::at_detuning(p, drive_template.epsilon, delta);
        SpectrumPoint pt{delta, 0.0, std::nullopt};
        switch (backend) {
            case Backend::analytic:
                pt.transmission = analytic_transmission(p, d);
                break;
            case Backend::lindblad: {
                const SteadyState ss = steady_state(liouvillian(p, d, *ops), resolved.ss_tol);
                pt.transmission = std::max(0.0, expectation(ops->photon_number(), ss.rho)) * norm;
                break;
            }
            case Backend::trajectory: {
                const TrajectoryResult tr = mc_trajectories(p, d, resolved);
                pt.transmission = std::max(0.0, tr.mean_photon) * norm;
                pt.error = tr.se_photon * norm;
                break;
            }
        }
        s.points.push_back(pt);
    }
    return s;
}

namespace {

struct CavityFrame {
    cplx a;
    cplx lambda_plus;
    cplx lambda_minus;
};

CavityFrame cavity_frame(const SystemParams& p) {
    const nh::EigenPair ev = nh::eigenvalues(p);
    return {-p.delta_ca() - I * p.gamma(), ev.e_plus - p.omega_c(), ev.e_minus - p.omega_c()};
}

cplx single_excitation_response(const SystemParams& p, const DriveParams& d) {
    const CavityFrame f = cavity_frame(p);
    const double delta = probe_detuning(p, d);
    const cplx denom = (f.lambda_minus - delta) * (f.lambda_plus - delta);
    if (denom == cplx{0.0, 0.0})
        throw NumericError("analytic transmission: probe detuning coincides with an eigenvalue");
    return (delta - f.a) / denom;
}

}  // namespace

cplx analytic_beta_ss(const SystemParams& p, const DriveParams& d) {
    return d.epsilon * single_excitation_response(p, d);
}

cplx analytic_beta_ss_decomposed(const SystemParams& p, const DriveParams& d) {
    const nh::Decomposition dec = nh::eigen_decomposition(p);
    const double nu = d.omega_p - p.omega_a();
    const cplx inv_plus = 1.0 / (dec.lambda(0, 0) - nu);
    const cplx inv_minus = 1.0 / (dec.lambda(1, 1) - nu);
    const ComplexMatrix resolvent =
        dec.theta * ComplexMatrix{{inv_plus, 0.0}, {0.0, inv_minus}} * dec.theta_inv;
    // (alpha, beta) = (H' - nu)^-1 (0, -eps)
    return -d.epsilon * resolvent(1, 1);
}

double analytic_transmission(const SystemParams& p, const DriveParams& d) {
    return std::norm(p.kappa() * single_excitation_response(p, d));
}

}  // namespace epcav::dyn
