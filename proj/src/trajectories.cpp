#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <random>
#include <sstream>
#include <thread>

#include "epcav/dynamics.hpp"
#include "epcav/error.hpp"

namespace epcav::dyn {

namespace {

constexpr cplx I{0.0, 1.0};
// Depth of the step-halving ladder used to locate a jump inside one integrator step.
constexpr int kBracketDepth = 12;

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

std::uint64_t trajectory_seed(std::uint64_t seed, std::size_t k) {
    return splitmix64(splitmix64(seed) ^ splitmix64(0xD1B54A32D192ED03ULL * (k + 1)));
}

// Dense row-major propagator; small enough that a hand loop beats any abstraction.
struct Propagator {
    std::size_t n = 0;
    std::vector<cplx> m;

    void apply(const cplx* in, cplx* out) const {
        for (std::size_t r = 0; r < n; ++r) {
            const cplx* row = m.data() + r * n;
            cplx acc = 0.0;
            for (std::size_t c = 0; c < n; ++c) acc += row[c] * in[c];
            out[r] = acc;
        }
    }
};

// Fourth-order Taylor polynomial of exp(-i H_eff h); identical to one classical RK4 step
// for the linear no-jump equation.
Propagator rk4_propagator(const ComplexMatrix& h_eff, double h) {
    const ComplexMatrix gen = (-I * h) * h_eff;
    ComplexMatrix term = ComplexMatrix::identity(h_eff.rows());
    ComplexMatrix sum = term;
    for (int k = 1; k <= 4; ++k) {
        term = (1.0 / k) * (term * gen);
        sum += term;
    }
    const auto e = sum.entries();
    return {sum.rows(), std::vector<cplx>(e.begin(), e.end())};
}

struct Model {
    std::size_t dim;
    std::vector<Propagator> ladder;  // ladder[k] advances by dt / 2^k
    std::vector<double> photon;      // diagonal of a^dag a
    std::vector<double> excited;     // diagonal of s+ s-
    ComplexMatrix jump_a;
    ComplexMatrix jump_s;
    std::size_t n_steps;
    std::size_t avg_from;
    double dt;
};

struct Single {
    double photon = 0.0;
    double excitation = 0.0;
    std::uint64_t jumps = 0;
};

class Trajectory {
public:
    Trajectory(const Model& m, std::uint64_t seed)
        : m_(m), rng_(seed), psi_(m.dim, 0.0), scratch_(m.dim, 0.0) {
        psi_[0] = 1.0;  // |g,0>
        threshold_ = draw();
    }

    Single run() {
        Single out;
        std::size_t samples = 0;
        for (std::size_t step = 0; step < m_.n_steps; ++step) {
            evolve_block(0, step);
            if (step + 1 >= m_.avg_from) {
                const double nn = qops::norm2(psi_);
                double ph = 0.0, ex = 0.0;
                for (std::size_t i = 0; i < m_.dim; ++i) {
                    const double w = std::norm(psi_[i]);
                    ph += w * m_.photon[i];
                    ex += w * m_.excited[i];
                }
                out.photon += ph / nn;
                out.excitation += ex / nn;
                ++samples;
            }
        }
        out.photon /= static_cast<double>(samples);
        out.excitation /= static_cast<double>(samples);
        out.jumps = jumps_;
        return out;
    }

private:
    double draw() { return 1.0 - uniform_(rng_); }  // (0, 1]

    void evolve_block(int level, std::size_t step) {
        const double before = qops::norm2(psi_);
        m_.ladder[static_cast<std::size_t>(level)].apply(psi_.data(), scratch_.data());
        const double after = qops::norm2(scratch_);
        if (level == 0) check_step(before, after, step);
        if (after >= threshold_) {
            psi_.swap(scratch_);
            return;
        }
        if (level == kBracketDepth) {
            psi_.swap(scratch_);
            jump(step);
            return;
        }
        evolve_block(level + 1, step);
        evolve_block(level + 1, step);
    }

    void check_step(double before, double after, std::size_t step) const {
        if (!(after <= before * (1.0 + 1e-9)) || !(after >= 1e-3 * before)) {
            std::ostringstream msg;
            msg << "mc_trajectories: norm " << (after < before ? "underflow" : "growth") << " at step "
                << step << " (|psi|^2 " << before << " -> " << after << ", dt = " << m_.dt
                << "); reduce dt";
            throw NumericError(msg.str());
        }
    }

    void jump(std::size_t step) {
        const CVector ja = m_.jump_a.apply(psi_);
        const CVector js = m_.jump_s.apply(psi_);
        const double ra = qops::norm2(ja);
        const double rs = qops::norm2(js);
        if (!(ra + rs > 0.0)) {
            std::ostringstream msg;
            msg << "mc_trajectories: jump detected at step " << step << " but all channel rates vanish";
            throw NumericError(msg.str());
        }
        const CVector& chosen = uniform_(rng_) * (ra + rs) < ra ? ja : js;
        const double scale = 1.0 / std::sqrt(qops::norm2(chosen));
        for (std::size_t i = 0; i < m_.dim; ++i) psi_[i] = chosen[i] * scale;
        threshold_ = draw();
        ++jumps_;
    }

    const Model& m_;
    std::mt19937_64 rng_;
    std::uniform_real_distribution<double> uniform_{0.0, 1.0};
    CVector psi_;
    CVector scratch_;
    double threshold_ = 1.0;
    std::uint64_t jumps_ = 0;
};

}  // namespace

MeanAndError summarize(std::span<const double> samples) {
    if (samples.empty()) throw InvalidInput("summarize: no samples");
    const double n = static_cast<double>(samples.size());
    double mean = 0.0;
    for (double s : samples) mean += s;
    mean /= n;
    if (samples.size() == 1) return {mean, 0.0};
    double ss = 0.0;
    for (double s : samples) ss += (s - mean) * (s - mean);
    return {mean, std::sqrt(ss / (n - 1.0) / n)};
}

TrajectoryResult mc_trajectories(const SystemParams& p, const DriveParams& d, const SimConfig& cfg,
                                 unsigned workers) {
    const SimConfig c = cfg.resolved(p);
    const OperatorSet ops = qops::build_operators(c.n_fock);

    const ComplexMatrix h_eff = interaction_hamiltonian(p, d, ops) - (I * p.kappa()) * ops.photon_number() -
                                (I * p.gamma()) * ops.excitation();
    Model m;
    m.dim = ops.dim();
    m.dt = c.dt;
    for (int k = 0; k <= kBracketDepth; ++k) m.ladder.push_back(rk4_propagator(h_eff, c.dt / std::ldexp(1.0, k)));
    const ComplexMatrix n_op = ops.photon_number();
    const ComplexMatrix e_op = ops.excitation();
    for (std::size_t i = 0; i < m.dim; ++i) {
        m.photon.push_back(n_op(i, i).real());
        m.excited.push_back(e_op(i, i).real());
    }
    m.jump_a = std::sqrt(2.0 * p.kappa()) * ops.a;
    m.jump_s = std::sqrt(2.0 * p.gamma()) * ops.sigma_minus;
    m.n_steps = std::max<std::size_t>(2, static_cast<std::size_t>(std::llround(c.t_final / c.dt)));
    m.avg_from = m.n_steps / 2 + 1;

    const std::size_t n = c.n_trajectories;
    std::vector<Single> results(n);
    if (workers == 0) workers = std::max(1u, std::thread::hardware_concurrency());
    workers = static_cast<unsigned>(std::min<std::size_t>(workers, n));

    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto work = [&] {
        for (std::size_t k = next++; k < n; k = next++) {
            try {
                results[k] = Trajectory(m, trajectory_seed(c.seed, k)).run();
            } catch (...) {
                std::lock_guard lock(failure_mutex);
                if (!failure) failure = std::current_exception();
                next = n;
            }
        }
    };
    if (workers <= 1) {
        work();
    } else {
        std::vector<std::thread> pool;
        for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work);
        for (auto& t : pool) t.join();
    }
    if (failure) std::rethrow_exception(failure);

    TrajectoryResult out;
    out.photon_per_trajectory.reserve(n);
    out.excitation_per_trajectory.reserve(n);
    for (const auto& r : results) {
        out.photon_per_trajectory.push_back(r.photon);
        out.excitation_per_trajectory.push_back(r.excitation);
        out.jumps += r.jumps;
    }
    const MeanAndError ph = summarize(out.photon_per_trajectory);
    const MeanAndError ex = summarize(out.excitation_per_trajectory);
    out.mean_photon = ph.mean;
    out.se_photon = ph.standard_error;
    out.mean_excitation = ex.mean;
    out.se_excitation = ex.standard_error;
    return out;
}

}  // namespace epcav::dyn
