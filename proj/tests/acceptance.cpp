// Acceptance suite: one PASS/FAIL line per criterion. Exit status 1 if any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "epcav/cli/config.hpp"
#include "epcav/dynamics.hpp"
#include "epcav/error.hpp"
#include "epcav/modegeom.hpp"
#include "epcav/nonhermitian.hpp"
#include "epcav/specfit.hpp"
#include "epcav/topology.hpp"

using namespace epcav;

namespace {

constexpr double kGamma = 3.03;

struct Outcome {
    bool pass = true;
    std::ostringstream detail;

    void require(bool ok, const std::string& what) {
        if (!ok) {
            pass = false;
            detail << " [miss: " << what << "]";
        }
    }
};

std::string tag(double kappa, double delta_ca) {
    std::ostringstream s;
    s << "(" << kappa << ", " << delta_ca << ")";
    return s.str();
}

nh::SystemParams sys(double kappa, double g, double delta_ca = 0.0) {
    return nh::SystemParams({0.0, delta_ca, kGamma, kappa, g});
}

// Loop centred at (121.5, 0) with radius 56.5, the reference for the tip-scenario transition.
topo::LoopSpec reference_loop(std::size_t n = 256) {
    return {121.5, 0.0, 56.5, n, topo::Orientation::counterclockwise};
}

// ---------------------------------------------------------------------------------------------

Outcome ep_positions() {
    Outcome o;
    const double a = nh::ep_condition(kGamma, 133.0), b = nh::ep_condition(kGamma, 246.0);
    o.detail << "g_EP(133) = " << a << ", g_EP(246) = " << b;
    o.require(std::abs(a - 64.985) < 1e-9 && std::abs(b - 121.485) < 1e-9, "exact values 64.985 / 121.485");
    o.require(std::abs(a - 65.0) <= 0.1 && std::abs(b - 121.5) <= 0.1, "within 0.1 of 65.0 / 121.5");
    return o;
}

Outcome coupling_constant() {
    Outcome o;
    const cli::G0Config g;
    const double omega0 = 2.0 * std::numbers::pi * mode::kCodata.c / g.wavelength;
    const double mhz = mode::coupling_constant_g0(omega0, g.regions, g.w0, g.d_ge) / (2.0 * std::numbers::pi) / 1e6;
    o.detail << "g0/2pi = " << mhz << " MHz";
    o.require(std::abs(mhz - 480.0) <= 0.02 * 480.0, "480 MHz within 2%");
    return o;
}

Outcome mode_area() {
    Outcome o;
    const cli::FieldConfig f;
    const auto field = mode::cosine_gaussian_field(f.wavelength, 10.15e-6, 1.70e-6, f.y_half, f.nx, f.ny);
    const double a = mode::effective_mode_area(field);
    const double closed = mode::cosine_gaussian_area(10.15e-6, 1.70e-6);
    o.detail << "A_eff = " << a << " m^2, closed form " << closed;
    o.require(std::abs(a - 2.09e-11) <= 0.05 * 2.09e-11, "within 5% of 2.09e-11");
    o.require(std::abs(a - closed) <= 0.005 * closed, "within 0.5% of (2l/3) sqrt(pi) w0");
    return o;
}

Outcome winding_numbers() {
    Outcome o;
    const auto base = sys(246.0, 0.0);
    for (std::size_t n : {256u, 1024u, 4096u}) {
        const auto out = topo::winding_number({200.0, 0.0, 30.0, n, topo::Orientation::counterclockwise}, base);
        const auto in = topo::winding_number(reference_loop(n), base);
        o.require(out.snapped && out.w_plus == 0.0 && out.w_total == 0.0, "W = 0 outside at n_steps " + std::to_string(n));
        o.require(in.snapped && in.w_plus == 0.5 && in.w_total == 1.0, "W+ = 1/2, W = 1 inside, n_steps " + std::to_string(n));
        if (n == 4096)
            o.detail << "n_steps 4096: outside raw W+ = " << out.raw_plus << ", inside raw W+ = " << in.raw_plus;
    }
    return o;
}

Outcome topological_transition() {
    Outcome o;
    const std::vector<std::pair<double, topo::LoopClass>> cases{{12.7, topo::LoopClass::trivial},
                                                                {133.0, topo::LoopClass::on_ep_ill_defined},
                                                                {246.0, topo::LoopClass::nontrivial}};
    const auto loop = reference_loop();
    for (const auto& [kappa, expected] : cases) {
        const auto c = topo::classify_loop(loop, sys(kappa, 0.0));
        o.detail << "kappa " << kappa << ": " << topo::to_string(c.cls);
        if (c.winding) o.detail << " (W = " << c.winding->w_total + 0.0 << ")";
        o.detail << "; ";
        o.require(c.cls == expected, "class at kappa " + std::to_string(kappa));
        if (expected == topo::LoopClass::trivial) o.require(c.winding && c.winding->w_total == 0.0, "W = 0");
        if (expected == topo::LoopClass::on_ep_ill_defined) o.require(!c.winding, "W ill-defined");
        if (expected == topo::LoopClass::nontrivial) o.require(c.winding && c.winding->w_total == 1.0, "W = 1");
    }

    const auto base = sys(246.0, 0.0);
    const auto b = topo::track_eigenvalues_on_loop(base, loop);
    o.require(b.permutation == topo::Permutation::swap, "strand swap");
    const double step = 2.0 * std::numbers::pi / static_cast<double>(loop.n_steps);
    bool exchange = false;
    for (std::size_t k : b.branch_cut_crossings) {
        if (std::abs(b.theta[k] - std::numbers::pi) > 2.0 * step) continue;
        const auto before = nh::eigenvalues(base.with_g(loop.g_at(k - 1)).with_delta_ca(loop.delta_at(k - 1)));
        const auto after = nh::eigenvalues(base.with_g(loop.g_at(k)).with_delta_ca(loop.delta_at(k)));
        const double d0 = before.e_plus.imag() - before.e_minus.imag();
        const double d1 = after.e_plus.imag() - after.e_minus.imag();
        exchange = exchange || d0 * d1 < 0.0;
        o.detail << "cut crossed at theta = " << b.theta[k];
    }
    o.require(exchange, "imaginary-part exchange within two steps of theta = pi");
    return o;
}

Outcome scaling_law() {
    Outcome o;
    std::vector<double> eps;
    for (int i = 0; i <= 10; ++i) eps.push_back(kGamma * std::pow(10.0, -4.0 + 0.2 * i));
    double worst = 0.0;
    for (double ratio : {5.0, 25.0, 80.0}) {
        const double kappa = ratio * kGamma;
        const auto p = sys(kappa, nh::ep_condition(kGamma, kappa));
        for (auto kind : {nh::Perturbation::coupling, nh::Perturbation::dissipation}) {
            const double s = nh::scaling_exponent(p, kind, eps).slope;
            worst = std::max(worst, std::abs(s - 0.5));
        }
    }
    o.detail << "max |slope - 0.5| = " << worst;
    o.require(worst <= 0.005, "slope 0.500 +- 0.005");
    return o;
}

// Nine configurations: (kappa, g) rows with their detuning sets.
struct SpectrumCase {
    double kappa, g, delta_ca;
    dyn::Spectrum lindblad, analytic;
    std::vector<double> photons;
};

std::vector<SpectrumCase> spectrum_cases() {
    std::vector<SpectrumCase> out;
    const dyn::SimConfig sim;
    const std::vector<std::array<double, 3>> rows{{13.0, 5.0, 7.0}, {133.0, 65.0, 50.0}, {246.0, 121.5, 100.0}};
    for (const auto& [kappa, g, d] : rows)
        for (double s : {-1.0, 0.0, 1.0}) {
            SpectrumCase c{kappa, g, s * d, {}, {}, {}};
            const auto p = sys(kappa, g, c.delta_ca);
            const double span = 2.0 * (kappa + g + std::abs(c.delta_ca));
            const auto x = mode::linspace(-span, span, 161);
            const dyn::DriveParams drive{1.0, 0.0};
            c.lindblad = dyn::transmission_spectrum(p, drive, x, dyn::Backend::lindblad, sim);
            c.analytic = dyn::transmission_spectrum(p, drive, x, dyn::Backend::analytic, sim);
            for (const auto& pt : c.lindblad.points) c.photons.push_back(pt.transmission / (kappa * kappa));
            out.push_back(std::move(c));
        }
    return out;
}

Outcome spectrum_agreement(const std::vector<SpectrumCase>& cases) {
    Outcome o;
    double worst = 0.0;
    for (const auto& c : cases)
        for (std::size_t i = 0; i < c.lindblad.points.size(); ++i)
            worst = std::max(worst, std::abs(c.lindblad.points[i].transmission - c.analytic.points[i].transmission));
    o.detail << "max |T_lindblad - T_analytic| = " << worst << " over 9 x 161 detunings";
    o.require(worst <= 0.02, "0.02 absolute");
    return o;
}

Outcome photon_window(const std::vector<SpectrumCase>& cases) {
    Outcome o;
    for (const auto& c : cases) {
        const double peak = *std::max_element(c.photons.begin(), c.photons.end());
        o.detail << tag(c.kappa, c.delta_ca) << " peak <n> " << peak << "; ";
        o.require(peak >= 0.00097 && peak <= 0.0087, tag(c.kappa, c.delta_ca) + " in [0.00097, 0.0087]");
    }
    return o;
}

Outcome eigenvalue_round_trip(const std::vector<SpectrumCase>& cases) {
    Outcome o;
    double worst_re = 0.0, worst_im = 0.0;
    for (const auto& c : cases) {
        const auto exact = nh::eigenvalues(sys(c.kappa, c.g, c.delta_ca));
        fit::RabiFit r = fit::fit_rabi(c.lindblad, kGamma);
        double re = 0.0, im = 0.0;
        for (auto [f, e] : {std::pair{r.eigen.e_plus, exact.e_plus}, std::pair{r.eigen.e_minus, exact.e_minus}}) {
            re = std::max(re, std::abs(f.real() - e.real()) / std::abs(e.real()));
            im = std::max(im, std::abs(f.imag() - e.imag()) / std::abs(e.imag()));
        }
        worst_re = std::max(worst_re, re);
        worst_im = std::max(worst_im, im);
        o.detail << tag(c.kappa, c.delta_ca) << " re " << re << " im " << im << "; ";
        o.require(re <= 0.01, "Re(E) of " + tag(c.kappa, c.delta_ca) + " within 1%");
        o.require(im <= 0.01, "Im(E) of " + tag(c.kappa, c.delta_ca) + " within 1%");
    }
    o.detail << "worst re " << worst_re << ", worst im " << worst_im;
    return o;
}

Outcome trajectory_consistency() {
    Outcome o;
    dyn::SimConfig sim;

    // (13, 5) at the cavity resonance: 1000 trajectories, the first 500 form the 500-trajectory run.
    const auto p1 = sys(13.0, 5.0);
    const auto d1 = dyn::DriveParams::at_detuning(p1, 1.0, 0.0);
    const auto ops1 = qops::build_operators(sim.n_fock);
    const double n1 = dyn::expectation(ops1.photon_number(), dyn::steady_state(dyn::liouvillian(p1, d1, ops1)).rho);
    sim.n_trajectories = 1000;
    const auto r1 = dyn::mc_trajectories(p1, d1, sim);
    const std::span<const double> all(r1.photon_per_trajectory);
    const auto half = dyn::summarize(all.first(500));
    const auto full = dyn::summarize(all);
    const double z1 = (half.mean - n1) / half.standard_error;
    const double ratio = half.standard_error / full.standard_error;
    o.detail << "(13,5): ss " << n1 << ", mc " << half.mean << " +- " << half.standard_error << " (z = " << z1
             << "), SE ratio 500/1000 = " << ratio << "; ";
    o.require(std::abs(z1) <= 3.0, "(13,5) within 3 SE");
    o.require(std::abs(ratio / std::sqrt(2.0) - 1.0) <= 0.2, "SE ratio sqrt(2) +- 20%");

    // (133, 65) at the lower transmission peak; on resonance <n> is too small for jumps to occur.
    const auto p2 = sys(133.0, 65.0);
    double best = 0.0, peak = 0.0;
    for (double x : mode::linspace(-200.0, 0.0, 20001)) {
        const double t = dyn::analytic_transmission(p2, dyn::DriveParams::at_detuning(p2, 1.0, x));
        if (t > best) best = t, peak = x;
    }
    const auto d2 = dyn::DriveParams::at_detuning(p2, 1.0, peak);
    const double n2 = dyn::expectation(ops1.photon_number(), dyn::steady_state(dyn::liouvillian(p2, d2, ops1)).rho);
    sim.n_trajectories = 500;
    const auto r2 = dyn::mc_trajectories(p2, d2, sim);
    const double z2 = (r2.mean_photon - n2) / r2.se_photon;
    o.detail << "(133,65) at delta' = " << peak << ": ss " << n2 << ", mc " << r2.mean_photon << " +- " << r2.se_photon
             << " (z = " << z2 << ", " << r2.jumps << " jumps)";
    o.require(std::abs(z2) <= 3.0, "(133,65) within 3 SE");
    o.require(r2.jumps > 0, "(133,65) ensemble records jumps");
    return o;
}

Outcome fit_recovery() {
    Outcome o;
    const double kappa = 245.00;
    const auto x = mode::linspace(-5.0 * kappa, 5.0 * kappa, 401);
    dyn::Spectrum clean;
    for (double w : x) clean.points.push_back({w, fit::lorentzian(w, 1.0, 0.0, kappa), {}});
    const auto r = fit::fit_lorentzian(clean);
    const double ea = std::abs(r.param("A") - 1.0), ec = std::abs(r.param("omega_c")) / kappa,
                 ek = std::abs(r.param("kappa") - kappa) / kappa;
    o.detail << "noiseless rel. errors A " << ea << " omega_c " << ec << " kappa " << ek;
    o.require(r.converged && ea <= 1e-6 && ec <= 1e-6 && ek <= 1e-6, "noiseless recovery at 1e-6");

    std::vector<double> fitted;
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        std::mt19937_64 rng(seed);
        std::normal_distribution<double> noise(0.0, 0.01);
        dyn::Spectrum s = clean;
        for (auto& pt : s.points) pt.transmission = std::max(0.0, pt.transmission + noise(rng));
        fitted.push_back(fit::fit_lorentzian(s).param("kappa"));
    }
    std::nth_element(fitted.begin(), fitted.begin() + 50, fitted.end());
    const double median = fitted[50];
    o.detail << "; median kappa over 100 noise seeds " << median;
    o.require(std::abs(median - kappa) <= 0.01 * kappa, "noisy median within 1%");
    return o;
}

Outcome property_suites() {
    Outcome o;

    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> freq(-300.0, 300.0), rate(0.1, 300.0), coup(0.0, 300.0);
    double worst = 0.0;
    for (int k = 0; k < 10000; ++k) {
        const nh::SystemParams p({freq(rng), freq(rng), rate(rng), rate(rng), coup(rng)});
        const auto e = nh::eigenvalues(p);
        const cplx i{0.0, 1.0};
        const cplx tr = p.omega_a() + p.omega_c() - i * (p.gamma() + p.kappa());
        const cplx det = (p.omega_a() - i * p.gamma()) * (p.omega_c() - i * p.kappa()) - p.g() * p.g();
        worst = std::max({worst, std::abs(e.e_plus + e.e_minus - tr) / std::abs(tr),
                          std::abs(e.e_plus * e.e_minus - det) / std::abs(det)});
    }
    o.detail << "trace/det " << worst;
    o.require(worst <= 1e-10, "trace/determinant identities");

    const auto ops = qops::build_operators(3);
    double herm = 0.0, trace = 0.0, neg = 0.0;
    for (auto [kappa, g, d, eps] : std::vector<std::array<double, 4>>{
             {13.0, 5.0, 0.0, 1.0}, {133.0, 65.0, 50.0, 1.0}, {246.0, 121.5, -100.0, 1.0}, {13.0, 5.0, 7.0, 5.0}}) {
        const auto p = sys(kappa, g, d);
        const auto ss = dyn::steady_state(dyn::liouvillian(p, dyn::DriveParams::at_detuning(p, eps, 3.0), ops));
        cplx tr = 0.0;
        for (std::size_t j = 0; j < ss.rho.rows(); ++j) tr += ss.rho(j, j);
        herm = std::max(herm, ss.hermiticity_error);
        trace = std::max(trace, std::abs(tr - 1.0));
        neg = std::min(neg, ss.min_eigenvalue);
    }
    o.detail << "; steady state herm " << herm << " trace " << trace << " min eig " << neg;
    o.require(herm <= 1e-10 && trace <= 1e-10 && neg >= -1e-10, "steady-state physicality");

    const auto base = sys(246.0, 0.0);
    const auto loop = reference_loop();
    const auto fwd = topo::winding_number(loop, base), rev = topo::winding_number(loop.reversed(), base);
    o.require(fwd.w_plus == -rev.w_plus && fwd.w_total == -rev.w_total, "winding orientation antisymmetry");

    const auto h = topo::eigenvector_holonomy(base, loop, 2);
    const double dp = std::abs(h.phase_plus + 1.0), dm = std::abs(h.phase_minus + 1.0);
    o.detail << "; holonomy |phase + 1| " << std::max(dp, dm);
    o.require(h.permutation == topo::Permutation::identity && dp <= 1e-3 && dm <= 1e-3, "holonomy phase -1 after two turns");

    const auto f = mode::gaussian_field(0.7e-6, 4e-6, 301);
    const double a = mode::effective_mode_area(f);
    auto scaled = f;
    for (auto& v : scaled.amplitudes) v *= cplx(-2.0, 5.0);
    auto dilated = f;
    for (auto& v : dilated.x) v *= 3.0;
    for (auto& v : dilated.y) v *= 0.5;
    const double rs = std::abs(mode::effective_mode_area(scaled) - a) / a;
    const double rd = std::abs(mode::effective_mode_area(dilated) - 1.5 * a) / (1.5 * a);
    o.detail << "; mode area rescale " << rs << " dilation " << rd;
    o.require(rs <= 1e-12 && rd <= 1e-12, "mode-area rescaling and dilation");
    return o;
}

}  // namespace

int main() {
    int failures = 0;
    auto report = [&](const std::string& id, const std::function<Outcome()>& fn) {
        const auto start = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = fn();
        } catch (const std::exception& e) {
            o.pass = false;
            o.detail << "exception: " << e.what();
        }
        const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        if (!o.pass) ++failures;
        std::printf("%s criterion %s (%.1f s): %s\n", o.pass ? "PASS" : "FAIL", id.c_str(), s, o.detail.str().c_str());
        std::fflush(stdout);
    };

    report("1 EP positions", ep_positions);
    report("2 coupling constant", coupling_constant);
    report("3 mode area", mode_area);
    report("4 winding numbers", winding_numbers);
    report("5 topological transition", topological_transition);
    report("6 scaling law", scaling_law);
    std::vector<SpectrumCase> cases;
    try {
        cases = spectrum_cases();
    } catch (const std::exception& e) {
        std::printf("spectrum generation failed: %s\n", e.what());
    }
    report("7a spectrum cross-validation", [&] { return spectrum_agreement(cases); });
    report("7b weak-excitation photon window", [&] { return photon_window(cases); });
    report("8 eigenvalue round trip", [&] { return eigenvalue_round_trip(cases); });
    report("9 trajectory consistency", trajectory_consistency);
    report("10 fit recovery", fit_recovery);
    report("11 property suites", property_suites);
    std::printf("%d criterion line(s) failed\n", failures);
    return failures == 0 ? 0 : 1;
}
