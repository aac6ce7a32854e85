#include "epcav/nonhermitian.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "epcav/error.hpp"

namespace epcav::nh {

using qops::ComplexMatrix;

namespace {

constexpr cplx I{0.0, 1.0};

// Relative threshold on |discriminant| / gamma_+^2 below which the pair is treated as defective.
constexpr double kDefectiveTol = 1e-9;

}  // namespace

SystemParams::SystemParams(const Values& v) : v_(v) {
    const double all[] = {v.omega_a, v.omega_c, v.gamma, v.kappa, v.g};
    if (!std::all_of(std::begin(all), std::end(all), [](double x) { return std::isfinite(x); }))
        throw InvalidInput("SystemParams: non-finite value");
    if (!(v.gamma > 0.0)) throw InvalidInput("SystemParams: gamma must be > 0");
    if (!(v.kappa > 0.0)) throw InvalidInput("SystemParams: kappa must be > 0");
    if (!(v.g >= 0.0)) throw InvalidInput("SystemParams: g must be >= 0");
}

double SystemParams::gamma_plus() const noexcept { return 0.5 * std::abs(v_.kappa + v_.gamma); }
double SystemParams::gamma_minus() const noexcept { return 0.5 * std::abs(v_.kappa - v_.gamma); }

SystemParams SystemParams::with_g(double g) const {
    Values v = v_;
    v.g = g;
    return SystemParams(v);
}

SystemParams SystemParams::with_kappa(double kappa) const {
    Values v = v_;
    v.kappa = kappa;
    return SystemParams(v);
}

SystemParams SystemParams::with_delta_ca(double delta_ca) const {
    Values v = v_;
    v.omega_c = v.omega_a + delta_ca;
    return SystemParams(v);
}

ComplexMatrix SystemParams::hamiltonian() const {
    return ComplexMatrix{{v_.omega_a - I * v_.gamma, v_.g}, {v_.g, v_.omega_c - I * v_.kappa}};
}

ComplexMatrix SystemParams::shifted_hamiltonian() const {
    return ComplexMatrix{{-I * v_.gamma, v_.g}, {v_.g, delta_ca() - I * v_.kappa}};
}

cplx discriminant(const SystemParams& p) noexcept {
    const cplx h = 0.5 * p.delta_ca() - I * p.gamma_minus_signed();
    return (h + I * p.g()) * (h - I * p.g());
}

EigenPair eigenvalues(const SystemParams& p) {
    EigenPair out;
    out.discriminant = discriminant(p);
    const double gp = p.gamma_plus();
    cplx root = qops::principal_sqrt(out.discriminant);
    if (std::abs(out.discriminant) < kDefectiveTol * gp * gp) {
        out.defective = true;
        root = 0.0;
    }
    const cplx center = p.omega_plus() - I * gp;
    out.e_plus = center + root;
    out.e_minus = center - root;

    // Eigenvector of E+ is (g, E+ - F) with F = omega_a - i gamma.
    const cplx offset = out.e_plus - (p.omega_a() - I * p.gamma());
    if (p.g() > 0.0) {
        out.tan_theta = offset / p.g();
        out.theta_mix = std::atan(out.tan_theta);
    } else {
        // Uncoupled: E+ is either the bare atom (theta = 0) or the bare cavity (theta = pi/2).
        const bool atom_like = std::abs(offset) <= std::abs(out.e_plus - (p.omega_c() - I * p.kappa()));
        out.tan_theta = atom_like ? 0.0 : std::numeric_limits<double>::infinity();
        out.theta_mix = atom_like ? 0.0 : 0.5 * M_PI;
    }
    return out;
}

double ep_condition(double gamma, double kappa) {
    if (!(gamma > 0.0) || !(kappa > 0.0)) throw InvalidInput("ep_condition: rates must be > 0");
    return 0.5 * std::abs(kappa - gamma);
}

std::vector<ExceptionalLinePoint> exceptional_line(double gamma, std::span<const double> kappa_values) {
    std::vector<ExceptionalLinePoint> out;
    out.reserve(kappa_values.size());
    for (double k : kappa_values) out.push_back({k, ep_condition(gamma, k)});
    return out;
}

namespace {

struct Assignment {
    cplx plus;
    cplx minus;
};

// Continue the labelled pair (prev) onto the unordered roots {r1, r2}.
Assignment continue_sheets(const Assignment& prev, cplx r1, cplx r2, double delta, double g) {
    if (prev.plus == prev.minus || r1 == r2) return {r1, r2};
    const double keep = std::abs(r1 - prev.plus) + std::abs(r2 - prev.minus);
    const double swap = std::abs(r2 - prev.plus) + std::abs(r1 - prev.minus);
    if (std::abs(keep - swap) <= 1e-9 * (keep + swap)) {
        std::ostringstream msg;
        msg << "riemann_surface: ambiguous sheet continuation at (delta_ca=" << delta << ", g=" << g
            << "); refine the grid near the exceptional point";
        throw NumericError(msg.str());
    }
    return keep <= swap ? Assignment{r1, r2} : Assignment{r2, r1};
}

double median(std::vector<double> v) {
    if (v.empty()) return 0.0;
    const auto mid = v.begin() + static_cast<std::ptrdiff_t>(v.size() / 2);
    std::nth_element(v.begin(), mid, v.end());
    return *mid;
}

}  // namespace

RiemannSurface riemann_surface(const SystemParams& base, std::span<const double> delta_grid,
                               std::span<const double> g_grid) {
    if (delta_grid.empty() || g_grid.empty()) throw InvalidInput("riemann_surface: empty grid");
    if (std::any_of(g_grid.begin(), g_grid.end(), [](double g) { return g < 0.0; }))
        throw InvalidInput("riemann_surface: g grid must be non-negative");

    RiemannSurface s;
    s.n_delta = delta_grid.size();
    s.n_g = g_grid.size();
    s.samples.resize(s.n_delta * s.n_g);

    auto roots = [&](std::size_t ig, std::size_t id) {
        const auto p = base.with_g(g_grid[ig]).with_delta_ca(delta_grid[id]);
        return std::pair{eigenvalues(p), p};
    };

    Assignment column_prev{};
    for (std::size_t ig = 0; ig < s.n_g; ++ig) {
        Assignment prev{};
        for (std::size_t id = 0; id < s.n_delta; ++id) {
            const auto [ev, p] = roots(ig, id);
            Assignment cur{ev.e_plus, ev.e_minus};
            if (id == 0 && ig > 0) {
                cur = continue_sheets(column_prev, ev.e_plus, ev.e_minus, delta_grid[id], g_grid[ig]);
            } else if (id > 0) {
                cur = continue_sheets(prev, ev.e_plus, ev.e_minus, delta_grid[id], g_grid[ig]);
            }
            if (id == 0) column_prev = cur;
            prev = cur;
            s.samples[ig * s.n_delta + id] =
                SurfaceSample{delta_grid[id], g_grid[ig], cur.plus, cur.minus, ev.discriminant};
        }
    }

    struct EdgeCost {
        GridEdge edge;
        double keep;
        double swap;
    };
    std::vector<EdgeCost> edges;
    auto add_edge = [&](std::size_t a, std::size_t b) {
        const auto& x = s.samples[a];
        const auto& y = s.samples[b];
        edges.push_back({{a, b},
                         std::abs(x.sheet_plus - y.sheet_plus) + std::abs(x.sheet_minus - y.sheet_minus),
                         std::abs(x.sheet_plus - y.sheet_minus) + std::abs(x.sheet_minus - y.sheet_plus)});
    };
    for (std::size_t ig = 0; ig < s.n_g; ++ig)
        for (std::size_t id = 0; id < s.n_delta; ++id) {
            const std::size_t n = ig * s.n_delta + id;
            if (id + 1 < s.n_delta) add_edge(n, n + 1);
            if (ig + 1 < s.n_g) add_edge(n, n + s.n_delta);
        }

    std::vector<double> motion;
    motion.reserve(edges.size());
    for (const auto& e : edges) motion.push_back(e.keep);
    s.continuity_bound = 5.0 * median(std::move(motion));
    for (const auto& e : edges)
        if (e.keep > s.continuity_bound && e.swap < e.keep) s.branch_cut.push_back(e.edge);
    return s;
}

Decomposition eigen_decomposition(const SystemParams& p) {
    if (p.g() == 0.0)
        throw NumericError("eigen_decomposition: g = 0 leaves the (g, lambda - A) basis degenerate");
    const EigenPair ev = eigenvalues(p);
    Decomposition d;
    d.a = -I * p.gamma();
    d.b = p.delta_ca() - I * p.kappa();
    const cplx lp = ev.e_plus - p.omega_a();
    const cplx lm = ev.e_minus - p.omega_a();

    const cplx c1 = lp - d.a;
    const cplx c2 = lm - d.a;
    const cplx det = p.g() * (c2 - c1);
    const double n1 = std::hypot(p.g(), std::abs(c1));
    const double n2 = std::hypot(p.g(), std::abs(c2));
    const double parallel = std::abs(det) / (n1 * n2);
    if (ev.defective || parallel < 1e-8) {
        std::ostringstream msg;
        msg << "eigen_decomposition: eigenvector matrix singular near the exceptional point "
            << "(|disc| = " << std::abs(ev.discriminant) << ", normalized det = " << parallel << ")";
        throw NumericError(msg.str());
    }

    d.theta = ComplexMatrix{{p.g(), p.g()}, {c1, c2}};
    d.lambda = ComplexMatrix{{lp, 0.0}, {0.0, lm}};
    d.theta_inv = ComplexMatrix{{c2 / det, -p.g() / det}, {-c1 / det, p.g() / det}};
    return d;
}

ScalingFit scaling_exponent(const SystemParams& on_line, Perturbation perturb,
                            std::span<const double> eps_values) {
    if (eps_values.size() < 4) throw InvalidInput("scaling_exponent: need at least 4 eps values");
    const double tol = 1e-9 * std::max(1.0, on_line.gamma_plus());
    if (std::abs(on_line.delta_ca()) > tol ||
        std::abs(on_line.g() - on_line.gamma_minus()) > tol)
        throw InvalidInput("scaling_exponent: base point is not on the exceptional line");
    const auto [lo, hi] = std::minmax_element(eps_values.begin(), eps_values.end());
    if (!(*lo > 0.0)) throw InvalidInput("scaling_exponent: eps values must be positive");
    if (*hi / *lo < 100.0 * (1.0 - 1e-9)) throw InvalidInput("scaling_exponent: eps values must span two decades");

    ScalingFit fit;
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (double eps : eps_values) {
        const SystemParams q = perturb == Perturbation::coupling ? on_line.with_g(on_line.g() + eps)
                                                                  : on_line.with_kappa(on_line.kappa() + eps);
        const double gap = 2.0 * std::sqrt(std::abs(discriminant(q)));
        fit.eps.push_back(eps);
        fit.gaps.push_back(gap);
        const double x = std::log(eps), y = std::log(gap);
        sx += x, sy += y, sxx += x * x, sxy += x * y;
    }
    const double n = static_cast<double>(eps_values.size());
    fit.slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    fit.intercept = (sy - fit.slope * sx) / n;
    return fit;
}

}  // namespace epcav::nh
