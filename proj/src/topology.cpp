#include "epcav/topology.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "epcav/error.hpp"
#include "epcav/qops.hpp"

namespace epcav::topo {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr double kSnapTol = 1e-3;

double median(std::vector<double> v) {
    if (v.empty()) return 0.0;
    const auto mid = v.begin() + static_cast<std::ptrdiff_t>(v.size() / 2);
    std::nth_element(v.begin(), mid, v.end());
    return *mid;
}

SystemParams at(const SystemParams& base, const LoopSpec& loop, std::size_t k) {
    return base.with_g(loop.g_at(k)).with_delta_ca(loop.delta_at(k));
}

// Distance between the loop center and the EP at (|kappa - gamma| / 2, 0), minus the radius.
double ep_distance(const LoopSpec& loop, const SystemParams& base) {
    return std::hypot(loop.g_center - base.gamma_minus(), loop.delta_center) - loop.radius;
}

double snap_half(double w, bool& snapped) {
    const double s = std::round(2.0 * w) / 2.0;
    snapped = std::abs(w - s) <= kSnapTol;
    return snapped ? s : w;
}

struct Pair {
    cplx plus;
    cplx minus;
};

// Assign the unordered roots {r1, r2} to the strands continuing prev.
Pair follow(const Pair& prev, cplx r1, cplx r2, double theta) {
    const double keep = std::abs(r1 - prev.plus) + std::abs(r2 - prev.minus);
    const double swap = std::abs(r2 - prev.plus) + std::abs(r1 - prev.minus);
    if (r1 != r2 && std::abs(keep - swap) <= 1e-9 * (keep + swap)) {
        std::ostringstream msg;
        msg << "loop tracking: ambiguous strand assignment at theta = " << theta << "; increase n_steps";
        throw NumericError(msg.str());
    }
    return keep <= swap ? Pair{r1, r2} : Pair{r2, r1};
}

// c-normalised right eigenvector (g, E - F) / sqrt(g^2 + (E - F)^2) of H for eigenvalue e.
std::pair<cplx, cplx> c_normalized(const SystemParams& p, cplx e) {
    const cplx u = p.g();
    const cplx v = e - (p.omega_a() - cplx(0.0, p.gamma()));
    const cplx n = std::sqrt(u * u + v * v);
    if (std::abs(n) < 1e-12 * std::max(std::abs(u), std::abs(v)))
        throw NumericError("eigenvector_holonomy: self-orthogonal eigenvector (loop passes through the EP)");
    return {u / n, v / n};
}

cplx hermitian_overlap(std::pair<cplx, cplx> a, std::pair<cplx, cplx> b) {
    return std::conj(a.first) * b.first + std::conj(a.second) * b.second;
}

}  // namespace

void LoopSpec::validate() const {
    if (!(radius >= 0.0) || !std::isfinite(radius)) throw InvalidInput("LoopSpec: radius must be >= 0");
    if (n_steps < 16) throw InvalidInput("LoopSpec: n_steps must be >= 16");
    if (!(g_center - radius > 0.0))
        throw InvalidInput("LoopSpec: loop must stay in the g > 0 half-plane (g_center - radius > 0)");
    if (!std::isfinite(delta_center)) throw InvalidInput("LoopSpec: delta_center must be finite");
}

double LoopSpec::theta(std::size_t k) const noexcept {
    const double t = kTwoPi * static_cast<double>(k) / static_cast<double>(n_steps);
    return orientation == Orientation::counterclockwise ? t : -t;
}

double LoopSpec::g_at(std::size_t k) const noexcept { return g_center + radius * std::cos(theta(k)); }
double LoopSpec::delta_at(std::size_t k) const noexcept { return delta_center + radius * std::sin(theta(k)); }

LoopSpec LoopSpec::reversed() const {
    LoopSpec r = *this;
    r.orientation = orientation == Orientation::counterclockwise ? Orientation::clockwise : Orientation::counterclockwise;
    return r;
}

std::string_view to_string(Permutation p) noexcept { return p == Permutation::swap ? "swap" : "identity"; }

std::string_view to_string(LoopClass c) noexcept {
    switch (c) {
        case LoopClass::trivial: return "trivial";
        case LoopClass::on_ep_ill_defined: return "on_ep_ill_defined";
        case LoopClass::nontrivial: return "nontrivial";
    }
    return "trivial";
}

BraidResult track_eigenvalues_on_loop(const SystemParams& base, const LoopSpec& loop) {
    loop.validate();
    BraidResult out;
    const std::size_t n = loop.n_steps;
    std::vector<bool> relabelled;
    Pair prev{};
    for (std::size_t k = 0; k <= n; ++k) {
        const nh::EigenPair e = nh::eigenvalues(at(base, loop, k));
        const Pair cur = k == 0 ? Pair{e.e_plus, e.e_minus} : follow(prev, e.e_plus, e.e_minus, loop.theta(k));
        out.theta.push_back(loop.theta(k));
        out.strand_plus.push_back(cur.plus);
        out.strand_minus.push_back(cur.minus);
        relabelled.push_back(cur.plus != e.e_plus);
        if (k > 0 && relabelled[k] != relabelled[k - 1]) out.branch_cut_crossings.push_back(k);
        prev = cur;
    }

    std::vector<double> motion;
    motion.reserve(n);
    for (std::size_t k = 1; k <= n; ++k)
        motion.push_back(std::max(std::abs(out.strand_plus[k] - out.strand_plus[k - 1]),
                                  std::abs(out.strand_minus[k] - out.strand_minus[k - 1])));
    out.max_step = *std::max_element(motion.begin(), motion.end());
    const double scale = std::max({1.0, std::abs(out.strand_plus[0]), std::abs(out.strand_minus[0])});
    out.continuity_bound = std::max(5.0 * median(motion), 1e-12 * scale);
    if (out.max_step >= out.continuity_bound) {
        std::ostringstream msg;
        msg << "loop tracking: step of " << out.max_step << " exceeds continuity bound " << out.continuity_bound
            << "; increase n_steps or move the loop away from the EP";
        throw NumericError(msg.str());
    }

    const cplx p0 = out.strand_plus.front(), m0 = out.strand_minus.front();
    const cplx p1 = out.strand_plus.back(), m1 = out.strand_minus.back();
    const double keep = std::abs(p1 - p0) + std::abs(m1 - m0);
    const double swap = std::abs(p1 - m0) + std::abs(m1 - p0);
    out.permutation = swap < keep ? Permutation::swap : Permutation::identity;
    if (std::min(keep, swap) > 1e-9 * scale)
        throw NumericError("loop tracking: strands do not close onto the starting eigenvalues");

    if (std::abs(ep_distance(loop, base)) > kOnEpBand * loop.radius) out.winding_total = winding_number(loop, base).w_total;
    return out;
}

Holonomy eigenvector_holonomy(const SystemParams& base, const LoopSpec& loop, std::size_t n_turns) {
    loop.validate();
    if (n_turns == 0) throw InvalidInput("eigenvector_holonomy: n_turns must be >= 1");
    const std::size_t n = loop.n_steps;

    const SystemParams p0 = at(base, loop, 0);
    const nh::EigenPair e0 = nh::eigenvalues(p0);
    if (e0.defective) throw NumericError("eigenvector_holonomy: loop starts at the EP");
    const auto start_plus = c_normalized(p0, e0.e_plus);
    const auto start_minus = c_normalized(p0, e0.e_minus);

    Pair strands{e0.e_plus, e0.e_minus};
    auto vp = start_plus, vm = start_minus;
    for (std::size_t t = 0; t < n_turns; ++t)
        for (std::size_t k = 1; k <= n; ++k) {
            const SystemParams p = at(base, loop, k);
            const nh::EigenPair e = nh::eigenvalues(p);
            strands = follow(strands, e.e_plus, e.e_minus, loop.theta(k));
            auto transport = [&](std::pair<cplx, cplx>& v, cplx eig) {
                auto next = c_normalized(p, eig);
                if (hermitian_overlap(v, next).real() < 0.0) next = {-next.first, -next.second};
                v = next;
            };
            transport(vp, strands.plus);
            transport(vm, strands.minus);
        }

    Holonomy h;
    const bool swapped = std::abs(strands.plus - e0.e_minus) < std::abs(strands.plus - e0.e_plus);
    h.permutation = swapped ? Permutation::swap : Permutation::identity;
    auto phase = [](std::pair<cplx, cplx> target, std::pair<cplx, cplx> v) {
        const cplx o = hermitian_overlap(target, v);
        return o / std::abs(o);
    };
    h.phase_plus = phase(swapped ? start_minus : start_plus, vp);
    h.phase_minus = phase(swapped ? start_plus : start_minus, vm);
    return h;
}

Winding winding_number(const LoopSpec& loop, const SystemParams& base) {
    loop.validate();
    if (std::abs(ep_distance(loop, base)) <= kOnEpBand * loop.radius)
        throw InvalidInput("winding_number: the EP lies on the contour; the winding number is ill-defined");

    double accumulated = 0.0;
    cplx prev = nh::discriminant(at(base, loop, 0));
    for (std::size_t k = 1; k <= loop.n_steps; ++k) {
        const cplx cur = nh::discriminant(at(base, loop, k));
        const double step = std::arg(cur / prev);
        if (std::abs(step) >= 0.5 * std::numbers::pi) {
            std::ostringstream msg;
            msg << "winding_number: phase step of " << step << " rad at theta = " << loop.theta(k)
                << "; increase n_steps";
            throw NumericError(msg.str());
        }
        accumulated += step;
        prev = cur;
    }

    // E'+ = sqrt(product) and E'- = -sqrt(product) both turn by half the product's argument.
    Winding w;
    w.raw_plus = -0.5 * accumulated / kTwoPi;
    w.raw_minus = w.raw_plus;
    bool sp = false, sm = false;
    w.w_plus = snap_half(w.raw_plus, sp);
    w.w_minus = snap_half(w.raw_minus, sm);
    w.snapped = sp && sm;
    w.w_total = w.w_plus + w.w_minus;

    const bool encloses = ep_distance(loop, base) < 0.0 && base.gamma_minus() > 0.0;
    const double turns = encloses ? (loop.orientation == Orientation::counterclockwise ? 1.0 : -1.0) : 0.0;
    const double sign = base.kappa() >= base.gamma() ? 1.0 : -1.0;
    w.residue_prediction = sign * 0.5 * turns;
    if (w.snapped && w.w_plus != w.residue_prediction) {
        std::ostringstream msg;
        msg << "winding_number: accumulated W+ = " << w.raw_plus << " disagrees with the residue count "
            << w.residue_prediction;
        throw NumericError(msg.str());
    }
    return w;
}

Classification classify_loop(const LoopSpec& loop, const SystemParams& base) {
    loop.validate();
    Classification c;
    c.distance = ep_distance(loop, base);
    c.tolerance = kOnEpBand * loop.radius;
    if (std::abs(c.distance) <= c.tolerance) {
        c.cls = LoopClass::on_ep_ill_defined;
        return c;
    }
    c.cls = c.distance > 0.0 ? LoopClass::trivial : LoopClass::nontrivial;
    c.winding = winding_number(loop, base);
    return c;
}

}  // namespace epcav::topo
