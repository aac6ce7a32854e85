#include "epcav/specfit.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "epcav/error.hpp"
#include "epcav/qops.hpp"

namespace epcav::fit {

namespace {

using Matrix = std::vector<double>;  // row-major m x n

struct Problem {
    const ModelFn& model;
    std::span<const double> x;
    std::span<const double> y;
    std::size_t n;

    std::vector<double> residuals(std::span<const double> p) const {
        std::vector<double> r(x.size());
        for (std::size_t i = 0; i < x.size(); ++i) r[i] = model(x[i], p) - y[i];
        return r;
    }

    Matrix jacobian(std::vector<double> p, std::span<const double> r0) const {
        Matrix j(x.size() * n);
        for (std::size_t c = 0; c < n; ++c) {
            const double orig = p[c];
            const double h = std::max(1e-8, 1e-8 * std::abs(orig));
            p[c] = orig + h;
            const double step = p[c] - orig;
            for (std::size_t i = 0; i < x.size(); ++i) j[i * n + c] = (model(x[i], p) - y[i] - r0[i]) / step;
            p[c] = orig;
        }
        return j;
    }
};

double ssr(std::span<const double> r) { return std::inner_product(r.begin(), r.end(), r.begin(), 0.0); }

struct Normal {
    std::vector<double> jtj;  // n x n
    std::vector<double> grad;
};

Normal normal_equations(const Matrix& j, std::span<const double> r, std::size_t n) {
    const std::size_t m = r.size();
    Normal ne{std::vector<double>(n * n, 0.0), std::vector<double>(n, 0.0)};
    for (std::size_t i = 0; i < m; ++i) {
        const double* row = j.data() + i * n;
        for (std::size_t a = 0; a < n; ++a) {
            ne.grad[a] += row[a] * r[i];
            for (std::size_t b = 0; b < n; ++b) ne.jtj[a * n + b] += row[a] * row[b];
        }
    }
    return ne;
}

std::vector<double> solve_real(std::vector<double> a, std::span<const double> b, std::size_t n) {
    std::vector<cplx> entries(a.begin(), a.end());
    const CVector rhs(b.begin(), b.end());
    const CVector sol = qops::solve_linear(qops::ComplexMatrix(n, n, std::move(entries)), rhs);
    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i) out[i] = sol[i].real();
    return out;
}

double norm(std::span<const double> v) { return std::sqrt(ssr(v)); }

double scaled_gradient(const Normal& ne, double residual, std::size_t n) {
    const double rn = std::sqrt(residual);
    if (rn == 0.0) return 0.0;
    double worst = 0.0;
    for (std::size_t c = 0; c < n; ++c) {
        const double cn = std::sqrt(ne.jtj[c * n + c]);
        if (cn > 0.0) worst = std::max(worst, std::abs(ne.grad[c]) / (cn * rn));
    }
    return worst;
}

void clamp(std::vector<double>& p, const std::optional<Bounds>& bounds) {
    if (!bounds) return;
    for (std::size_t i = 0; i < p.size(); ++i) p[i] = std::clamp(p[i], bounds->lower[i], bounds->upper[i]);
}

}  // namespace

double FitResult::param(const std::string& name) const {
    for (std::size_t i = 0; i < names.size(); ++i)
        if (names[i] == name) return params[i];
    throw InvalidInput("FitResult: no parameter named '" + name + "'");
}

FitResult least_squares(const ModelFn& model, std::span<const double> x, std::span<const double> y,
                        std::vector<double> init, const std::optional<Bounds>& bounds,
                        std::vector<std::string> names, const Options& opts) {
    const std::size_t n = init.size();
    const std::size_t m = x.size();
    if (n == 0) throw InvalidInput("least_squares: no parameters");
    if (y.size() != m) throw InvalidInput("least_squares: x and y lengths differ");
    if (m < n) throw InvalidInput("least_squares: fewer data points than parameters");
    if (names.empty())
        for (std::size_t i = 0; i < n; ++i) names.push_back("p" + std::to_string(i));
    if (names.size() != n) throw InvalidInput("least_squares: names and init lengths differ");
    if (bounds) {
        if (bounds->lower.size() != n || bounds->upper.size() != n)
            throw InvalidInput("least_squares: bounds length does not match init");
        for (std::size_t i = 0; i < n; ++i)
            if (!(init[i] >= bounds->lower[i] && init[i] <= bounds->upper[i]))
                throw InvalidInput("least_squares: init for '" + names[i] + "' lies outside the bounds");
    }

    const Problem prob{model, x, y, n};
    std::vector<double> p = std::move(init);
    std::vector<double> r = prob.residuals(p);
    double cost = ssr(r);
    if (!std::isfinite(cost)) throw FitError("least_squares: model is not finite at the initial parameters");

    Matrix j = prob.jacobian(p, r);
    Normal ne = normal_equations(j, r, n);
    for (std::size_t c = 0; c < n; ++c)
        if (ne.jtj[c * n + c] == 0.0)
            throw FitError("least_squares: singular normal equations (parameter '" + names[c] +
                           "' does not affect the model)");

    FitResult res;
    res.names = std::move(names);
    res.history.push_back(cost);

    double lambda = 1e-4;
    int iter = 0;
    for (;;) {
        if (norm(ne.grad) < opts.gtol) {
            res.stop = Stop::gradient;
            break;
        }
        if (iter >= opts.max_iterations) {
            res.stop = Stop::iterations;
            break;
        }
        ++iter;

        double max_diag = 0.0;
        for (std::size_t c = 0; c < n; ++c) max_diag = std::max(max_diag, ne.jtj[c * n + c]);
        bool accepted = false;
        bool small_step = false;
        while (!accepted) {
            std::vector<double> a = ne.jtj;
            for (std::size_t c = 0; c < n; ++c) a[c * n + c] += lambda * std::max(ne.jtj[c * n + c], 1e-12 * max_diag);
            std::vector<double> neg_grad(n);
            for (std::size_t c = 0; c < n; ++c) neg_grad[c] = -ne.grad[c];
            std::vector<double> delta;
            try {
                delta = solve_real(std::move(a), neg_grad, n);
            } catch (const NumericError&) {
                lambda *= 10.0;
                if (lambda > 1e16) break;
                continue;
            }
            std::vector<double> trial = p;
            for (std::size_t c = 0; c < n; ++c) trial[c] += delta[c];
            clamp(trial, bounds);
            std::vector<double> actual(n);
            for (std::size_t c = 0; c < n; ++c) actual[c] = trial[c] - p[c];
            small_step = norm(actual) < opts.xtol * (norm(p) + opts.xtol);

            std::vector<double> rt = prob.residuals(trial);
            const double ct = ssr(rt);
            if (std::isfinite(ct) && ct < cost) {
                p = std::move(trial);
                r = std::move(rt);
                cost = ct;
                lambda = std::max(lambda / 10.0, 1e-15);
                accepted = true;
            } else {
                if (small_step) break;
                lambda *= 10.0;
                if (lambda > 1e16) break;
            }
        }
        if (accepted) {
            res.history.push_back(cost);
            j = prob.jacobian(p, r);
            ne = normal_equations(j, r, n);
        }
        if (small_step) {
            res.stop = Stop::step;
            break;
        }
        if (!accepted) {
            res.stop = Stop::stagnation;
            break;
        }
    }

    res.params = p;
    res.residual_norm = cost;
    res.iterations = iter;
    res.gradient_norm = norm(ne.grad);
    res.scaled_gradient = scaled_gradient(ne, cost, n);
    // Residuals at roundoff level relative to the data: the gradient is pure differencing noise.
    const double exact_fit = cost <= 1e-24 * std::max(ssr(y), std::numeric_limits<double>::min());
    res.converged = res.stop == Stop::gradient || exact_fit ||
                    ((res.stop == Stop::step || res.stop == Stop::stagnation) && res.scaled_gradient <= opts.scaled_gtol);

    if (m > n) {
        try {
            std::vector<double> inv_cols(n * n);
            for (std::size_t c = 0; c < n; ++c) {
                std::vector<double> e(n, 0.0);
                e[c] = 1.0;
                const auto col = solve_real(ne.jtj, e, n);
                for (std::size_t r2 = 0; r2 < n; ++r2) inv_cols[r2 * n + c] = col[r2];
            }
            const double s2 = cost / static_cast<double>(m - n);
            for (std::size_t c = 0; c < n; ++c) res.errors.push_back(std::sqrt(std::max(0.0, inv_cols[c * n + c] * s2)));
        } catch (const NumericError&) {
            res.errors.clear();
        }
    }
    return res;
}

double lorentzian(double w, double amplitude, double omega_c, double kappa) noexcept {
    const double k2 = kappa * kappa;
    return amplitude * k2 / (k2 + (w - omega_c) * (w - omega_c));
}

namespace {

void require_points(const dyn::Spectrum& s, std::size_t min_points, const char* who) {
    s.validate();
    if (s.points.size() < min_points) {
        std::ostringstream msg;
        msg << who << ": need at least " << min_points << " spectrum points, got " << s.points.size();
        throw InvalidInput(msg.str());
    }
}

void reject_flat(const std::vector<double>& y, const char* who) {
    const double n = static_cast<double>(y.size());
    const double mean = std::accumulate(y.begin(), y.end(), 0.0) / n;
    double var = 0.0;
    for (double v : y) var += (v - mean) * (v - mean);
    var /= n;
    if (var <= 1e-12 * mean * mean) throw FitError(std::string(who) + ": data are flat; nothing to fit");
}

// Half width at half maximum around index `peak`, by linear interpolation on each side.
double half_width(const std::vector<double>& x, const std::vector<double>& y, std::size_t peak, double base) {
    const double half = base + 0.5 * (y[peak] - base);
    auto crossing = [&](int dir) -> std::optional<double> {
        for (std::ptrdiff_t i = static_cast<std::ptrdiff_t>(peak); i + dir >= 0 && i + dir < std::ssize(y); i += dir) {
            const auto k = static_cast<std::size_t>(i), k2 = static_cast<std::size_t>(i + dir);
            if (y[k2] <= half) {
                const double f = (y[k] - half) / (y[k] - y[k2]);
                return std::abs(x[k] + f * (x[k2] - x[k]) - x[peak]);
            }
        }
        return std::nullopt;
    };
    const auto left = crossing(-1), right = crossing(+1);
    if (left && right) return 0.5 * (*left + *right);
    if (left) return *left;
    if (right) return *right;
    return 0.25 * (x.back() - x.front());
}

}  // namespace

LorentzianInit lorentzian_guess(const dyn::Spectrum& s) {
    const auto x = s.detunings();
    const auto y = s.transmissions();
    const auto peak = static_cast<std::size_t>(std::max_element(y.begin(), y.end()) - y.begin());
    return {y[peak], x[peak], half_width(x, y, peak, 0.0)};
}

FitResult fit_lorentzian(const dyn::Spectrum& s, std::optional<LorentzianInit> init) {
    require_points(s, 5, "fit_lorentzian");
    const auto x = s.detunings();
    const auto y = s.transmissions();
    reject_flat(y, "fit_lorentzian");
    const LorentzianInit guess = init.value_or(lorentzian_guess(s));
    if (!(x.back() - x.front() > std::abs(guess.kappa)))
        throw InvalidInput("fit_lorentzian: spectrum spans less than one estimated linewidth");

    const ModelFn model = [](double w, std::span<const double> p) { return lorentzian(w, p[0], p[1], p[2]); };
    FitResult r = least_squares(model, x, y, {guess.amplitude, guess.omega_c, guess.kappa}, std::nullopt,
                                {"A", "omega_c", "kappa"});
    r.model = "lorentzian";
    r.params[2] = std::abs(r.params[2]);
    return r;
}

double rabi_model(double delta_pc, double gamma, double kappa, double g, double delta_ca, double scale) {
    const nh::SystemParams p({0.0, delta_ca, gamma, kappa, std::abs(g)});
    return scale * dyn::analytic_transmission(p, dyn::DriveParams::at_detuning(p, 1.0, delta_pc));
}

RabiInit rabi_guess(const dyn::Spectrum& s, double gamma) {
    const auto x = s.detunings();
    const auto y = s.transmissions();
    std::vector<std::size_t> maxima;
    for (std::size_t i = 1; i + 1 < y.size(); ++i)
        if (y[i] > y[i - 1] && y[i] >= y[i + 1]) maxima.push_back(i);
    std::sort(maxima.begin(), maxima.end(), [&](auto a, auto b) { return y[a] > y[b]; });

    const double ymin = *std::min_element(y.begin(), y.end());
    if (maxima.size() >= 2) {
        const std::size_t a = std::min(maxima[0], maxima[1]), b = std::max(maxima[0], maxima[1]);
        const double mid = 0.5 * (x[a] + x[b]);
        const double half_sep = 0.5 * (x[b] - x[a]);
        const double delta_ca = -2.0 * mid;
        const double g = std::sqrt(std::max(half_sep * half_sep - 0.25 * delta_ca * delta_ca, 0.01 * half_sep * half_sep));
        // Each polariton carries roughly half of kappa + gamma as its width.
        const double w = half_width(x, y, maxima[0], ymin);
        return {std::max(2.0 * w - gamma, 0.1 * gamma), g, delta_ca, 1.0};
    }
    const std::size_t peak = maxima.empty()
                                 ? static_cast<std::size_t>(std::max_element(y.begin(), y.end()) - y.begin())
                                 : maxima[0];
    const double kappa = std::max(half_width(x, y, peak, 0.0), 0.1 * gamma);
    return {kappa, 0.1 * kappa, -2.0 * x[peak], 1.0};
}

RabiFit fit_rabi(const dyn::Spectrum& s, double gamma_fixed, std::optional<RabiInit> init) {
    if (!(gamma_fixed > 0.0)) throw InvalidInput("fit_rabi: gamma must be > 0");
    require_points(s, 5, "fit_rabi");
    const auto x = s.detunings();
    const auto y = s.transmissions();
    reject_flat(y, "fit_rabi");
    const RabiInit guess = init.value_or(rabi_guess(s, gamma_fixed));
    if (!(guess.kappa > 0.0)) throw InvalidInput("fit_rabi: initial kappa must be > 0");

    const ModelFn model = [gamma_fixed](double w, std::span<const double> p) {
        return rabi_model(w, gamma_fixed, p[0], p[1], p[2], p[3]);
    };
    const double inf = std::numeric_limits<double>::infinity();
    const Bounds box{{1e-9, -inf, -inf, 0.0}, {inf, inf, inf, inf}};
    FitResult r = least_squares(model, x, y, {guess.kappa, guess.g, guess.delta_ca, guess.scale}, box,
                                {"kappa", "g", "delta_ca", "scale"});
    r.model = "rabi";
    r.params[1] = std::abs(r.params[1]);
    if (!r.converged) {
        std::ostringstream msg;
        msg << "fit_rabi: no convergence after " << r.iterations << " iterations (scaled gradient "
            << r.scaled_gradient << ", residual " << r.residual_norm << ")";
        throw FitError(msg.str());
    }
    const nh::SystemParams p({0.0, r.params[2], gamma_fixed, r.params[0], r.params[1]});
    return {r, p, nh::eigenvalues(p)};
}

}  // namespace epcav::fit
