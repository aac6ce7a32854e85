#include "epcav/cli/run.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <map>
#include <numbers>
#include <sstream>

#include "epcav/cli/io.hpp"
#include "epcav/error.hpp"

namespace epcav::cli {

namespace {

using Outputs = std::vector<std::filesystem::path>;

json complex_json(cplx z) { return {{"re", z.real()}, {"im", z.imag()}}; }

struct Context {
    ScenarioConfig cfg;
    std::filesystem::path out;
    std::filesystem::path base_dir;  // relative input paths resolve against the config's directory
    Outputs files;

    std::filesystem::path input(const std::string& p) const {
        const std::filesystem::path path(p);
        return path.is_absolute() ? path : base_dir / path;
    }
    void text(const std::string& name, const std::string& body) {
        write_text(out / name, body);
        files.push_back(out / name);
    }
    void json_file(const std::string& name, const json& j) {
        write_json(out / name, j);
        files.push_back(out / name);
    }
};

void cmd_eigen(Context& c) {
    const auto p = c.cfg.system();
    const auto e = nh::eigenvalues(p);
    c.json_file("eigen.json", {{"g", p.g()},
                               {"delta_ca", p.delta_ca()},
                               {"gamma", p.gamma()},
                               {"kappa", p.kappa()},
                               {"e_plus", complex_json(e.e_plus)},
                               {"e_minus", complex_json(e.e_minus)},
                               {"discriminant", complex_json(e.discriminant)},
                               {"theta_mix", e.defective ? json(nullptr) : complex_json(e.theta_mix)},
                               {"gap", e.gap()},
                               {"defective", e.defective}});
}

void cmd_exceptional_line(Context& c) {
    std::string out = "kappa,g_ep\n";
    for (const auto& pt : nh::exceptional_line(c.cfg.gamma, c.cfg.kappa_values))
        out += format_double(pt.kappa) + "," + format_double(pt.g_ep) + "\n";
    c.text("exceptional_line.csv", out);
}

void cmd_surface(Context& c) {
    const auto& g = c.cfg.grid;
    if (g.delta_n < 1 || g.g_n < 1) throw ConfigError("grid", "delta_n and g_n must be >= 1");
    const auto dgrid = g.delta_n == 1 ? std::vector<double>{g.delta_min} : mode::linspace(g.delta_min, g.delta_max, g.delta_n);
    const auto ggrid = g.g_n == 1 ? std::vector<double>{g.g_min} : mode::linspace(g.g_min, g.g_max, g.g_n);
    const auto s = nh::riemann_surface(c.cfg.system(), dgrid, ggrid);

    std::string out = "delta_ca,g,re_e_plus,im_e_plus,re_e_minus,im_e_minus\n";
    for (const auto& v : s.samples)
        out += format_double(v.delta_ca) + "," + format_double(v.g) + "," + format_double(v.sheet_plus.real()) + "," +
               format_double(v.sheet_plus.imag()) + "," + format_double(v.sheet_minus.real()) + "," +
               format_double(v.sheet_minus.imag()) + "\n";
    c.text("surface.csv", out);

    std::string cut = "delta_from,g_from,delta_to,g_to\n";
    for (const auto& e : s.branch_cut) {
        const auto& a = s.samples[e.from];
        const auto& b = s.samples[e.to];
        cut += format_double(a.delta_ca) + "," + format_double(a.g) + "," + format_double(b.delta_ca) + "," +
               format_double(b.g) + "\n";
    }
    c.text("branch_cut.csv", cut);
}

void cmd_spectrum(Context& c) {
    const auto p = c.cfg.system();
    const auto d = c.cfg.detunings.expand(p);
    const auto s = dyn::transmission_spectrum(p, c.cfg.drive, d, c.cfg.backend, c.cfg.sim);
    c.text("spectrum.csv", spectrum_csv(s));
}

dyn::Spectrum input_spectrum(const Context& c) {
    if (c.cfg.spectrum_csv.empty()) throw ConfigError("spectrum_csv", "required for fitting commands");
    try {
        return read_spectrum_csv(c.input(c.cfg.spectrum_csv));
    } catch (const InvalidInput& e) {
        throw ConfigError("spectrum_csv", e.what());
    }
}

double init_number(const json& init, const std::string& key) {
    const json& v = init.at(key);
    if (!v.is_number()) throw ConfigError("fit_init." + key, "expected a number");
    return v.get<double>();
}

void check_init_keys(const json& init, std::initializer_list<std::string_view> required,
                     std::initializer_list<std::string_view> optional = {}) {
    for (const auto& [k, v] : init.items()) {
        const bool known = std::find(required.begin(), required.end(), k) != required.end() ||
                           std::find(optional.begin(), optional.end(), k) != optional.end();
        if (!known) throw ConfigError("fit_init." + k, "unknown key");
    }
    for (auto k : required)
        if (!init.contains(std::string(k))) throw ConfigError("fit_init." + std::string(k), "required");
}

void cmd_fit_lorentzian(Context& c) {
    const auto s = input_spectrum(c);
    std::optional<fit::LorentzianInit> init;
    if (c.cfg.fit_init.is_object()) {
        check_init_keys(c.cfg.fit_init, {"amplitude", "omega_c", "kappa"});
        init = fit::LorentzianInit{init_number(c.cfg.fit_init, "amplitude"), init_number(c.cfg.fit_init, "omega_c"),
                                   init_number(c.cfg.fit_init, "kappa")};
    }
    const auto r = fit::fit_lorentzian(s, init);
    c.json_file("fit.json", fit_json(r));
    if (!r.converged) throw FitError("fit-lorentzian: did not converge after " + std::to_string(r.iterations) + " iterations");
}

void cmd_fit_rabi(Context& c) {
    const auto s = input_spectrum(c);
    std::optional<fit::RabiInit> init;
    if (c.cfg.fit_init.is_object()) {
        check_init_keys(c.cfg.fit_init, {"kappa", "g", "delta_ca"}, {"scale"});
        init = fit::RabiInit{init_number(c.cfg.fit_init, "kappa"), init_number(c.cfg.fit_init, "g"),
                             init_number(c.cfg.fit_init, "delta_ca"),
                             c.cfg.fit_init.contains("scale") ? init_number(c.cfg.fit_init, "scale") : 1.0};
    }
    const auto r = fit::fit_rabi(s, c.cfg.gamma, init);
    c.json_file("fit.json", fit_json(r.fit));
    c.json_file("fit_eigen.json", {{"e_plus", complex_json(r.eigen.e_plus)},
                                   {"e_minus", complex_json(r.eigen.e_minus)},
                                   {"defective", r.eigen.defective}});
}

json crossing_thetas(const topo::BraidResult& b) {
    json out = json::array();
    for (std::size_t k : b.branch_cut_crossings) out.push_back(b.theta[k]);
    return out;
}

void cmd_braid(Context& c) {
    const auto p = c.cfg.system();
    const auto& loop = c.cfg.loop;
    const auto b = topo::track_eigenvalues_on_loop(p, loop.spec);
    c.text("braid.csv", braid_csv(b));
    json summary{{"permutation", std::string(topo::to_string(b.permutation))},
                 {"crossings", crossing_thetas(b)},
                 {"max_step", b.max_step},
                 {"continuity_bound", b.continuity_bound},
                 {"w_total", b.winding_total ? json(*b.winding_total) : json(nullptr)}};
    if (loop.n_turns > 0) {
        const auto h = topo::eigenvector_holonomy(p, loop.spec, loop.n_turns);
        summary["holonomy"] = {{"n_turns", loop.n_turns},
                               {"permutation", std::string(topo::to_string(h.permutation))},
                               {"phase_plus", complex_json(h.phase_plus)},
                               {"phase_minus", complex_json(h.phase_minus)}};
    }
    c.json_file("braid.json", summary);
}

// Crossings are only meaningful when the strands can be tracked; near the EP they are reported as null.
json loop_crossings(const nh::SystemParams& p, const topo::LoopSpec& loop, std::vector<std::string>& log) {
    try {
        return crossing_thetas(topo::track_eigenvalues_on_loop(p, loop));
    } catch (const NumericError& e) {
        log.push_back(std::string("crossings unavailable: ") + e.what());
        return nullptr;
    }
}

void cmd_winding(Context& c) {
    const auto p = c.cfg.system();
    const auto w = topo::winding_number(c.cfg.loop.spec, p);
    topo::Classification cl = topo::classify_loop(c.cfg.loop.spec, p);
    if (!w.snapped) c.cfg.log.push_back("winding not within 1e-3 of a half-integer; reported unsnapped");
    cl.winding = w;
    c.json_file("winding.json", classification_json(cl, loop_crossings(p, c.cfg.loop.spec, c.cfg.log)));
}

void cmd_classify(Context& c) {
    const auto p = c.cfg.system();
    const auto cl = topo::classify_loop(c.cfg.loop.spec, p);
    const json crossings =
        cl.cls == topo::LoopClass::on_ep_ill_defined ? json(nullptr) : loop_crossings(p, c.cfg.loop.spec, c.cfg.log);
    json j = classification_json(cl, crossings);
    j["distance"] = cl.distance;
    j["tolerance"] = cl.tolerance;
    c.json_file("classify.json", j);
}

void cmd_scaling(Context& c) {
    std::vector<double> eps = c.cfg.scaling.eps_values;
    if (eps.empty())
        for (int i = 0; i <= 10; ++i) eps.push_back(c.cfg.gamma * std::pow(10.0, -4.0 + 0.2 * i));

    std::vector<std::pair<std::string, nh::Perturbation>> kinds;
    const auto& which = c.cfg.scaling.perturbation;
    if (which == "coupling" || which == "both") kinds.emplace_back("coupling", nh::Perturbation::coupling);
    if (which == "dissipation" || which == "both") kinds.emplace_back("dissipation", nh::Perturbation::dissipation);

    std::string csv = "perturbation,kappa,eps,gap\n";
    json fits = json::array();
    for (double kappa : c.cfg.kappa_values) {
        const nh::SystemParams base({0.0, 0.0, c.cfg.gamma, kappa, nh::ep_condition(c.cfg.gamma, kappa)});
        for (const auto& [name, kind] : kinds) {
            const auto f = nh::scaling_exponent(base, kind, eps);
            for (std::size_t i = 0; i < f.eps.size(); ++i)
                csv += name + "," + format_double(kappa) + "," + format_double(f.eps[i]) + "," + format_double(f.gaps[i]) + "\n";
            fits.push_back({{"perturbation", name}, {"kappa", kappa}, {"slope", f.slope}, {"intercept", f.intercept}});
        }
    }
    c.text("scaling.csv", csv);
    c.json_file("scaling.json", {{"fits", fits}});
}

void cmd_mode_area(Context& c) {
    const auto& f = c.cfg.field;
    json j{{"source", f.source}};
    mode::ScalarField2D field;
    if (f.source == "csv") {
        if (f.path.empty()) throw ConfigError("field.path", "required when field.source is 'csv'");
        try {
            field = read_field_csv(c.input(f.path));
        } catch (const InvalidInput& e) {
            throw ConfigError("field.path", e.what());
        }
    } else if (f.source == "gaussian") {
        field = mode::gaussian_field(f.w, f.half, f.n);
        j["closed_form_m2"] = std::numbers::pi * f.w * f.w;
    } else {
        field = mode::cosine_gaussian_field(f.wavelength, f.length, f.w0, f.y_half, f.nx, f.ny);
        j["closed_form_m2"] = mode::cosine_gaussian_area(f.length, f.w0);
    }
    j["a_eff_m2"] = mode::effective_mode_area(field);
    j["nx"] = field.x.size();
    j["ny"] = field.y.size();
    c.json_file("mode_area.json", j);
}

void cmd_g0(Context& c) {
    const auto& g = c.cfg.g0;
    const double omega0 = 2.0 * std::numbers::pi * mode::kCodata.c / g.wavelength;
    const double g0 = mode::coupling_constant_g0(omega0, g.regions, g.w0, g.d_ge);
    c.json_file("g0.json", {{"omega0_rad_s", omega0},
                            {"g0_rad_s", g0},
                            {"g0_over_2pi_mhz", g0 / (2.0 * std::numbers::pi) / 1e6}});
}

using Handler = void (*)(Context&);

const std::map<std::string, Handler, std::less<>>& handlers() {
    static const std::map<std::string, Handler, std::less<>> h{
        {"eigen", cmd_eigen},       {"exceptional-line", cmd_exceptional_line},
        {"surface", cmd_surface},   {"spectrum", cmd_spectrum},
        {"fit-lorentzian", cmd_fit_lorentzian}, {"fit-rabi", cmd_fit_rabi},
        {"braid", cmd_braid},       {"winding", cmd_winding},
        {"classify", cmd_classify}, {"scaling", cmd_scaling},
        {"mode-area", cmd_mode_area}, {"g0", cmd_g0},
    };
    return h;
}

}  // namespace

const std::vector<std::string>& commands() {
    static const std::vector<std::string> names{"eigen",    "exceptional-line", "surface", "spectrum",
                                                "fit-lorentzian", "fit-rabi", "braid",   "winding",
                                                "classify", "scaling",          "mode-area", "g0"};
    return names;
}

std::uint64_t parse_seed(const std::string& text, const std::string& field) {
    std::uint64_t v = 0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (text.empty() || ec != std::errc() || ptr != text.data() + text.size())
        throw ConfigError(field, "'" + text + "' is not an unsigned 64-bit integer");
    return v;
}

RunReport run(const RunRequest& req) {
    const auto start = std::chrono::steady_clock::now();
    const auto it = handlers().find(req.command);
    if (it == handlers().end()) throw ConfigError("command", "unknown command '" + req.command + "'");

    Context c;
    c.cfg = req.config.empty() ? parse_config("{}", req.command) : load_config(req.config, req.command);
    c.base_dir = std::filesystem::absolute(req.config.has_parent_path() ? req.config.parent_path() : std::filesystem::path("."));
    if (req.backend) {
        try {
            c.cfg.backend = dyn::parse_backend(*req.backend);
        } catch (const InvalidInput&) {
            throw ConfigError("--backend", "expected analytic, lindblad or trajectory");
        }
    }
    if (req.seed) {
        c.cfg.sim.seed = *req.seed;
        c.cfg.log.push_back("seed taken from --seed");
    } else if (req.env_seed) {
        c.cfg.sim.seed = parse_seed(*req.env_seed, "EPCAV_SEED");
        c.cfg.log.push_back("seed taken from EPCAV_SEED");
    }
    if (req.steps) c.cfg.loop.spec.n_steps = *req.steps;
    // Absolute input paths keep the manifest's config re-runnable from any directory.
    if (!c.cfg.spectrum_csv.empty()) c.cfg.spectrum_csv = c.input(c.cfg.spectrum_csv).lexically_normal().string();
    if (!c.cfg.field.path.empty()) c.cfg.field.path = c.input(c.cfg.field.path).lexically_normal().string();

    std::error_code ec;
    std::filesystem::create_directories(req.out, ec);
    if (ec || !std::filesystem::is_directory(req.out))
        throw ConfigError("out", "cannot create output directory '" + req.out.string() + "'");
    c.out = req.out;

    try {
        it->second(c);
    } catch (const ConfigError&) {
        throw;
    } catch (const InvalidInput& e) {
        // Library preconditions on config-supplied values surface as configuration errors.
        throw ConfigError(req.command, e.what());
    }

    const double wall =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    RunReport rep;
    rep.manifest = {{"command", req.command},
                    {"config", c.cfg.resolved()},
                    {"version", std::string(kVersion)},
                    {"wall_time", wall},
                    {"kappa_source", c.cfg.kappa_source},
                    {"log", c.cfg.log}};
    c.json_file("manifest.json", rep.manifest);
    rep.outputs = c.files;
    return rep;
}

}  // namespace epcav::cli
