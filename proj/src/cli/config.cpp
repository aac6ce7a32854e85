#include "epcav/cli/config.hpp"

#include <array>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "epcav/error.hpp"

namespace epcav::cli {

namespace {

constexpr std::array<TipFixture, 4> kTips{{
    {"h5", 5.0, 12.70, 12.70},
    {"h6", 6.0, 13.50, 13.50},
    {"h6.8", 6.8, 133.0, 133.0},
    {"h7", 7.0, 245.00, 246.0},
}};

std::string join(const std::string& prefix, const std::string& key) { return prefix.empty() ? key : prefix + "." + key; }

// Walks one JSON object, consuming known keys; leftovers are reported as unknown.
class Reader {
public:
    Reader(const json& obj, std::string path) : obj_(obj), path_(std::move(path)) {
        if (!obj_.is_object()) throw ConfigError(path_.empty() ? "<root>" : path_, "expected an object");
    }

    ~Reader() = default;

    bool has(const std::string& key) const { return obj_.contains(key); }

    void number(const std::string& key, double& out) {
        if (const json* v = take(key)) {
            if (!v->is_number()) throw ConfigError(join(path_, key), "expected a number");
            out = v->get<double>();
            if (!std::isfinite(out)) throw ConfigError(join(path_, key), "must be finite");
        }
    }

    void number(const std::string& key, std::optional<double>& out) {
        if (has(key)) {
            double v = 0.0;
            number(key, v);
            out = v;
        }
    }

    void count(const std::string& key, std::size_t& out) {
        if (const json* v = take(key)) {
            if (!v->is_number_integer() || v->get<long long>() < 0)
                throw ConfigError(join(path_, key), "expected a non-negative integer");
            out = v->get<std::size_t>();
        }
    }

    void seed(const std::string& key, std::uint64_t& out) {
        if (const json* v = take(key)) {
            if (!v->is_number_unsigned()) throw ConfigError(join(path_, key), "expected an unsigned 64-bit integer");
            out = v->get<std::uint64_t>();
        }
    }

    void string(const std::string& key, std::string& out) {
        if (const json* v = take(key)) {
            if (!v->is_string()) throw ConfigError(join(path_, key), "expected a string");
            out = v->get<std::string>();
        }
    }

    void numbers(const std::string& key, std::vector<double>& out) {
        if (const json* v = take(key)) out = number_list(*v, join(path_, key));
    }

    const json* take(const std::string& key) {
        if (!obj_.contains(key)) return nullptr;
        seen_.insert(key);
        return &obj_.at(key);
    }

    std::string child(const std::string& key) const { return join(path_, key); }

    void finish() const {
        for (const auto& [k, v] : obj_.items())
            if (!seen_.count(k)) throw ConfigError(join(path_, k), "unknown key");
    }

    static std::vector<double> number_list(const json& v, const std::string& path) {
        if (!v.is_array()) throw ConfigError(path, "expected an array of numbers");
        std::vector<double> out;
        for (std::size_t i = 0; i < v.size(); ++i) {
            if (!v[i].is_number()) throw ConfigError(path + "[" + std::to_string(i) + "]", "expected a number");
            out.push_back(v[i].get<double>());
        }
        return out;
    }

private:
    const json& obj_;
    std::string path_;
    std::set<std::string> seen_;
};

std::pair<std::size_t, std::size_t> line_column(const std::string& text, std::size_t byte) {
    std::size_t line = 1, col = 1;
    for (std::size_t i = 0; i + 1 < byte && i < text.size(); ++i) {
        if (text[i] == '\n') {
            ++line;
            col = 1;
        } else {
            ++col;
        }
    }
    return {line, col};
}

topo::Orientation parse_orientation(const std::string& s, const std::string& path) {
    if (s == "counterclockwise") return topo::Orientation::counterclockwise;
    if (s == "clockwise") return topo::Orientation::clockwise;
    throw ConfigError(path, "expected 'counterclockwise' or 'clockwise'");
}

void read_detunings(const json& v, const std::string& path, DetuningGrid& out) {
    if (v.is_array()) {
        out.values = Reader::number_list(v, path);
        return;
    }
    Reader r(v, path);
    r.number("min", out.min);
    r.number("max", out.max);
    r.count("n", out.n);
    r.finish();
    if (out.n == 1 || (out.n > 1 && !(out.max > out.min)))
        throw ConfigError(path, "needs n >= 2 and max > min");
}

}  // namespace

std::span<const TipFixture> tip_fixtures() noexcept { return kTips; }

const TipFixture& find_tip(std::string_view label) {
    for (const auto& t : kTips)
        if (t.label == label) return t;
    throw ConfigError("tip_scenario", "unknown tip scenario '" + std::string(label) + "' (expected h5, h6, h6.8 or h7)");
}

bool uses_fit_alias(std::string_view command) noexcept {
    return command.empty() || command == "spectrum" || command == "fit-lorentzian" || command == "fit-rabi";
}

std::vector<double> DetuningGrid::expand(const nh::SystemParams& p) const {
    if (values) return *values;
    if (n == 0) {
        const double span = 3.0 * (p.kappa() + p.g() + std::abs(p.delta_ca()));
        return mode::linspace(-span, span, 601);
    }
    return mode::linspace(min, max, n);
}

nh::SystemParams ScenarioConfig::system() const {
    if (!kappa) throw ConfigError("kappa", "required (or set tip_scenario)");
    try {
        return nh::SystemParams({omega_a, omega_c, gamma, *kappa, g});
    } catch (const InvalidInput& e) {
        throw ConfigError("", e.what());
    }
}

json ScenarioConfig::resolved() const {
    json j;
    j["omega_a"] = omega_a;
    j["omega_c"] = omega_c;
    j["gamma"] = gamma;
    if (kappa) j["kappa"] = *kappa;
    j["g"] = g;
    j["epsilon"] = drive.epsilon;
    j["omega_p"] = drive.omega_p;
    j["n_fock"] = sim.n_fock;
    j["n_trajectories"] = sim.n_trajectories;
    j["dt"] = sim.dt;
    j["t_final"] = sim.t_final;
    j["seed"] = sim.seed;
    j["backend"] = std::string(dyn::to_string(backend));
    j["ss_tol"] = sim.ss_tol;
    if (tip_scenario) j["tip_scenario"] = *tip_scenario;

    if (detunings.values)
        j["detunings"] = *detunings.values;
    else
        j["detunings"] = {{"min", detunings.min}, {"max", detunings.max}, {"n", detunings.n}};
    j["loop"] = {{"g_center", loop.spec.g_center},
                 {"delta_center", loop.spec.delta_center},
                 {"radius", loop.spec.radius},
                 {"n_steps", loop.spec.n_steps},
                 {"orientation", loop.spec.orientation == topo::Orientation::counterclockwise ? "counterclockwise"
                                                                                             : "clockwise"},
                 {"n_turns", loop.n_turns}};
    j["grid"] = {{"delta_min", grid.delta_min}, {"delta_max", grid.delta_max}, {"delta_n", grid.delta_n},
                 {"g_min", grid.g_min},         {"g_max", grid.g_max},         {"g_n", grid.g_n}};
    j["kappa_values"] = kappa_values;
    j["scaling"] = {{"perturbation", scaling.perturbation}, {"eps_values", scaling.eps_values}};
    j["spectrum_csv"] = spectrum_csv;
    j["fit_init"] = fit_init;
    j["field"] = {{"source", field.source}, {"path", field.path},       {"w", field.w},
                  {"half", field.half},     {"n", field.n},             {"wavelength", field.wavelength},
                  {"length", field.length}, {"w0", field.w0},           {"y_half", field.y_half},
                  {"nx", field.nx},         {"ny", field.ny}};
    json regions = json::array();
    for (const auto& r : g0.regions) regions.push_back({{"a_eff", r.a_eff}, {"n", std::sqrt(r.rel_permittivity)}});
    j["g0"] = {{"wavelength", g0.wavelength}, {"regions", regions}, {"w0", g0.w0}, {"d_ge", g0.d_ge}};
    return j;
}

ScenarioConfig parse_config(const std::string& text, std::string_view command) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        const auto [line, col] = line_column(text, e.byte);
        std::ostringstream msg;
        msg << "JSON syntax error at line " << line << ", column " << col;
        throw ConfigError("", msg.str());
    }

    ScenarioConfig c;
    Reader r(doc, "");
    r.number("omega_a", c.omega_a);
    r.number("omega_c", c.omega_c);
    r.number("gamma", c.gamma);
    r.number("kappa", c.kappa);
    r.number("g", c.g);
    r.number("epsilon", c.drive.epsilon);
    r.number("omega_p", c.drive.omega_p);
    r.count("n_fock", c.sim.n_fock);
    r.count("n_trajectories", c.sim.n_trajectories);
    r.number("dt", c.sim.dt);
    r.number("t_final", c.sim.t_final);
    r.seed("seed", c.sim.seed);
    r.number("ss_tol", c.sim.ss_tol);
    if (r.has("backend")) {
        std::string name;
        r.string("backend", name);
        try {
            c.backend = dyn::parse_backend(name);
        } catch (const InvalidInput&) {
            throw ConfigError("backend", "expected 'analytic', 'lindblad' or 'trajectory'");
        }
    }
    std::string tip;
    if (r.has("tip_scenario")) {
        r.string("tip_scenario", tip);
        c.tip_scenario = tip;
    }

    if (const json* v = r.take("detunings")) read_detunings(*v, "detunings", c.detunings);
    if (const json* v = r.take("loop")) {
        Reader l(*v, "loop");
        l.number("g_center", c.loop.spec.g_center);
        l.number("delta_center", c.loop.spec.delta_center);
        l.number("radius", c.loop.spec.radius);
        l.count("n_steps", c.loop.spec.n_steps);
        std::string orient = "counterclockwise";
        l.string("orientation", orient);
        c.loop.spec.orientation = parse_orientation(orient, "loop.orientation");
        l.count("n_turns", c.loop.n_turns);
        l.finish();
    }
    if (const json* v = r.take("grid")) {
        Reader gr(*v, "grid");
        gr.number("delta_min", c.grid.delta_min);
        gr.number("delta_max", c.grid.delta_max);
        gr.count("delta_n", c.grid.delta_n);
        gr.number("g_min", c.grid.g_min);
        gr.number("g_max", c.grid.g_max);
        gr.count("g_n", c.grid.g_n);
        gr.finish();
    }
    r.numbers("kappa_values", c.kappa_values);
    if (const json* v = r.take("scaling")) {
        Reader s(*v, "scaling");
        s.string("perturbation", c.scaling.perturbation);
        s.numbers("eps_values", c.scaling.eps_values);
        s.finish();
        if (c.scaling.perturbation != "coupling" && c.scaling.perturbation != "dissipation" &&
            c.scaling.perturbation != "both")
            throw ConfigError("scaling.perturbation", "expected 'coupling', 'dissipation' or 'both'");
    }
    r.string("spectrum_csv", c.spectrum_csv);
    if (const json* v = r.take("fit_init")) {
        if (!v->is_null() && !v->is_object()) throw ConfigError("fit_init", "expected an object");
        c.fit_init = *v;
    }
    if (const json* v = r.take("field")) {
        Reader f(*v, "field");
        f.string("source", c.field.source);
        f.string("path", c.field.path);
        f.number("w", c.field.w);
        f.number("half", c.field.half);
        f.count("n", c.field.n);
        f.number("wavelength", c.field.wavelength);
        f.number("length", c.field.length);
        f.number("w0", c.field.w0);
        f.number("y_half", c.field.y_half);
        f.count("nx", c.field.nx);
        f.count("ny", c.field.ny);
        f.finish();
        if (c.field.source != "csv" && c.field.source != "gaussian" && c.field.source != "cosine_gaussian")
            throw ConfigError("field.source", "expected 'csv', 'gaussian' or 'cosine_gaussian'");
    }
    if (const json* v = r.take("g0")) {
        Reader g(*v, "g0");
        g.number("wavelength", c.g0.wavelength);
        g.number("w0", c.g0.w0);
        g.number("d_ge", c.g0.d_ge);
        if (const json* regs = g.take("regions")) {
            if (!regs->is_array() || regs->empty()) throw ConfigError("g0.regions", "expected a non-empty array");
            c.g0.regions.clear();
            for (std::size_t i = 0; i < regs->size(); ++i) {
                const std::string path = "g0.regions[" + std::to_string(i) + "]";
                Reader reg((*regs)[i], path);
                double a = 0.0, n = 1.0;
                reg.number("a_eff", a);
                reg.number("n", n);
                reg.finish();
                c.g0.regions.push_back({a, n * n});
            }
        }
        g.finish();
    }
    r.finish();

    if (c.tip_scenario) {
        const TipFixture& t = find_tip(*c.tip_scenario);
        const double k = uses_fit_alias(command) ? t.kappa_fit : t.kappa_topology;
        if (c.kappa && *c.kappa != k) {
            std::ostringstream msg;
            msg << "tip_scenario " << t.label << " overrides kappa " << *c.kappa << " -> " << k;
            c.log.push_back(msg.str());
        }
        c.kappa = k;
        std::ostringstream src;
        src << "tip_scenario " << t.label << " (" << (uses_fit_alias(command) ? "fitting" : "topology")
            << " value " << k << ")";
        c.kappa_source = src.str();
    }

    if (c.sim.n_fock < 1) throw ConfigError("n_fock", "must be >= 1");
    if (c.sim.n_trajectories < 1) throw ConfigError("n_trajectories", "must be >= 1");
    if (c.sim.dt < 0.0) throw ConfigError("dt", "must be > 0 (or 0 for automatic)");
    if (c.sim.t_final < 0.0) throw ConfigError("t_final", "must be > 0 (or 0 for automatic)");
    if (!(c.sim.ss_tol > 0.0)) throw ConfigError("ss_tol", "must be > 0");
    if (c.drive.epsilon < 0.0) throw ConfigError("epsilon", "must be >= 0");
    if (!(c.gamma > 0.0)) throw ConfigError("gamma", "must be > 0");
    if (c.kappa && !(*c.kappa > 0.0)) throw ConfigError("kappa", "must be > 0");
    if (c.g < 0.0) throw ConfigError("g", "must be >= 0");
    return c;
}

ScenarioConfig load_config(const std::filesystem::path& path, std::string_view command) {
    std::ifstream in(path);
    if (!in) throw ConfigError("", "cannot open config file '" + path.string() + "'");
    std::stringstream buf;
    buf << in.rdbuf();
    try {
        return parse_config(buf.str(), command);
    } catch (const ConfigError& e) {
        throw ConfigError(e.field(), std::string(e.what()).substr(e.field().empty() ? 0 : e.field().size() + 2) +
                                         " (in " + path.string() + ")");
    }
}

}  // namespace epcav::cli
