#include "epcav/cli/io.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include "epcav/error.hpp"

namespace epcav::cli {

namespace {

std::string slurp(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InvalidInput("cannot open '" + path.string() + "'");
    std::stringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

std::vector<std::string> split(const std::string& line) {
    std::vector<std::string> out;
    std::string cell;
    std::istringstream in(line);
    while (std::getline(in, cell, ',')) out.push_back(cell);
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

std::string trim(std::string s) {
    const auto ws = [](char c) { return c == ' ' || c == '\t' || c == '\r'; };
    while (!s.empty() && ws(s.back())) s.pop_back();
    std::size_t i = 0;
    while (i < s.size() && ws(s[i])) ++i;
    return s.substr(i);
}

double to_double(const std::string& cell, std::size_t line) {
    const std::string t = trim(cell);
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (ec != std::errc() || ptr != t.data() + t.size() || t.empty())
        throw InvalidInput("line " + std::to_string(line) + ": '" + t + "' is not a number");
    return v;
}

// Non-empty lines, trimmed, paired with their 1-based line numbers.
std::vector<std::pair<std::size_t, std::string>> lines_of(const std::string& text) {
    std::vector<std::pair<std::size_t, std::string>> out;
    std::istringstream in(text);
    std::string line;
    std::size_t n = 0;
    while (std::getline(in, line)) {
        ++n;
        line = trim(line);
        if (!line.empty()) out.emplace_back(n, line);
    }
    return out;
}

}  // namespace

std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw ConfigError("out", "cannot write '" + path.string() + "'");
    out << text;
    if (!out) throw ConfigError("out", "write failed for '" + path.string() + "'");
}

void write_json(const std::filesystem::path& path, const json& j) { write_text(path, j.dump(2) + "\n"); }

std::string spectrum_csv(const dyn::Spectrum& s) {
    const bool with_error =
        std::any_of(s.points.begin(), s.points.end(), [](const dyn::SpectrumPoint& p) { return p.error.has_value(); });
    std::string out = with_error ? "delta_mhz,transmission,error\n" : "delta_mhz,transmission\n";
    for (const auto& p : s.points) {
        out += format_double(p.delta_pc) + "," + format_double(p.transmission);
        if (with_error) out += "," + format_double(p.error.value_or(0.0));
        out += "\n";
    }
    return out;
}

dyn::Spectrum parse_spectrum_csv(const std::string& text) {
    const auto lines = lines_of(text);
    if (lines.empty()) throw InvalidInput("spectrum CSV is empty");
    const auto header = split(lines[0].second);
    std::vector<std::string> names;
    for (const auto& h : header) names.push_back(trim(h));
    const bool with_error = names == std::vector<std::string>{"delta_mhz", "transmission", "error"};
    if (!with_error && names != std::vector<std::string>{"delta_mhz", "transmission"})
        throw InvalidInput("spectrum CSV: expected header 'delta_mhz,transmission[,error]'");

    dyn::Spectrum s;
    for (std::size_t i = 1; i < lines.size(); ++i) {
        const auto& [n, line] = lines[i];
        const auto cells = split(line);
        if (cells.size() != names.size())
            throw InvalidInput("line " + std::to_string(n) + ": expected " + std::to_string(names.size()) + " columns");
        dyn::SpectrumPoint p{to_double(cells[0], n), to_double(cells[1], n), {}};
        if (with_error) p.error = to_double(cells[2], n);
        s.points.push_back(p);
    }
    s.validate();
    return s;
}

dyn::Spectrum read_spectrum_csv(const std::filesystem::path& path) { return parse_spectrum_csv(slurp(path)); }

json fit_json(const fit::FitResult& r) {
    json params = json::object(), errors = json::object();
    for (std::size_t i = 0; i < r.params.size(); ++i) {
        params[r.names[i]] = r.params[i];
        if (i < r.errors.size()) errors[r.names[i]] = r.errors[i];
    }
    return {{"model", r.model},
            {"params", params},
            {"errors", errors},
            {"residual_norm", r.residual_norm},
            {"converged", r.converged},
            {"iterations", r.iterations}};
}

std::string braid_csv(const topo::BraidResult& b) {
    std::string out = "theta,re_e_plus,im_e_plus,re_e_minus,im_e_minus\n";
    for (std::size_t k = 0; k < b.theta.size(); ++k)
        out += format_double(b.theta[k]) + "," + format_double(b.strand_plus[k].real()) + "," +
               format_double(b.strand_plus[k].imag()) + "," + format_double(b.strand_minus[k].real()) + "," +
               format_double(b.strand_minus[k].imag()) + "\n";
    return out;
}

json classification_json(const topo::Classification& c, const json& crossings) {
    json j{{"class", std::string(topo::to_string(c.cls))}};
    if (c.winding) {
        // + 0.0 folds a negative zero into 0.
        j["w_plus"] = c.winding->w_plus + 0.0;
        j["w_minus"] = c.winding->w_minus + 0.0;
        j["w_total"] = c.winding->w_total + 0.0;
    } else {
        j["w_plus"] = nullptr;
        j["w_minus"] = nullptr;
        j["w_total"] = nullptr;
    }
    j["crossings"] = crossings;
    return j;
}

mode::ScalarField2D parse_field_csv(const std::string& text) {
    const auto lines = lines_of(text);
    if (lines.empty()) throw InvalidInput("field CSV is empty");
    std::vector<std::string> names;
    for (const auto& h : split(lines[0].second)) names.push_back(trim(h));
    if (names != std::vector<std::string>{"x_m", "y_m", "re_amp", "im_amp"})
        throw InvalidInput("field CSV: expected header 'x_m,y_m,re_amp,im_amp'");

    std::map<std::pair<double, double>, cplx> cells;
    std::vector<double> xs, ys;
    for (std::size_t i = 1; i < lines.size(); ++i) {
        const auto& [n, line] = lines[i];
        const auto c = split(line);
        if (c.size() != 4) throw InvalidInput("line " + std::to_string(n) + ": expected 4 columns");
        const double x = to_double(c[0], n), y = to_double(c[1], n);
        if (!cells.emplace(std::pair{x, y}, cplx(to_double(c[2], n), to_double(c[3], n))).second)
            throw InvalidInput("line " + std::to_string(n) + ": duplicate grid point");
        xs.push_back(x);
        ys.push_back(y);
    }
    std::sort(xs.begin(), xs.end());
    xs.erase(std::unique(xs.begin(), xs.end()), xs.end());
    std::sort(ys.begin(), ys.end());
    ys.erase(std::unique(ys.begin(), ys.end()), ys.end());
    if (xs.size() * ys.size() != cells.size())
        throw InvalidInput("field CSV: points do not form a rectangular grid (" + std::to_string(cells.size()) +
                           " points, " + std::to_string(xs.size()) + " x values, " + std::to_string(ys.size()) +
                           " y values)");

    mode::ScalarField2D f;
    f.x = xs;
    f.y = ys;
    f.amplitudes.reserve(cells.size());
    for (double y : ys)
        for (double x : xs) f.amplitudes.push_back(cells.at({x, y}));
    f.validate();
    return f;
}

mode::ScalarField2D read_field_csv(const std::filesystem::path& path) { return parse_field_csv(slurp(path)); }

std::string field_csv(const mode::ScalarField2D& f) {
    std::string out = "x_m,y_m,re_amp,im_amp\n";
    for (std::size_t iy = 0; iy < f.y.size(); ++iy)
        for (std::size_t ix = 0; ix < f.x.size(); ++ix) {
            const cplx a = f.at(ix, iy);
            out += format_double(f.x[ix]) + "," + format_double(f.y[iy]) + "," + format_double(a.real()) + "," +
                   format_double(a.imag()) + "\n";
        }
    return out;
}

}  // namespace epcav::cli
