#pragma once

// CSV and JSON emission / ingestion for the command-line front end.

#include <filesystem>
#include <string>

#include <json.hpp>

#include "epcav/dynamics.hpp"
#include "epcav/modegeom.hpp"
#include "epcav/specfit.hpp"
#include "epcav/topology.hpp"

namespace epcav::cli {

using json = nlohmann::json;

/// Round-trip decimal form ("%.17g").
std::string format_double(double v);

void write_text(const std::filesystem::path& path, const std::string& text);
void write_json(const std::filesystem::path& path, const json& j);

/// Header `delta_mhz,transmission[,error]`.
std::string spectrum_csv(const dyn::Spectrum& s);
/// Throws InvalidInput naming the line for malformed input.
dyn::Spectrum parse_spectrum_csv(const std::string& text);
dyn::Spectrum read_spectrum_csv(const std::filesystem::path& path);

/// {model, params, errors, residual_norm, converged, iterations}; params and errors keyed by name.
json fit_json(const fit::FitResult& r);

/// Header `theta,re_e_plus,im_e_plus,re_e_minus,im_e_minus`.
std::string braid_csv(const topo::BraidResult& b);

/// {class, w_plus, w_minus, w_total, crossings}; winding entries are null when ill-defined.
json classification_json(const topo::Classification& c, const json& crossings);

/// Header `x_m,y_m,re_amp,im_amp`. Rows may come in any order but must cover a rectangular grid
/// exactly once.
mode::ScalarField2D parse_field_csv(const std::string& text);
mode::ScalarField2D read_field_csv(const std::filesystem::path& path);
std::string field_csv(const mode::ScalarField2D& f);

}  // namespace epcav::cli
