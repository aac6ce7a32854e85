#pragma once

// Scenario configuration: strict JSON ingestion, tip-position fixtures and the resolved record.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "epcav/dynamics.hpp"
#include "epcav/modegeom.hpp"
#include "epcav/nonhermitian.hpp"
#include "epcav/specfit.hpp"
#include "epcav/topology.hpp"

namespace epcav::cli {

using json = nlohmann::json;

struct TipFixture {
    std::string_view label;
    double height_um;
    double kappa_fit;       // value used by fitting workflows
    double kappa_topology;  // value used by eigenvalue / topology workflows
};

/// Nanotip positions and the cavity decay rate each one produces (2 pi MHz).
std::span<const TipFixture> tip_fixtures() noexcept;
const TipFixture& find_tip(std::string_view label);

/// Commands that read the fitting alias of a tip fixture; all others use the topology alias.
bool uses_fit_alias(std::string_view command) noexcept;

struct DetuningGrid {
    std::optional<std::vector<double>> values;
    double min = 0.0;
    double max = 0.0;
    std::size_t n = 0;  // 0: derive from kappa and g

    std::vector<double> expand(const nh::SystemParams& p) const;
};

struct SurfaceGrid {
    double delta_min = -50.0;
    double delta_max = 50.0;
    std::size_t delta_n = 41;
    double g_min = 100.0;
    double g_max = 140.0;
    std::size_t g_n = 21;
};

struct LoopConfig {
    topo::LoopSpec spec{121.5, 0.0, 56.5, 256, topo::Orientation::counterclockwise};
    std::size_t n_turns = 2;
};

struct ScalingConfig {
    std::string perturbation = "both";  // coupling | dissipation | both
    std::vector<double> eps_values;      // empty: 11 log-spaced values over [1e-4, 1e-2] gamma
};

struct FieldConfig {
    std::string source = "cosine_gaussian";  // csv | gaussian | cosine_gaussian
    std::string path;
    double w = 1.0;
    double half = 6.0;
    std::size_t n = 401;
    double wavelength = 780e-9;
    double length = 10.15e-6;
    double w0 = 1.70e-6;
    double y_half = 6.0 * 1.70e-6;
    std::size_t nx = 4001;
    std::size_t ny = 401;
};

struct G0Config {
    double wavelength = 780e-9;
    std::vector<mode::ModeRegion> regions{{2.09e-11, 1.0}, {2.00e-12, 1.4550 * 1.4550}, {1.24e-12, 2.0411 * 2.0411}};
    double w0 = 1.70e-6;
    double d_ge = 3.584e-29 / 1.4142135623730951;
};

struct ScenarioConfig {
    double omega_a = 0.0;
    double omega_c = 0.0;
    double gamma = 3.03;
    std::optional<double> kappa;
    double g = 0.0;
    dyn::DriveParams drive{};
    dyn::SimConfig sim{};
    dyn::Backend backend = dyn::Backend::analytic;
    std::optional<std::string> tip_scenario;
    std::string kappa_source = "config";

    DetuningGrid detunings;
    LoopConfig loop;
    SurfaceGrid grid;
    std::vector<double> kappa_values{12.7, 13.5, 133.0, 246.0};
    ScalingConfig scaling;
    std::string spectrum_csv;
    json fit_init;  // null or an object of initial values
    FieldConfig field;
    G0Config g0;

    /// Notes about precedence decisions taken while resolving (e.g. tip fixture overrides).
    std::vector<std::string> log;

    /// Throws ConfigError("kappa") when no decay rate is available.
    nh::SystemParams system() const;
    /// Every field with its effective value; feeding it back to parse_config reproduces this config.
    json resolved() const;
};

/// Strict parse: unknown keys and wrongly typed values are rejected with their path, syntax
/// errors with line and column. `command` selects the tip-fixture alias.
ScenarioConfig parse_config(const std::string& text, std::string_view command = "");
ScenarioConfig load_config(const std::filesystem::path& path, std::string_view command = "");

}  // namespace epcav::cli
