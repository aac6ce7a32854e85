#pragma once

// Command dispatch: resolves the scenario, runs one operation and writes its outputs plus manifest.json.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "epcav/cli/config.hpp"

namespace epcav::cli {

inline constexpr std::string_view kVersion = "0.1.0";

/// The twelve command names, in documentation order.
const std::vector<std::string>& commands();

struct RunRequest {
    std::string command;
    std::filesystem::path config;  // empty: all defaults
    std::filesystem::path out = ".";
    std::optional<std::string> backend;
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> steps;
    /// Raw value of EPCAV_SEED; the --seed flag takes precedence, the config file comes last.
    std::optional<std::string> env_seed;
};

struct RunReport {
    std::vector<std::filesystem::path> outputs;  // manifest.json last
    json manifest;
};

/// Throws epcav::Error subclasses; the caller maps them to exit statuses via exit_code().
RunReport run(const RunRequest& req);

/// Parses a decimal u64; throws ConfigError(field) otherwise.
std::uint64_t parse_seed(const std::string& text, const std::string& field);

}  // namespace epcav::cli
