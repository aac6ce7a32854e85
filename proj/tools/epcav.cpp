#include <cstdlib>
#include <iostream>

#include <CLI11.hpp>

#include "epcav/cli/run.hpp"
#include "epcav/error.hpp"

int main(int argc, char** argv) {
    namespace cli = epcav::cli;
    CLI::App app{"Atom-cavity non-Hermitian analysis toolkit"};
    app.set_version_flag("--version", std::string(cli::kVersion));
    app.require_subcommand(1, 1);

    cli::RunRequest req;
    std::string config, out = ".", backend;
    std::uint64_t seed = 0;
    std::size_t steps = 0;
    for (const auto& name : cli::commands()) {
        CLI::App* sub = app.add_subcommand(name);
        sub->add_option("--config", config, "Scenario JSON")->check(CLI::ExistingFile);
        sub->add_option("--out", out, "Output directory")->capture_default_str();
        sub->add_option("--backend", backend, "analytic | lindblad | trajectory")
            ->check(CLI::IsMember({"analytic", "lindblad", "trajectory"}));
        sub->add_option("--seed", seed, "Trajectory seed (overrides EPCAV_SEED and the config)");
        sub->add_option("--steps", steps, "Loop samples (overrides loop.n_steps)")->check(CLI::PositiveNumber);
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    CLI::App* sub = app.get_subcommands().front();
    req.command = sub->get_name();
    req.config = config;
    req.out = out;
    if (sub->count("--backend")) req.backend = backend;
    if (sub->count("--seed")) req.seed = seed;
    if (sub->count("--steps")) req.steps = steps;
    if (const char* env = std::getenv("EPCAV_SEED")) req.env_seed = env;

    try {
        const auto rep = cli::run(req);
        for (const auto& f : rep.outputs) std::cout << f.string() << "\n";
        for (const auto& line : rep.manifest["log"]) std::cerr << "note: " << line.get<std::string>() << "\n";
        return 0;
    } catch (const epcav::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return e.exit_code();
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
