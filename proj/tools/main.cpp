#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "cataq/config.hpp"
#include "cataq/report.hpp"

int main(int argc, char** argv) {
    CLI::App app{
        "Transient and Laplace-domain analysis of infinite-server queues "
        "with catastrophes, validated against a built-in simulator"};

    cataq::RunManifest manifest;
    manifest.out_dir = "out";
    double tol = 0.0;
    std::uint64_t seed = 0;
    std::size_t replications = 0;

    app.add_option("--config", manifest.config_path, "model/run config (JSON)")
        ->required()
        ->check(CLI::ExistingFile);
    app.add_option("--command", manifest.command,
                   "what to run: transient, busy, simulate or compare")
        ->required()
        ->check(CLI::IsMember({"transient", "busy", "simulate", "compare"}));
    app.add_option("--out", manifest.out_dir, "output directory for CSV tables");
    auto* tol_opt = app.add_option("--tol", tol, "tolerance override");
    auto* seed_opt = app.add_option("--seed", seed, "simulation seed override");
    auto* rep_opt = app.add_option("--replications", replications,
                                   "replication count override");

    CLI11_PARSE(app, argc, argv);

    if (*tol_opt) manifest.tol = tol;
    if (*seed_opt) manifest.seed = seed;
    if (*rep_opt) manifest.replications = replications;

    try {
        std::ifstream in(manifest.config_path);
        std::stringstream buffer;
        buffer << in.rdbuf();
        cataq::RunConfig config = cataq::parse_config(buffer.str());
        return cataq::run_command(config, manifest);
    } catch (const cataq::ConfigError& e) {
        std::cerr << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}
