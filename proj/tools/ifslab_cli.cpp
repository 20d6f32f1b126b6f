#include <cstdint>
#include <cstdio>
#include <string>

#include "CLI11.hpp"
#include "ifslab/manifest.hpp"
#include "ifslab/runner.hpp"

int main(int argc, char** argv) {
    CLI::App app{"ifslab: simulation and statistical checks for perturbed IFS Markov chains"};

    std::string config_path, out_dir, command;
    std::uint64_t seed = 0;
    int threads = -1;
    bool have_seed = false;

    app.add_option("--config", config_path, "flat key = value config file");
    app.add_option("--seed", seed, "master seed (overrides config)")
        ->each([&](const std::string&) { have_seed = true; });
    app.add_option("--out", out_dir, "output directory (overrides config)");
    app.add_option("--command", command, "pipeline to run (overrides config)");
    app.add_option("--threads", threads, "worker threads, 0 = auto (overrides config)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return ifslab::kExitInvalidConfig;
    }

    ifslab::ExperimentConfig cfg;
    try {
        if (!config_path.empty())
            cfg = ifslab::ExperimentConfig::parse(ifslab::read_text_file(config_path));
        if (have_seed) cfg.master_seed = seed;
        if (!out_dir.empty()) cfg.out_dir = out_dir;
        if (!command.empty()) cfg.command = command;
        if (threads >= 0) cfg.threads = threads;
        // Re-validate after flag overrides.
        cfg = ifslab::ExperimentConfig::parse(cfg.serialize());
    } catch (const std::exception& e) {
        std::fprintf(stderr, "invalid config: %s\n", e.what());
        return ifslab::kExitInvalidConfig;
    }

    try {
        return ifslab::run(cfg);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "run failed: %s\n", e.what());
        return 1;
    }
}
