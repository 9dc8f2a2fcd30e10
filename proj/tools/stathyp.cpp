#include <iostream>

#include "CLI11.hpp"
#include "stathyp/cli.hpp"

namespace cli = stathyp::cli;

int main(int argc, char** argv) {
    CLI::App app{"Monte Carlo laboratory for statistical hyperbolicity of harmonic measure"};
    std::string experiment, config_path, out_dir;
    std::uint64_t seed = 0;
    unsigned threads = 0;
    app.add_option("experiment", experiment, "experiment name, or 'validate' to check a config only")->required();
    app.add_option("--config", config_path, "config JSON file")->required();
    auto* seed_opt = app.add_option("--seed", seed, "master seed (overrides the config)");
    auto* threads_opt = app.add_option("--threads", threads, "worker threads (overrides THREADS)");
    auto* out_opt = app.add_option("--out", out_dir, "output directory (overrides the config)");
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : cli::kInvalidConfig;
    }

    const bool validate_only = experiment == "validate";
    if (!validate_only &&
        std::find(cli::kExperiments.begin(), cli::kExperiments.end(), experiment) == cli::kExperiments.end()) {
        std::cerr << "unknown experiment '" << experiment << "' (valid: " << cli::experiment_list() << ", validate)\n";
        return cli::kInvalidConfig;
    }

    std::vector<std::string> diags;
    if (!std::filesystem::is_regular_file(config_path)) {
        std::cerr << config_path << ": cannot read config file\n";
        return cli::kIoError;
    }
    const auto doc = cli::load_json(config_path, diags);
    if (!doc) {
        for (const auto& d : diags) std::cerr << d << "\n";
        return cli::kInvalidConfig;
    }
    cli::Overrides ov;
    if (*seed_opt) ov.seed = seed;
    if (*out_opt) ov.output_dir = out_dir;
    const auto cfg = cli::parse_config(*doc, validate_only ? "" : experiment, ov, diags);
    for (const auto& d : diags) std::cerr << d << "\n";
    if (!cfg) return cli::kInvalidConfig;
    if (validate_only) {
        std::cout << "valid " << cfg->experiment << " config\n";
        return cli::kOk;
    }
    const auto t = cli::resolve_threads(*threads_opt ? std::optional<unsigned>(threads) : std::nullopt);
    return cli::run(*cfg, t, std::cout, std::cerr);
}
