#include <cstdint>
#include <cstdio>
#include <exception>
#include <string>

#include <CLI11.hpp>

#include "motgnn/cli.hpp"
#include "motgnn/config.hpp"
#include "motgnn/error.hpp"

namespace {

motgnn::RunConfig resolve_config(const std::string& path) {
    if (path.empty()) return motgnn::RunConfig{};
    return motgnn::load_config(path);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Multi-omics classification with tree-derived feature graphs"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_dir = ".";
    std::uint64_t seed = 0;
    int jobs = 1;
    std::size_t top_k = 30;
    std::string which;
    std::string checkpoint_path;

    app.add_option("--config", config_path, "key=value config file; defaults apply without it")
        ->capture_default_str();
    app.add_option("--out", out_dir, "output directory")->capture_default_str();
    app.add_option("--seed", seed, "dataset seed")->capture_default_str();

    CLI::App* synth = app.add_subcommand("synth", "write a synthetic dataset as CSV files");
    CLI::App* experiment =
        app.add_subcommand("experiment", "run the repeated pipeline and write report.json");
    experiment->add_option("--jobs", jobs, "worker threads for the repeats")
        ->capture_default_str()
        ->check(CLI::PositiveNumber);
    CLI::App* baseline = app.add_subcommand("baseline", "run one baseline on the same splits");
    baseline->add_option("which", which, "gbt or dfn")->required();
    CLI::App* explain =
        app.add_subcommand("explain", "recompute rankings and graph importance from a checkpoint");
    explain->add_option("checkpoint", checkpoint_path, "checkpoint.json path")->required();
    explain->add_option("--top-k", top_k, "features listed per modality")->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    try {
        if (synth->parsed()) {
            motgnn::cmd_synth(resolve_config(config_path), seed, out_dir);
        } else if (experiment->parsed()) {
            motgnn::cmd_experiment(resolve_config(config_path), seed, jobs, out_dir);
        } else if (baseline->parsed()) {
            motgnn::cmd_baseline(resolve_config(config_path), which, seed, out_dir);
        } else if (explain->parsed()) {
            motgnn::cmd_explain(checkpoint_path, top_k, out_dir);
        }
    } catch (const motgnn::Error& e) {
        std::fprintf(stderr, "motgnn: error: %s\n", e.what());
        return 1;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "motgnn: error: %s\n", e.what());
        return 1;
    }
    return 0;
}
