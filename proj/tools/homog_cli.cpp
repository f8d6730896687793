#include "homog/pipeline.hpp"

#include <CLI11.hpp>

#include <iostream>

namespace {

constexpr int kValidation = 2, kSolver = 3;

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Interface homogenization experiments"};
    app.require_subcommand(1, 1);
    std::string config_path, out_dir = "out";
    std::optional<std::uint64_t> seed;
    std::optional<double> tol;
    bool no_cache = false, quiet = false;
    app.add_option("--config", config_path, "experiment config (TOML)")->required();
    app.add_option("--out", out_dir, "output directory")->capture_default_str();
    app.add_option("--seed", seed, "override the config seed");
    app.add_option("--tol", tol, "override every solver tolerance");
    app.add_flag("--no-cache", no_cache, "recompute cached stages");
    app.add_flag("-q,--quiet", quiet, "no progress output");
    for (const auto& s : homog::stage_names()) app.add_subcommand(s, "run the " + s + " stage")->fallthrough();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : kValidation;
    }
    const std::string stage = app.get_subcommands().front()->get_name();

    try {
        homog::ExperimentConfig cfg = homog::load_config(config_path);
        if (seed) cfg.seed = *seed;
        if (tol) cfg.cell_tol = cfg.corrector_tol = cfg.step_tol = *tol;
        homog::validate_config(cfg);
        homog::Pipeline p(cfg, {out_dir, !no_cache, quiet ? nullptr : &std::cerr});
        p.run(stage);
        if (stage != "report") p.report();
        if (!quiet) std::cerr << "[homog] wrote " << out_dir << "/" << (stage == "report" ? "report.json" : stage + ".json") << "\n";
        return 0;
    } catch (const homog::ConfigError& e) {
        std::cerr << e.what() << "\n";
        return kValidation;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kSolver;
    }
}
