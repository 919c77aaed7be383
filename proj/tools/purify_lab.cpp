#include <iostream>
#include <string>
#include <utility>

#include <CLI11.hpp>

#include "purify/config.hpp"
#include "purify/experiments.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Diffusion purification laboratory on Gaussian-mixture data"};
    app.require_subcommand(1);

    std::string config_path, out_path;
    std::uint64_t seed = 0;
    bool strict = false;

    using K = purify::ExperimentKind;
    const std::pair<K, const char*> commands[] = {
        {K::LambdaSweep, "standard/robust accuracy over the reverse-noise mix lambda"},
        {K::TimeSweep, "accuracy over the purification time t* for VP and VE"},
        {K::SolverCompare, "Euler-Maruyama vs Heun over step counts"},
        {K::TheoryReport, "interaction times and their log-log slopes"},
        {K::AttackEval, "PGD, SPSA or BPDA+EOT over a budget sweep"},
        {K::StepInsensitivity, "accuracy over total diffusion step budgets"},
    };
    for (const auto& [kind, help] : commands) {
        auto* sub = app.add_subcommand(std::string(purify::to_string(kind)), help);
        sub->add_option("--config", config_path, "key-value config file");
        sub->add_option("--seed", seed, "global seed (overrides the config)");
        sub->add_option("--out", out_path, "output CSV path (overrides the config)");
        sub->add_flag("--strict", strict, "reject unknown config keys and fail on soft checks");
    }
    CLI11_PARSE(app, argc, argv);

    try {
        const auto* sub = app.get_subcommands().front();
        purify::ExperimentConfig cfg;
        if (!config_path.empty()) {
            auto parsed = purify::load_config(config_path, strict);
            for (const auto& w : parsed.warnings) std::cerr << "warning: " << w << '\n';
            cfg = parsed.config;
        }
        cfg.experiment = purify::parse_experiment_kind(sub->get_name());
        if (sub->count("--seed")) cfg.global_seed = seed;
        if (!out_path.empty()) cfg.output_path = out_path;
        cfg.validate();

        std::cerr << "# effective config\n" << purify::serialize_config(cfg);
        const auto out = purify::run_experiment(cfg);
        purify::write_outputs(cfg, out);

        for (const auto& [k, v] : out.summary) std::cout << k << " = " << v << '\n';
        std::cout << out.text_summary;
        for (const auto& s : out.soft_failures) std::cout << "soft check failed: " << s << '\n';
        std::cout << "wrote " << cfg.output_path << '\n';
        if (strict && !out.soft_failures.empty()) return 3;
    } catch (const purify::ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
