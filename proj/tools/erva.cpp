// erva: run frequency-response, passive, MPC and preview-comparison experiments.
//
//   erva freqresp|passive|mpc|compare [--config <file>] [--set k=v]... [--out <dir>] [--seed <n>]
//
// Exit codes: 0 success, 2 configuration error, 3 runtime error.

#include <CLI11.hpp>

#include <cstdio>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "erva/errors.hpp"
#include "erva/experiment.hpp"

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitRuntime = 3;

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Energy-regenerative vibration absorber experiments"};
    app.require_subcommand(1, 1);

    std::string config_path;
    std::vector<std::string> overrides;
    std::string out_dir;
    std::optional<std::uint64_t> seed;
    bool dump = false;

    for (const char* name : {"freqresp", "passive", "mpc", "compare"}) {
        auto* sub = app.add_subcommand(name, std::string("run the ") + name + " experiment");
        sub->add_option("--config", config_path, "configuration file (section/key = value)");
        sub->add_option("--set", overrides, "override a key, e.g. --set mpc.alpha1=1")
            ->allow_extra_args(false);
        sub->add_option("--out", out_dir, "output directory");
        sub->add_option("--seed", seed, "road noise seed");
        sub->add_flag("--dump-config", dump, "print the effective configuration and exit");
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitConfig;
    }

    const std::string kind_name = app.get_subcommands().front()->get_name();
    erva::ExperimentConfig cfg;
    try {
        cfg = erva::load_config(config_path.empty() ? std::nullopt
                                                    : std::optional<std::string>(config_path),
                                overrides);
        cfg.kind = *erva::parse_experiment_kind(kind_name);
        if (!out_dir.empty()) cfg.output_dir = out_dir;
        if (seed) cfg.road.seed = *seed;
        if (dump) {
            std::cout << erva::dump_config(cfg);
            return 0;
        }
        const auto violations = erva::validate_config(cfg);
        if (!violations.empty()) {
            for (const auto& v : violations) {
                std::cerr << "config error: " << v.key << " = " << v.value << ": " << v.constraint
                          << "\n";
            }
            return kExitConfig;
        }
    } catch (const erva::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const erva::IoError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    }

    try {
        const auto summary = erva::run_experiment(cfg);
        std::cout << erva::format_summary(summary);
        std::cout << "artifacts written to " << cfg.output_dir << "\n";
    } catch (const erva::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << kind_name << " failed: " << e.what() << "\n";
        return kExitRuntime;
    }
    return 0;
}
