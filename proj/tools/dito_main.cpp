#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "dito/commands.hpp"
#include "dito/io.hpp"

namespace {

// Loads the experiment file when given, otherwise the all-defaults
// experiment; --out overrides the configured output directory either way.
dito::ExperimentConfig load_config(const std::string& config_path,
                                   const std::string& out_override) {
    dito::ExperimentConfig cfg;
    if (!config_path.empty()) {
        cfg = dito::load_experiment_config(config_path);
    }
    if (!out_override.empty()) {
        cfg.output_dir = out_override;
    }
    return cfg;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"token-reduction experiments on a toy diffusion transformer"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_override;
    std::string variant_str = "dense";
    std::string schedule_str;
    std::size_t num_seeds = 16;
    std::string results_dir;

    CLI::App* calibrate = app.add_subcommand(
        "calibrate", "build the PMR table, max intervals, and schedule");
    calibrate->add_option("--config", config_path, "experiment config file");
    calibrate->add_option("--out", out_override, "output directory override");

    CLI::App* run = app.add_subcommand("run", "execute one pipeline variant");
    run->add_option("--config", config_path, "experiment config file");
    run->add_option("--variant", variant_str,
                    "dense | dito | input_baseline | output_oracle");
    run->add_option("--schedule", schedule_str, "schedule.csv for the dito variant");
    run->add_option("--out", out_override, "output directory override");

    CLI::App* compare = app.add_subcommand(
        "compare", "input-based vs output-based matching recovery errors");
    compare->add_option("--config", config_path, "experiment config file");
    compare->add_option("--seeds", num_seeds, "number of seeds (0..n-1)");
    compare->add_option("--out", out_override, "output directory override");

    CLI::App* report = app.add_subcommand("report", "aggregate result.json files");
    report->add_option("dir", results_dir, "directory to scan")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        if (*calibrate) {
            return dito::cmd_calibrate(load_config(config_path, out_override), std::cout,
                                       std::cerr);
        }
        if (*run) {
            std::optional<std::filesystem::path> schedule_path;
            if (!schedule_str.empty()) schedule_path = schedule_str;
            return dito::cmd_run(load_config(config_path, out_override),
                                 dito::parse_variant(variant_str), schedule_path,
                                 std::cout, std::cerr);
        }
        if (*compare) {
            return dito::cmd_compare(load_config(config_path, out_override), num_seeds,
                                     std::cout, std::cerr);
        }
        return dito::cmd_report(results_dir, std::cout, std::cerr);
    } catch (const dito::io_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
