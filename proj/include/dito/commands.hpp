#pragma once

#include <filesystem>
#include <optional>
#include <ostream>

#include "dito/config.hpp"
#include "dito/pipeline.hpp"

namespace dito {

// Command bodies behind the CLI. Each returns the process exit code: 0 on
// success, 1 for user/config errors, 2 for environment errors (unreadable or
// unwritable files). Progress goes to `out`, diagnostics to `err`.

// Dense calibration runs over the seed corpus -> pmr.csv, delta_max.csv,
// schedule.csv in the output directory.
int cmd_calibrate(const ExperimentConfig& cfg, std::ostream& out, std::ostream& err);

// One pipeline run -> result.json and heatmap.csv. The dito variant requires
// a schedule file produced by calibrate (or hand-written in the same format).
int cmd_run(const ExperimentConfig& cfg, Variant variant,
            const std::optional<std::filesystem::path>& schedule_path, std::ostream& out,
            std::ostream& err);

// Input-based vs output-based matching on seeds 0..num_seeds-1 ->
// scatter.csv and summary.json.
int cmd_compare(const ExperimentConfig& cfg, std::size_t num_seeds, std::ostream& out,
                std::ostream& err);

// Aggregates every result.json found under results_dir (recursively) into
// report.json there, and prints a per-variant comparison table.
int cmd_report(const std::filesystem::path& results_dir, std::ostream& out,
               std::ostream& err);

}  // namespace dito
