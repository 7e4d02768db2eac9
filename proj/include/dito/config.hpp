#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "dito/pipeline.hpp"

namespace dito {

// Everything a command needs, parsed from one experiment file (format
// version 1: INI-style sections of key = value lines, '#' comments). Every
// field has a default, so the empty file is the default experiment; unknown
// sections or keys are rejected.
struct ExperimentConfig {
    ModelConfig model;                       // [model]
    double ratio = 0.25;                     // [tr]
    double penalty_lambda = 1.0;
    double tau = 0.9;
    std::size_t pmr_top_k = 5;
    Metric metric = Metric::cosine;
    ReduceMode mode = ReduceMode::prune;
    BipartitionStrategy partition;
    std::vector<std::uint64_t> calibration_seeds = {0, 1, 2, 3, 4, 5, 6, 7};  // [calibration]
    std::vector<std::size_t> deltas;         // empty = all of 0..T-1
    std::string output_dir = "out";          // [output]

    void validate() const;  // throws config_error

    // Intervals the calibration actually scans.
    std::vector<std::size_t> effective_deltas() const;
    // Runner view of this experiment; the latent seed is the first
    // calibration seed, so single runs live on the calibrated corpus.
    RunConfig run_config(Variant variant) const;
};

ExperimentConfig parse_experiment_config(const std::string& text);
ExperimentConfig load_experiment_config(const std::filesystem::path& path);

}  // namespace dito
