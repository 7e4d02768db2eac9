#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "dito/matching.hpp"
#include "dito/model.hpp"
#include "dito/penalty.hpp"
#include "dito/pmr.hpp"
#include "dito/reduce.hpp"
#include "dito/scheduler.hpp"

namespace dito {

enum class Variant { dense, dito, input_baseline, output_oracle };

std::string variant_name(Variant v);
Variant parse_variant(const std::string& name);  // throws config_error

struct RunConfig {
    ModelConfig model;
    double ratio = 0.25;
    double penalty_lambda = 1.0;
    double tau = 0.9;
    std::size_t pmr_top_k = 5;
    Metric metric = Metric::cosine;
    ReduceMode mode = ReduceMode::prune;
    BipartitionStrategy partition;
    Variant variant = Variant::dense;
    std::uint64_t latent_seed = 0;

    void validate() const;  // throws config_error
    bool operator==(const RunConfig& other) const = default;
};

struct FlopsReport {
    std::vector<FlopsEntry> entries;
    std::uint64_t attention_total = 0;
    std::uint64_t matching_total = 0;
    std::uint64_t metadata_bytes = 0;
};

struct RecoveryRecord {
    std::size_t step = 0;
    std::size_t block = 0;
    double error = 0.0;

    bool operator==(const RecoveryRecord& other) const = default;
};

struct RunResult {
    Variant variant = Variant::dense;
    RunConfig config;
    Matrix final_latent;
    // One record per (reduce step, block); dense and match steps log nothing.
    std::vector<RecoveryRecord> recovery_errors;
    FlopsReport flops;
    SelectionHistory history;
    Schedule schedule;
};

// Test hook: every pair set a run forms or consumes, in execution order.
// matched_on holds the features the pair set was computed from at formation
// sites and stays empty where a stored set was merely reused.
struct MatchTrace {
    struct Entry {
        std::size_t step = 0;
        std::size_t block = 0;
        std::vector<std::uint32_t> pairs;
        Matrix matched_on;
    };
    std::vector<Entry> entries;
};

// Number of sources a pair set will hold under this config.
std::size_t pair_count(const RunConfig& cfg);

RunResult run_dense_variant(const RunConfig& cfg);

// The reuse pipeline: match steps run dense and store per-block pair sets from
// their own outputs (penalized before top-k); reduce steps shrink the block
// input with the stored set, attend on fewer tokens, and copy-recover; full
// steps run dense with no bookkeeping. Recovery errors are logged against a
// dense reference run with the same seed (computed here when not supplied).
RunResult run_dito(const RunConfig& cfg, const Schedule& schedule,
                   const Trajectory* dense_ref = nullptr, MatchTrace* trace = nullptr);

// Input-similarity reference: every step re-matches on the block input and
// reduces, with no reuse and no penalty.
RunResult run_input_baseline(const RunConfig& cfg, const Trajectory* dense_ref = nullptr,
                             MatchTrace* trace = nullptr);

// Measurement arm: dense activations propagate; per (step, block) a pair set
// built from the dense output is applied to that same output purely to log
// what copy-recovery would lose. With neg_l2 and prune this loss is the
// analytic minimum over all matchings.
RunResult run_output_oracle(const RunConfig& cfg, MatchTrace* trace = nullptr);

// Dispatch by cfg.variant; schedule is required for the dito variant.
RunResult run_variant(const RunConfig& cfg, const Schedule* schedule = nullptr);

struct ScatterRecord {
    std::uint64_t seed = 0;
    std::size_t step = 0;
    std::size_t block = 0;
    double e_in = 0.0;
    double e_out = 0.0;

    bool operator==(const ScatterRecord& other) const = default;
};

struct CompareResult {
    std::vector<ScatterRecord> records;
    double below_or_on_fraction = 0.0;    // e_out <= e_in + 1e-9
    double strictly_below_fraction = 0.0;  // e_out < e_in
    double mean_e_in = 0.0;
    double mean_e_out = 0.0;
};

// Input-based vs output-based matching measured on identical dense outputs:
// for every (seed, step, block), both pair sets are applied to the same dense
// Y and their copy-recovery losses recorded.
CompareResult compare_recovery(const RunConfig& cfg, const std::vector<std::uint64_t>& seeds);

}  // namespace dito
