#pragma once

#include <cstdint>
#include <vector>

#include "dito/flops.hpp"
#include "dito/linalg.hpp"

namespace dito {

// Desk-scale attention-only denoising surrogate. Tokens live on a square grid
// (num_tokens is a perfect square); each step runs num_blocks attention blocks
// with residual connections, then blends the result into the latent at rate
// step_size. Small step_size keeps adjacent steps strongly correlated, which
// is the temporal-consistency regime the reuse machinery relies on.
struct ModelConfig {
    std::size_t num_tokens = 256;
    std::size_t hidden_dim = 32;
    std::size_t num_blocks = 4;
    std::size_t num_steps = 24;
    double step_size = 0.1;
    std::uint64_t weight_seed = 1;

    void validate() const;  // throws config_error
    std::size_t grid_side() const;

    bool operator==(const ModelConfig& other) const = default;
};

struct BlockParams {
    Matrix w_q;
    Matrix w_k;
    Matrix w_v;
};

struct ModelParams {
    std::vector<BlockParams> blocks;
};

struct FlopsEntry {
    std::size_t step = 0;
    std::size_t block = 0;
    std::size_t tokens = 0;
    std::uint64_t attention_flops = 0;
    std::uint64_t matching_flops = 0;
};

// Recorded activations of one full run: block inputs X[t][b], block outputs
// Y[t][b], the latent before/after each step, and a per-call FLOPs ledger.
struct Trajectory {
    ModelConfig config;
    std::vector<std::vector<Matrix>> block_input;
    std::vector<std::vector<Matrix>> block_output;
    std::vector<Matrix> latent_before;
    std::vector<Matrix> latent_after;
    std::vector<FlopsEntry> flops;

    std::uint64_t total_attention_flops() const;
};

// Seeded weights, uniform in [-1, 1) scaled by 1/sqrt(hidden_dim). Identical
// config gives bit-identical params.
ModelParams init_model(const ModelConfig& config);

// Seeded starting latent, uniform in [-2, 2). The seed is separate from
// weight_seed so one model can be run on many starting points.
Matrix initial_latent(const ModelConfig& config, std::uint64_t seed);

// softmax(Q K^T / sqrt(d)) V. Accepts any row count, so reduced token sets
// run through the same code path.
Matrix attention_block(const Matrix& x, const BlockParams& params);

struct StepRecord {
    std::vector<Matrix> block_input;
    std::vector<Matrix> block_output;
};

Matrix forward_step(const Matrix& latent, const ModelParams& model,
                    const ModelConfig& config, StepRecord* record = nullptr);

Trajectory run_dense(const ModelConfig& config, const ModelParams& params,
                     std::uint64_t latent_seed);
Trajectory run_dense(const ModelConfig& config, std::uint64_t latent_seed);

// Elementwise helpers shared by every execution path, so reduced and dense
// loops perform identical arithmetic where they coincide.
Matrix add_rows(const Matrix& a, const Matrix& b);
Matrix convex_blend(const Matrix& previous, const Matrix& updated, double rate);

}  // namespace dito
