#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "dito/model.hpp"
#include "test_util.hpp"

using namespace dito;
using namespace dito::test;

namespace {

ModelConfig tiny_config() {
    ModelConfig cfg;
    cfg.num_tokens = 16;
    cfg.hidden_dim = 4;
    cfg.num_blocks = 2;
    cfg.num_steps = 6;
    return cfg;
}

// Mean over steps of |L[t+1] - L[t]|_F / |L[t]|_F: how fast the latent moves.
double mean_relative_change(const Trajectory& traj) {
    double acc = 0.0;
    std::size_t count = 0;
    for (std::size_t t = 0; t + 1 < traj.latent_after.size(); ++t) {
        const Matrix& a = traj.latent_after[t];
        const Matrix& b = traj.latent_after[t + 1];
        double diff = 0.0;
        double norm = 0.0;
        for (std::size_t i = 0; i < a.data.size(); ++i) {
            diff += (b.data[i] - a.data[i]) * (b.data[i] - a.data[i]);
            norm += a.data[i] * a.data[i];
        }
        acc += std::sqrt(diff) / std::sqrt(norm);
        ++count;
    }
    return acc / static_cast<double>(count);
}

}  // namespace

TEST_CASE("config validation rejects out-of-range fields") {
    CHECK_NOTHROW(ModelConfig{}.validate());
    ModelConfig cfg;
    cfg.num_tokens = 8;  // not a perfect square
    CHECK_THROWS_AS(cfg.validate(), config_error);
    cfg = ModelConfig{};
    cfg.num_tokens = 1;
    CHECK_THROWS_AS(cfg.validate(), config_error);
    cfg = ModelConfig{};
    cfg.hidden_dim = 1;
    CHECK_THROWS_AS(cfg.validate(), config_error);
    cfg = ModelConfig{};
    cfg.num_blocks = 0;
    CHECK_THROWS_AS(cfg.validate(), config_error);
    cfg = ModelConfig{};
    cfg.num_steps = 1;
    CHECK_THROWS_AS(cfg.validate(), config_error);
    cfg = ModelConfig{};
    cfg.step_size = 0.0;  // frozen latent is legal
    CHECK_NOTHROW(cfg.validate());
    cfg.step_size = 1.5;
    CHECK_THROWS_AS(cfg.validate(), config_error);
    cfg.step_size = -0.1;
    CHECK_THROWS_AS(cfg.validate(), config_error);
    CHECK(ModelConfig{}.grid_side() == 16);
}

TEST_CASE("init_model: same seed gives identical weights, different seed differs") {
    const ModelConfig cfg = tiny_config();
    const ModelParams a = init_model(cfg);
    const ModelParams b = init_model(cfg);
    REQUIRE(a.blocks.size() == cfg.num_blocks);
    for (std::size_t i = 0; i < a.blocks.size(); ++i) {
        CHECK(a.blocks[i].w_q == b.blocks[i].w_q);
        CHECK(a.blocks[i].w_k == b.blocks[i].w_k);
        CHECK(a.blocks[i].w_v == b.blocks[i].w_v);
    }
    ModelConfig other = cfg;
    other.weight_seed = 99;
    CHECK(init_model(other).blocks[0].w_q != a.blocks[0].w_q);
}

TEST_CASE("init_model: weight shape and scale") {
    ModelConfig cfg = tiny_config();
    cfg.hidden_dim = 2;
    cfg.num_blocks = 1;
    const ModelParams p = init_model(cfg);
    const double bound = 1.0 / std::sqrt(2.0);
    for (const Matrix* w : {&p.blocks[0].w_q, &p.blocks[0].w_k, &p.blocks[0].w_v}) {
        CHECK(w->rows == 2);
        CHECK(w->cols == 2);
        for (const double v : w->data) {
            CHECK(v >= -bound);
            CHECK(v < bound);
        }
    }
}

TEST_CASE("initial_latent: seeded, in range, seed-sensitive") {
    const ModelConfig cfg = tiny_config();
    const Matrix a = initial_latent(cfg, 3);
    CHECK(a == initial_latent(cfg, 3));
    CHECK(a != initial_latent(cfg, 4));
    CHECK(a.rows == cfg.num_tokens);
    CHECK(a.cols == cfg.hidden_dim);
    for (const double v : a.data) {
        CHECK(v >= -2.0);
        CHECK(v < 2.0);
    }
}

TEST_CASE("attention_block: a single token reduces to its value projection") {
    // With one row the softmax weight is exactly 1, so the output must be the
    // value projection bit-for-bit.
    std::mt19937_64 gen(31);
    const ModelConfig cfg = tiny_config();
    const ModelParams p = init_model(cfg);
    const Matrix x = random_matrix(1, cfg.hidden_dim, gen);
    CHECK(attention_block(x, p.blocks[0]) == matmul(x, p.blocks[0].w_v));
}

TEST_CASE("attention_block: multiple tokens genuinely mix") {
    std::mt19937_64 gen(37);
    const ModelConfig cfg = tiny_config();
    const ModelParams p = init_model(cfg);
    const Matrix x = random_matrix(6, cfg.hidden_dim, gen);
    CHECK(attention_block(x, p.blocks[0]) != matmul(x, p.blocks[0].w_v));
}

TEST_CASE("attention_block: zero input maps to zero output") {
    const ModelConfig cfg = tiny_config();
    const ModelParams p = init_model(cfg);
    CHECK(attention_block(Matrix(5, cfg.hidden_dim), p.blocks[0]) ==
          Matrix(5, cfg.hidden_dim));
}

TEST_CASE("attention_block: permuting rows permutes outputs") {
    std::mt19937_64 gen(41);
    const ModelConfig cfg = tiny_config();
    const ModelParams p = init_model(cfg);
    const Matrix x = random_matrix(8, cfg.hidden_dim, gen);
    const Matrix y = attention_block(x, p.blocks[0]);

    std::vector<std::size_t> perm = {3, 0, 7, 1, 5, 2, 6, 4};
    const Matrix y_perm = attention_block(gather_rows(x, perm), p.blocks[0]);
    // Only approximate: the softmax-weighted sum runs over rows in a
    // different order, so the accumulation differs in the last bits.
    for (std::size_t i = 0; i < perm.size(); ++i) {
        for (std::size_t c = 0; c < y.cols; ++c) {
            CHECK(y_perm.at(i, c) == doctest::Approx(y.at(perm[i], c)).epsilon(1e-9));
        }
    }
}

TEST_CASE("attention_block: mismatched feature width throws") {
    const ModelParams p = init_model(tiny_config());
    CHECK_THROWS_AS(attention_block(Matrix(3, 5), p.blocks[0]), shape_error);
}

TEST_CASE("attention-only dense attention is not row slicing") {
    // Dropping tokens changes every remaining output row; this gap is exactly
    // what recovery error measures later.
    std::mt19937_64 gen(43);
    const ModelConfig cfg = tiny_config();
    const ModelParams p = init_model(cfg);
    const Matrix x = random_matrix(8, cfg.hidden_dim, gen);
    const std::vector<std::size_t> kept = {0, 2, 4, 6};
    CHECK(attention_block(gather_rows(x, kept), p.blocks[0]) !=
          gather_rows(attention_block(x, p.blocks[0]), kept));
}

TEST_CASE("convex_blend endpoints reproduce their operands") {
    std::mt19937_64 gen(47);
    const Matrix prev = random_matrix(4, 3, gen);
    const Matrix next = random_matrix(4, 3, gen);
    CHECK(convex_blend(prev, next, 0.0) == prev);
    CHECK(convex_blend(prev, next, 1.0) == next);
    const Matrix mid = convex_blend(prev, next, 0.5);
    CHECK(mid.at(0, 0) == 0.5 * prev.at(0, 0) + 0.5 * next.at(0, 0));
    CHECK_THROWS_AS(convex_blend(prev, Matrix(2, 2), 0.5), shape_error);
}

TEST_CASE("add_rows adds elementwise") {
    const Matrix a = matrix_from(1, 2, {1.0, 2.0});
    const Matrix b = matrix_from(1, 2, {0.5, -2.0});
    CHECK(add_rows(a, b) == matrix_from(1, 2, {1.5, 0.0}));
    CHECK_THROWS_AS(add_rows(a, Matrix(2, 2)), shape_error);
}

TEST_CASE("run_dense: records every activation with consistent shapes") {
    const ModelConfig cfg = tiny_config();
    const Trajectory traj = run_dense(cfg, 0);
    REQUIRE(traj.block_input.size() == cfg.num_steps);
    REQUIRE(traj.block_output.size() == cfg.num_steps);
    REQUIRE(traj.latent_before.size() == cfg.num_steps);
    REQUIRE(traj.latent_after.size() == cfg.num_steps);
    CHECK(traj.latent_before[0] == initial_latent(cfg, 0));
    for (std::size_t t = 0; t < cfg.num_steps; ++t) {
        REQUIRE(traj.block_input[t].size() == cfg.num_blocks);
        REQUIRE(traj.block_output[t].size() == cfg.num_blocks);
        for (std::size_t b = 0; b < cfg.num_blocks; ++b) {
            CHECK(traj.block_input[t][b].rows == cfg.num_tokens);
            CHECK(traj.block_output[t][b].cols == cfg.hidden_dim);
        }
        if (t + 1 < cfg.num_steps) {
            CHECK(traj.latent_after[t] == traj.latent_before[t + 1]);
        }
    }
    // The first block input of a step is the latent entering that step.
    CHECK(traj.block_input[0][0] == traj.latent_before[0]);
}

TEST_CASE("run_dense: reruns are bit-identical") {
    const ModelConfig cfg = tiny_config();
    const Trajectory a = run_dense(cfg, 5);
    const Trajectory b = run_dense(cfg, 5);
    CHECK(a.latent_after.back() == b.latent_after.back());
    CHECK(a.block_output[3][1] == b.block_output[3][1]);
}

TEST_CASE("run_dense: FLOPs ledger matches the closed form") {
    const ModelConfig cfg = tiny_config();
    const Trajectory traj = run_dense(cfg, 1);
    REQUIRE(traj.flops.size() == cfg.num_steps * cfg.num_blocks);
    for (const FlopsEntry& e : traj.flops) {
        CHECK(e.tokens == cfg.num_tokens);
        CHECK(e.attention_flops == flops_attention(cfg.num_tokens, cfg.hidden_dim));
        CHECK(e.matching_flops == 0);
    }
    CHECK(traj.total_attention_flops() ==
          cfg.num_steps * cfg.num_blocks * flops_attention(cfg.num_tokens, cfg.hidden_dim));
}

TEST_CASE("flops formulas: hand-checked points and quadratic growth") {
    CHECK(flops_attention(2, 1) == 28);  // 6*2*1 + 4*4*1
    CHECK(flops_attention(4, 3) == 6 * 4 * 9 + 4 * 16 * 3);
    CHECK(flops_matching(2, 3, 4) == 2 * 4 * 2 * 3 + 2 * 4 * (2 + 3));
    // The n^2 d term quadruples when the token count doubles.
    for (const std::size_t n : {4u, 10u, 64u}) {
        for (const std::size_t d : {2u, 32u}) {
            const std::uint64_t quad_n = flops_attention(n, d) - 6 * n * d * d;
            const std::uint64_t quad_2n = flops_attention(2 * n, d) - 6 * (2 * n) * d * d;
            CHECK(quad_2n == 4 * quad_n);
        }
    }
}

TEST_CASE("step size controls how fast the latent drifts") {
    // Smaller blend rates mean adjacent steps stay closer together — the
    // regime that makes reusing stale matchings reasonable at all.
    ModelConfig slow = tiny_config();
    slow.step_size = 0.05;
    ModelConfig mid = tiny_config();
    mid.step_size = 0.5;
    ModelConfig fast = tiny_config();
    fast.step_size = 1.0;

    double change_slow = 0.0;
    double change_mid = 0.0;
    double change_fast = 0.0;
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        change_slow += mean_relative_change(run_dense(slow, seed));
        change_mid += mean_relative_change(run_dense(mid, seed));
        change_fast += mean_relative_change(run_dense(fast, seed));
    }
    CHECK(change_slow < change_mid);
    CHECK(change_mid < change_fast);
    // Frozen ballpark for the slow regime; a regression that breaks the
    // blend arithmetic moves this by orders of magnitude, not percent.
    CHECK(change_slow / 5.0 < 0.2);
}
