#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "dito/reduce.hpp"
#include "oracles.hpp"
#include "test_util.hpp"

using namespace dito;
using namespace dito::test;

namespace {

PairSet pairs_of(std::vector<std::pair<std::size_t, std::size_t>> pairs) {
    PairSet ps;
    ps.k = pairs.size();
    ps.pairs = std::move(pairs);
    return ps;
}

}  // namespace

TEST_CASE("reduce_tokens: empty pair set keeps everything") {
    std::mt19937_64 gen(73);
    const Matrix x = random_matrix(4, 3, gen);
    const Reduced r = reduce_tokens(x, PairSet{}, ReduceMode::prune);
    CHECK(r.tokens == x);
    CHECK(r.map.kept == std::vector<std::size_t>{0, 1, 2, 3});
    CHECK(r.map.restored_from.empty());
}

TEST_CASE("reduce_tokens: prune drops the src rows and records their dst") {
    std::mt19937_64 gen(79);
    const Matrix x = random_matrix(4, 3, gen);
    const Reduced r = reduce_tokens(x, pairs_of({{0, 2}}), ReduceMode::prune);
    CHECK(r.tokens == gather_rows(x, {0, 1, 3}));
    CHECK(r.map.kept == std::vector<std::size_t>{0, 1, 3});
    CHECK(r.map.restored_from ==
          std::vector<std::pair<std::size_t, std::size_t>>{{2, 0}});
}

TEST_CASE("reduce_tokens: merge averages the dst with its sources") {
    std::mt19937_64 gen(83);
    const Matrix x = random_matrix(5, 3, gen);
    const Reduced r = reduce_tokens(x, pairs_of({{0, 2}, {0, 4}}), ReduceMode::merge);
    REQUIRE(r.map.kept == std::vector<std::size_t>{0, 1, 3});
    for (std::size_t c = 0; c < x.cols; ++c) {
        // Same accumulation order as the implementation: dst, then each src
        // ascending, then one division.
        const double expected = (x.at(0, c) + x.at(2, c) + x.at(4, c)) / 3.0;
        CHECK(r.tokens.at(0, c) == expected);
        CHECK(r.tokens.at(1, c) == x.at(1, c));  // untouched rows stay exact
        CHECK(r.tokens.at(2, c) == x.at(3, c));
    }
}

TEST_CASE("reduce_tokens: malformed pair sets are logic faults") {
    std::mt19937_64 gen(89);
    const Matrix x = random_matrix(4, 2, gen);
    CHECK_THROWS_AS(reduce_tokens(x, pairs_of({{0, 2}, {1, 2}}), ReduceMode::prune),
                    internal_error);  // duplicate src
    CHECK_THROWS_AS(reduce_tokens(x, pairs_of({{0, 9}}), ReduceMode::prune),
                    internal_error);  // src out of range
    CHECK_THROWS_AS(reduce_tokens(x, pairs_of({{9, 2}}), ReduceMode::prune),
                    internal_error);  // dst out of range
}

TEST_CASE("recover_tokens: copies each src from its matched dst") {
    const Matrix reduced = matrix_from(3, 2, {1.0, 2.0, 3.0, 4.0, 5.0, 6.0});
    IndexMap map;
    map.kept = {0, 1, 3};
    map.restored_from = {{2, 0}};
    const Matrix y = recover_tokens(reduced, map, 4);
    CHECK(y == matrix_from(4, 2, {1.0, 2.0, 3.0, 4.0, 1.0, 2.0, 5.0, 6.0}));
}

TEST_CASE("recover_tokens: inconsistent maps are logic faults") {
    const Matrix reduced(3, 2);
    IndexMap bad;
    bad.kept = {0, 1, 3};
    bad.restored_from = {{2, 5}};  // dst was never kept
    CHECK_THROWS_AS(recover_tokens(reduced, bad, 4), internal_error);

    IndexMap short_map;
    short_map.kept = {0, 1};
    short_map.restored_from = {{2, 0}};
    CHECK_THROWS_AS(recover_tokens(reduced, short_map, 4), internal_error);

    IndexMap wrong_total;
    wrong_total.kept = {0, 1, 3};
    wrong_total.restored_from = {};
    CHECK_THROWS_AS(recover_tokens(reduced, wrong_total, 4), internal_error);
}

TEST_CASE("recovery_error: squared Frobenius distance worked examples") {
    CHECK(recovery_error(matrix_from(1, 1, {0.0}), matrix_from(1, 1, {2.0})) == 4.0);
    CHECK(recovery_error(matrix_from(1, 2, {1.0, 2.0}), matrix_from(1, 2, {-1.0, 2.0})) ==
          4.0);
    CHECK(recovery_error(matrix_from(2, 1, {0.0, 0.0}), matrix_from(2, 1, {3.0, 4.0})) ==
          25.0);
    std::mt19937_64 gen(97);
    const Matrix y = random_matrix(3, 3, gen);
    CHECK(recovery_error(y, y) == 0.0);
    CHECK_THROWS_AS(recovery_error(y, Matrix(2, 3)), shape_error);
}

TEST_CASE("apply_pairs: equals reduce followed by recover") {
    std::mt19937_64 gen(101);
    const Matrix y = random_matrix(16, 4, gen);
    const Partition p = bipartition(16, BipartitionStrategy{});
    const PairSet ps = golden_match(y, p, 0.25, Metric::cosine);
    for (const ReduceMode mode : {ReduceMode::prune, ReduceMode::merge}) {
        const Reduced r = reduce_tokens(y, ps, mode);
        CHECK(apply_pairs(y, ps, mode) ==
              recover_tokens(r.tokens, r.map, y.rows));
    }
}

TEST_CASE("apply_pairs: prune keeps surviving rows bit-exact") {
    std::mt19937_64 gen(103);
    const Matrix y = random_matrix(16, 4, gen);
    const Partition p = bipartition(16, BipartitionStrategy{});
    const PairSet ps = golden_match(y, p, 0.5, Metric::neg_l2);
    const Matrix recovered = apply_pairs(y, ps, ReduceMode::prune);
    std::vector<bool> removed(y.rows, false);
    for (const auto& [d, s] : ps.pairs) removed[s] = true;
    for (std::size_t i = 0; i < y.rows; ++i) {
        if (removed[i]) continue;
        for (std::size_t c = 0; c < y.cols; ++c) {
            REQUIRE(recovered.at(i, c) == y.at(i, c));
        }
    }
    // Every removed row is an exact copy of its matched dst row.
    for (const auto& [d, s] : ps.pairs) {
        for (std::size_t c = 0; c < y.cols; ++c) {
            REQUIRE(recovered.at(s, c) == y.at(d, c));
        }
    }
}

TEST_CASE("golden neg_l2 pruning attains the analytic recovery floor") {
    std::mt19937_64 gen(107);
    for (int c = 0; c < 10; ++c) {
        const std::size_t n = 16;
        const Matrix y = random_matrix(n, 4, gen);
        const Partition p = bipartition(n, BipartitionStrategy{});
        const PairSet ps = golden_match(y, p, 0.25, Metric::neg_l2);
        const double err = recovery_error(y, apply_pairs(y, ps, ReduceMode::prune));
        const double floor = oracle_min_recovery(y, p, ps.k);
        REQUIRE(err == doctest::Approx(floor).epsilon(1e-9));
    }
}

TEST_CASE("recovery floor degenerate cases") {
    std::mt19937_64 gen(109);
    const Matrix y = random_matrix(16, 4, gen);
    const Partition p = bipartition(16, BipartitionStrategy{});
    CHECK(oracle_min_recovery(y, p, 0) == 0.0);

    // A src row duplicating a dst row makes one perfect copy available.
    Matrix dup = y;
    for (std::size_t c = 0; c < dup.cols; ++c) dup.at(1, c) = dup.at(0, c);
    CHECK(oracle_min_recovery(dup, p, 1) == 0.0);
    const PairSet one = golden_match(dup, p, 1.0 / 16.0, Metric::neg_l2);
    REQUIRE(one.k == 1);
    CHECK(recovery_error(dup, apply_pairs(dup, one, ReduceMode::prune)) == 0.0);
}
