#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "dito/penalty.hpp"
#include "test_util.hpp"

using namespace dito;
using namespace dito::test;

namespace {

Candidates sample_candidates() {
    Candidates c;
    c.src = {4, 6, 9};
    c.best_dst = {0, 2, 0};
    c.score = {0.9, 0.5, 0.1};
    return c;
}

}  // namespace

TEST_CASE("apply_penalty: lambda zero returns the identical candidates") {
    const Candidates c = sample_candidates();
    SelectionHistory h(10);
    h.counts[4] = 7;
    h.counts[9] = 2;
    const Candidates out = apply_penalty(c, h, 0.0, 0.25);
    CHECK(out.score == c.score);
    CHECK(out.best_dst == c.best_dst);
    CHECK(out.src == c.src);
}

TEST_CASE("apply_penalty: untouched history penalizes nothing") {
    const Candidates c = sample_candidates();
    const Candidates out = apply_penalty(c, SelectionHistory(10), 1.0, 0.25);
    CHECK(out.score == c.score);
}

TEST_CASE("apply_penalty: worked example") {
    // Score spread 0.9 - 0.1 = 0.8; penalties 0.5 * 0.25 * 0.8 * count.
    const Candidates c = sample_candidates();
    SelectionHistory h(10);
    h.counts[4] = 2;
    h.counts[6] = 0;
    h.counts[9] = 1;
    const Candidates out = apply_penalty(c, h, 0.5, 0.25);
    CHECK(out.score[0] == doctest::Approx(0.7).epsilon(1e-12));
    CHECK(out.score[1] == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(out.score[2] == doctest::Approx(0.0).scale(1.0).epsilon(1e-12));
}

TEST_CASE("apply_penalty: no score spread means no penalty") {
    Candidates c;
    c.src = {1, 2};
    c.best_dst = {0, 0};
    c.score = {0.42, 0.42};
    SelectionHistory h(4);
    h.counts[1] = 100;
    CHECK(apply_penalty(c, h, 1.0, 1.0).score == c.score);
}

TEST_CASE("apply_penalty: empty candidate list passes through") {
    CHECK(apply_penalty(Candidates{}, SelectionHistory(4), 1.0, 0.5).score.empty());
}

TEST_CASE("apply_penalty: negative lambda is rejected") {
    CHECK_THROWS_AS(apply_penalty(sample_candidates(), SelectionHistory(10), -0.5, 0.25),
                    config_error);
}

TEST_CASE("apply_penalty: history shorter than the src range is a logic fault") {
    CHECK_THROWS_AS(apply_penalty(sample_candidates(), SelectionHistory(5), 1.0, 0.25),
                    internal_error);
}

TEST_CASE("apply_penalty: repeated selections push a source out of the top k") {
    Candidates c;
    c.src = {2, 3};
    c.best_dst = {0, 1};
    c.score = {0.9, 0.8};
    SelectionHistory h(4);
    h.counts[2] = 10;  // spread 0.1, penalty 1.0 * 0.5 * 0.1 * 10 = 0.5
    const PairSet ps = select_top_k(apply_penalty(c, h, 1.0, 0.5), 0.5, 4);
    REQUIRE(ps.k == 2);
    CHECK(ps.pairs[0] == std::pair<std::size_t, std::size_t>{1, 3});
    CHECK(ps.pairs[1] == std::pair<std::size_t, std::size_t>{0, 2});
}

TEST_CASE("update_history: counts selected sources once per application") {
    SelectionHistory h(4);
    PairSet ps;
    ps.pairs = {{0, 1}, {2, 3}};
    ps.k = 2;
    update_history(h, ps);
    CHECK(h.counts == std::vector<std::uint64_t>{0, 1, 0, 1});
    update_history(h, ps);
    CHECK(h.counts == std::vector<std::uint64_t>{0, 2, 0, 2});
    update_history(h, PairSet{});
    CHECK(h.counts == std::vector<std::uint64_t>{0, 2, 0, 2});

    PairSet oob;
    oob.pairs = {{0, 9}};
    CHECK_THROWS_AS(update_history(h, oob), internal_error);
}

TEST_CASE("SelectionHistory: max and spread statistics") {
    SelectionHistory h(4);
    h.counts = {0, 2, 0, 2};
    CHECK(h.max_count() == 2);
    CHECK(h.stddev() == 1.0);  // mean 1, every deviation exactly 1
    h.counts = {3, 3, 3, 3};
    CHECK(h.stddev() == 0.0);
    CHECK(SelectionHistory().max_count() == 0);
}
