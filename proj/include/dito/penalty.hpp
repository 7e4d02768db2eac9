#pragma once

#include <cstdint>
#include <vector>

#include "dito/error.hpp"
#include "dito/matching.hpp"

namespace dito {

// Per-token count of how often each position was selected as a reduction
// target. One history per run, shared across blocks and timesteps; counts
// grow by one per (reduction step, block) application of a pair set.
struct SelectionHistory {
    std::vector<std::uint64_t> counts;

    SelectionHistory() = default;
    explicit SelectionHistory(std::size_t n) : counts(n, 0) {}

    std::uint64_t max_count() const;
    // Population standard deviation over all entries; measures how unevenly
    // selections concentrate on particular tokens.
    double stddev() const;

    bool operator==(const SelectionHistory& other) const = default;
};

// Frequency-aware score adjustment: with ds = max(score) - min(score), each
// candidate loses lambda * ratio * ds * count[src]. Best-dst assignments are
// untouched; only the subsequent top-k selection order changes.
Candidates apply_penalty(const Candidates& c, const SelectionHistory& history,
                         double lambda, double ratio);

// Increments the count of every src in the pair set by one.
void update_history(SelectionHistory& history, const PairSet& pairs);

}  // namespace dito
