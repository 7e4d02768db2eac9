#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "dito/error.hpp"
#include "dito/linalg.hpp"

namespace dito {

// Disjoint destination/source split of token positions 0..n-1. Both lists are
// kept in ascending position order by the constructors below; the row/column
// layout of every similarity map follows these lists.
struct Partition {
    std::vector<std::size_t> dst;
    std::vector<std::size_t> src;

    std::size_t total() const { return dst.size() + src.size(); }
    bool operator==(const Partition& other) const = default;
};

struct BipartitionStrategy {
    enum class Kind { strided, random_pick };

    Kind kind = Kind::strided;
    // For the strided kind, grid cell (i, j) is a destination iff both i and j
    // are multiples of stride. The random kind draws the same number of
    // destinations (n / stride^2) by seeded sampling.
    std::size_t stride = 2;
    std::uint64_t seed = 0;

    bool operator==(const BipartitionStrategy& other) const = default;
};

Partition bipartition(std::size_t n, const BipartitionStrategy& strategy);

// Per-source best destination and its similarity score, aligned with the
// partition's src list.
struct Candidates {
    std::vector<std::size_t> src;       // token positions, ascending
    std::vector<std::size_t> best_dst;  // token position of the chosen dst
    std::vector<double> score;

    std::size_t size() const { return src.size(); }
};

// Column-wise argmax over the similarity map; ties go to the smallest dst
// position.
Candidates match_candidates(const Matrix& a, const Partition& partition);

// The selected matched pairs, ordered by (score descending, src ascending).
struct PairSet {
    std::vector<std::pair<std::size_t, std::size_t>> pairs;  // (dst, src)
    std::size_t k = 0;
    double ratio = 0.0;

    // Compact index metadata: [d0, s0, d1, s1, ...].
    std::vector<std::uint32_t> serialize() const;
    bool operator==(const PairSet& other) const = default;
};

// Keeps the k = min(floor(r*n), |S|) sources with the largest scores.
PairSet select_top_k(const Candidates& c, double ratio, std::size_t n);

enum class Metric { cosine, neg_l2 };

// |D| x |S| similarity map over rows of feats, split by the partition.
// neg_l2 scores are negated squared Euclidean distances, so larger is closer.
Matrix similarity_map(const Matrix& feats, const Partition& partition, Metric metric);

// similarity_map -> match_candidates -> select_top_k in one call; matching on
// a block's own output is the ground-truth ("golden") matching.
PairSet golden_match(const Matrix& y, const Partition& partition, double ratio,
                     Metric metric);

}  // namespace dito
