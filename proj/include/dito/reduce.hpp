#pragma once

#include <utility>
#include <vector>

#include "dito/error.hpp"
#include "dito/matching.hpp"

namespace dito {

// Bookkeeping for one reduction: which original positions survived (ascending)
// and, for each removed src, the dst whose output row it copies on recovery.
struct IndexMap {
    std::vector<std::size_t> kept;
    std::vector<std::pair<std::size_t, std::size_t>> restored_from;  // (src, dst)

    bool operator==(const IndexMap& other) const = default;
};

enum class ReduceMode { prune, merge };

struct Reduced {
    Matrix tokens;
    IndexMap map;
};

// Drops the pair set's src rows. prune leaves kept rows untouched; merge first
// replaces each dst row with the mean of itself and all srcs matched to it.
Reduced reduce_tokens(const Matrix& x, const PairSet& pairs, ReduceMode mode);

// Expands back to n rows: kept positions take their reduced row, removed srcs
// take a copy of their matched dst's row. All copies are bit-exact.
Matrix recover_tokens(const Matrix& y_reduced, const IndexMap& map, std::size_t n);

// Squared Frobenius distance between the two matrices.
double recovery_error(const Matrix& y, const Matrix& y_tilde);

// recover(reduce(y)) without any computation in between: what a pair set alone
// loses on y. The comparison arms measure matching quality with this.
Matrix apply_pairs(const Matrix& y, const PairSet& pairs, ReduceMode mode);

}  // namespace dito
