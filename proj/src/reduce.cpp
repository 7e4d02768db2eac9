#include "dito/reduce.hpp"

#include <algorithm>
#include <map>

namespace dito {

Reduced reduce_tokens(const Matrix& x, const PairSet& pairs, ReduceMode mode) {
    std::vector<bool> removed(x.rows, false);
    for (const auto& [d, s] : pairs.pairs) {
        if (d >= x.rows || s >= x.rows) {
            throw internal_error("reduce_tokens: pair position out of range");
        }
        if (removed[s]) {
            throw internal_error("reduce_tokens: duplicate src in pair set");
        }
        removed[s] = true;
    }

    Reduced out;
    for (std::size_t i = 0; i < x.rows; ++i) {
        if (!removed[i]) out.map.kept.push_back(i);
    }
    for (const auto& [d, s] : pairs.pairs) {
        out.map.restored_from.emplace_back(s, d);
    }

    if (mode == ReduceMode::prune) {
        out.tokens = gather_rows(x, out.map.kept);
        return out;
    }

    // Merge: accumulate each dst's srcs in ascending src order, then divide,
    // so the mean is reproducible regardless of pair-set ordering.
    std::map<std::size_t, std::vector<std::size_t>> srcs_of;
    for (const auto& [d, s] : pairs.pairs) {
        srcs_of[d].push_back(s);
    }
    Matrix merged = x;
    for (auto& [d, srcs] : srcs_of) {
        std::sort(srcs.begin(), srcs.end());
        double* row = merged.row(d);
        for (const std::size_t s : srcs) {
            const double* add = x.row(s);
            for (std::size_t c = 0; c < x.cols; ++c) row[c] += add[c];
        }
        const double denom = static_cast<double>(srcs.size() + 1);
        for (std::size_t c = 0; c < x.cols; ++c) row[c] /= denom;
    }
    out.tokens = gather_rows(merged, out.map.kept);
    return out;
}

Matrix recover_tokens(const Matrix& y_reduced, const IndexMap& map, std::size_t n) {
    if (y_reduced.rows != map.kept.size()) {
        throw internal_error("recover_tokens: reduced row count does not match map");
    }
    if (map.kept.size() + map.restored_from.size() != n) {
        throw internal_error("recover_tokens: map does not cover the token count");
    }
    // Original position -> row in the reduced matrix.
    std::vector<std::size_t> reduced_row(n, n);
    for (std::size_t i = 0; i < map.kept.size(); ++i) {
        const std::size_t pos = map.kept[i];
        if (pos >= n || reduced_row[pos] != n) {
            throw internal_error("recover_tokens: bad kept position");
        }
        reduced_row[pos] = i;
    }

    Matrix out(n, y_reduced.cols);
    std::vector<bool> filled(n, false);
    for (const std::size_t pos : map.kept) {
        std::copy(y_reduced.row(reduced_row[pos]),
                  y_reduced.row(reduced_row[pos]) + y_reduced.cols, out.row(pos));
        filled[pos] = true;
    }
    for (const auto& [s, d] : map.restored_from) {
        if (s >= n || filled[s] || d >= n || reduced_row[d] == n) {
            throw internal_error("recover_tokens: inconsistent restore entry");
        }
        std::copy(y_reduced.row(reduced_row[d]),
                  y_reduced.row(reduced_row[d]) + y_reduced.cols, out.row(s));
        filled[s] = true;
    }
    return out;
}

double recovery_error(const Matrix& y, const Matrix& y_tilde) {
    if (!y.same_shape(y_tilde)) {
        throw shape_error("recovery_error: shapes differ");
    }
    double acc = 0.0;
    for (std::size_t i = 0; i < y.data.size(); ++i) {
        const double diff = y.data[i] - y_tilde.data[i];
        acc += diff * diff;
    }
    return acc;
}

Matrix apply_pairs(const Matrix& y, const PairSet& pairs, ReduceMode mode) {
    const Reduced red = reduce_tokens(y, pairs, mode);
    return recover_tokens(red.tokens, red.map, y.rows);
}

}  // namespace dito
