#pragma once

#include <cstddef>
#include <cstdint>

namespace dito {

// Analytic attention cost for one call on n tokens of width d. Multiply-add
// counts as 2 FLOPs; softmax and other elementwise work are excluded.
//   QKV projections: 6*n*d^2, QK^T: 2*n^2*d, weights*V: 2*n^2*d.
inline std::uint64_t flops_attention(std::size_t n_tokens, std::size_t d) {
    const std::uint64_t n = n_tokens;
    const std::uint64_t dd = d;
    return 6 * n * dd * dd + 4 * n * n * dd;
}

// Cost of building one dst/src similarity map: pairwise dot products plus row
// norms. Elementwise normalization excluded, same convention as above.
inline std::uint64_t flops_matching(std::size_t n_dst, std::size_t n_src, std::size_t d) {
    const std::uint64_t nd = n_dst;
    const std::uint64_t ns = n_src;
    const std::uint64_t dd = d;
    return 2 * dd * nd * ns + 2 * dd * (nd + ns);
}

}  // namespace dito
