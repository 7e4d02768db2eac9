#include "dito/matching.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "dito/rng.hpp"

namespace dito {

namespace {

std::size_t exact_sqrt(std::size_t n) {
    const auto side = static_cast<std::size_t>(std::lround(std::sqrt(static_cast<double>(n))));
    return side * side == n ? side : 0;
}

Partition from_dst_flags(const std::vector<bool>& is_dst) {
    Partition p;
    for (std::size_t i = 0; i < is_dst.size(); ++i) {
        (is_dst[i] ? p.dst : p.src).push_back(i);
    }
    return p;
}

}  // namespace

Partition bipartition(std::size_t n, const BipartitionStrategy& strategy) {
    if (n < 4) {
        throw config_error("bipartition: need at least 4 tokens");
    }
    if (strategy.stride < 2) {
        throw config_error("bipartition: stride must be >= 2");
    }

    if (strategy.kind == BipartitionStrategy::Kind::strided) {
        const std::size_t side = exact_sqrt(n);
        if (side == 0) {
            throw config_error("bipartition: strided split needs a square token grid");
        }
        if (side % strategy.stride != 0) {
            throw config_error("bipartition: stride must divide the grid side");
        }
        std::vector<bool> is_dst(n, false);
        for (std::size_t i = 0; i < side; i += strategy.stride) {
            for (std::size_t j = 0; j < side; j += strategy.stride) {
                is_dst[i * side + j] = true;
            }
        }
        return from_dst_flags(is_dst);
    }

    // Random pick: same destination count as the strided split.
    const std::size_t stride_sq = strategy.stride * strategy.stride;
    if (n % stride_sq != 0) {
        throw config_error("bipartition: stride^2 must divide the token count");
    }
    const std::size_t num_dst = n / stride_sq;
    std::vector<std::size_t> pool(n);
    std::iota(pool.begin(), pool.end(), std::size_t{0});
    std::mt19937_64 gen(strategy.seed);
    std::vector<bool> is_dst(n, false);
    // Partial Fisher-Yates; std::sample is avoided because its picks are
    // implementation-defined.
    for (std::size_t i = 0; i < num_dst; ++i) {
        const std::size_t j = i + static_cast<std::size_t>(uniform_below(gen, n - i));
        std::swap(pool[i], pool[j]);
        is_dst[pool[i]] = true;
    }
    return from_dst_flags(is_dst);
}

Candidates match_candidates(const Matrix& a, const Partition& partition) {
    if (partition.dst.empty() || partition.src.empty()) {
        throw config_error("match_candidates: empty dst or src set");
    }
    if (a.rows != partition.dst.size() || a.cols != partition.src.size()) {
        throw shape_error("match_candidates: map shape does not match partition");
    }
    Candidates c;
    c.src = partition.src;
    c.best_dst.resize(a.cols);
    c.score.resize(a.cols);
    for (std::size_t j = 0; j < a.cols; ++j) {
        std::size_t best = 0;
        for (std::size_t i = 1; i < a.rows; ++i) {
            const double v = a.at(i, j);
            const double b = a.at(best, j);
            if (v > b || (v == b && partition.dst[i] < partition.dst[best])) {
                best = i;
            }
        }
        c.best_dst[j] = partition.dst[best];
        c.score[j] = a.at(best, j);
    }
    return c;
}

std::vector<std::uint32_t> PairSet::serialize() const {
    std::vector<std::uint32_t> out;
    out.reserve(pairs.size() * 2);
    for (const auto& [d, s] : pairs) {
        out.push_back(static_cast<std::uint32_t>(d));
        out.push_back(static_cast<std::uint32_t>(s));
    }
    return out;
}

PairSet select_top_k(const Candidates& c, double ratio, std::size_t n) {
    if (ratio < 0.0 || ratio > 1.0) {
        throw config_error("select_top_k: ratio must be in [0, 1]");
    }
    // The nudge keeps floor() honest when r*n is an exact integer in real
    // arithmetic but lands just below it in floating point.
    const auto want = static_cast<std::size_t>(std::floor(ratio * static_cast<double>(n) + 1e-9));
    PairSet ps;
    ps.ratio = ratio;
    ps.k = std::min(want, c.size());

    std::vector<std::size_t> order(c.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (c.score[a] != c.score[b]) return c.score[a] > c.score[b];
        return c.src[a] < c.src[b];
    });
    ps.pairs.reserve(ps.k);
    for (std::size_t i = 0; i < ps.k; ++i) {
        const std::size_t j = order[i];
        ps.pairs.emplace_back(c.best_dst[j], c.src[j]);
    }
    return ps;
}

namespace {

Matrix negative_sqdist_map(const Matrix& dst_feats, const Matrix& src_feats) {
    if (dst_feats.cols != src_feats.cols) {
        throw shape_error("negative_sqdist_map: feature dimensions differ");
    }
    Matrix out(dst_feats.rows, src_feats.rows);
    for (std::size_t i = 0; i < dst_feats.rows; ++i) {
        const double* di = dst_feats.row(i);
        for (std::size_t j = 0; j < src_feats.rows; ++j) {
            const double* sj = src_feats.row(j);
            double acc = 0.0;
            for (std::size_t k = 0; k < dst_feats.cols; ++k) {
                const double diff = di[k] - sj[k];
                acc += diff * diff;
            }
            out.at(i, j) = -acc;
        }
    }
    return out;
}

}  // namespace

Matrix similarity_map(const Matrix& feats, const Partition& partition, Metric metric) {
    const Matrix dst_rows = gather_rows(feats, partition.dst);
    const Matrix src_rows = gather_rows(feats, partition.src);
    switch (metric) {
        case Metric::cosine:
            return cosine_similarity_map(dst_rows, src_rows);
        case Metric::neg_l2:
            return negative_sqdist_map(dst_rows, src_rows);
    }
    throw internal_error("similarity_map: unknown metric");
}

PairSet golden_match(const Matrix& y, const Partition& partition, double ratio,
                     Metric metric) {
    const Matrix a = similarity_map(y, partition, metric);
    const Candidates c = match_candidates(a, partition);
    return select_top_k(c, ratio, partition.total());
}

}  // namespace dito
