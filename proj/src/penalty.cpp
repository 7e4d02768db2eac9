#include "dito/penalty.hpp"

#include <algorithm>
#include <cmath>

namespace dito {

std::uint64_t SelectionHistory::max_count() const {
    std::uint64_t m = 0;
    for (const std::uint64_t c : counts) m = std::max(m, c);
    return m;
}

double SelectionHistory::stddev() const {
    if (counts.empty()) return 0.0;
    double mean = 0.0;
    for (const std::uint64_t c : counts) mean += static_cast<double>(c);
    mean /= static_cast<double>(counts.size());
    double var = 0.0;
    for (const std::uint64_t c : counts) {
        const double diff = static_cast<double>(c) - mean;
        var += diff * diff;
    }
    return std::sqrt(var / static_cast<double>(counts.size()));
}

Candidates apply_penalty(const Candidates& c, const SelectionHistory& history,
                         double lambda, double ratio) {
    if (lambda < 0.0) {
        throw config_error("apply_penalty: lambda must be >= 0");
    }
    if (c.size() == 0) {
        return c;
    }
    double lo = c.score[0];
    double hi = c.score[0];
    for (const double s : c.score) {
        lo = std::min(lo, s);
        hi = std::max(hi, s);
    }
    const double ds = hi - lo;

    Candidates out = c;
    for (std::size_t j = 0; j < c.size(); ++j) {
        const std::size_t s = c.src[j];
        if (s >= history.counts.size()) {
            throw internal_error("apply_penalty: src position outside history");
        }
        out.score[j] = c.score[j] - lambda * ratio * ds * static_cast<double>(history.counts[s]);
    }
    return out;
}

void update_history(SelectionHistory& history, const PairSet& pairs) {
    for (const auto& [d, s] : pairs.pairs) {
        (void)d;
        if (s >= history.counts.size()) {
            throw internal_error("update_history: src position out of range");
        }
        ++history.counts[s];
    }
}

}  // namespace dito
