#pragma once

#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "dito/error.hpp"
#include "dito/matching.hpp"
#include "dito/model.hpp"

namespace dito {

// Per-source Top-k destination candidates, as row indices into the map's dst
// axis, ordered by (similarity descending, row ascending).
std::vector<std::vector<std::size_t>> topk_dst_sets(const Matrix& a, std::size_t k);

// Per-source argmax row of the map; ties go to the smallest row.
std::vector<std::size_t> golden_top1(const Matrix& a);

// Fraction of sources whose golden top-1 dst appears in their candidate set.
double pmr_value(const std::vector<std::size_t>& golden,
                 const std::vector<std::vector<std::size_t>>& candidate_topk);

// Pair-match rates per (timestep, block, interval), averaged over a corpus of
// dense trajectories. For interval 0 the candidates come from the block input
// at the same step; for interval d >= 1, from the block output d steps back.
// Entries that would reach before step 0 are absent (stored as `absent`, which
// keeps the defaulted equality usable, unlike NaN).
struct PmrTable {
    std::size_t num_steps = 0;
    std::size_t num_blocks = 0;
    std::size_t top_k = 0;
    Metric metric = Metric::cosine;
    std::vector<std::size_t> deltas;         // sorted ascending
    std::vector<std::uint64_t> seeds;        // calibration corpus
    std::vector<double> raw;                 // [t][b][delta_index]
    std::vector<double> block_avg;           // [t][delta_index]

    static constexpr std::size_t npos = std::numeric_limits<std::size_t>::max();
    static constexpr double absent = -1.0;

    std::size_t delta_index(std::size_t delta) const;
    bool present(std::size_t t, std::size_t delta) const { return delta == 0 || delta <= t; }
    double raw_at(std::size_t t, std::size_t b, std::size_t delta_idx) const {
        return raw[(t * num_blocks + b) * deltas.size() + delta_idx];
    }
    double avg_at(std::size_t t, std::size_t delta_idx) const {
        return block_avg[t * deltas.size() + delta_idx];
    }

    bool operator==(const PmrTable& other) const = default;
};

// Streaming construction so a calibration run never holds more than one
// trajectory in memory.
class PmrAccumulator {
  public:
    PmrAccumulator(Partition partition, std::size_t top_k,
                   std::vector<std::size_t> deltas, Metric metric);

    void add(const Trajectory& trajectory, std::uint64_t seed);
    PmrTable finish() const;

  private:
    Partition partition_;
    std::size_t top_k_;
    std::vector<std::size_t> deltas_;
    Metric metric_;
    ModelConfig config_;
    std::size_t count_ = 0;
    std::vector<std::uint64_t> seeds_;
    std::vector<double> sums_;
};

PmrTable build_pmr_table(const std::vector<Trajectory>& trajectories,
                         const Partition& partition, std::size_t top_k,
                         const std::vector<std::size_t>& deltas, Metric metric,
                         const std::vector<std::uint64_t>& seeds);

// Rebuilds block_avg from raw (blocks accumulated in ascending order). The
// CSV parser uses this too, so parsed tables are bit-identical to built ones.
void recompute_block_averages(PmrTable& table);

// Largest reuse interval per timestep whose block-averaged rate stays at or
// above tau; 0 when no interval qualifies.
struct MaxIntervals {
    std::vector<std::size_t> delta_max;
    double tau = 0.0;

    bool operator==(const MaxIntervals& other) const = default;
};

MaxIntervals max_intervals(const PmrTable& table, double tau);

}  // namespace dito
