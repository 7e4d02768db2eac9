#include "dito/pmr.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace dito {

std::vector<std::vector<std::size_t>> topk_dst_sets(const Matrix& a, std::size_t k) {
    if (k < 1 || k > a.rows) {
        throw config_error("topk_dst_sets: k must be in [1, |D|]");
    }
    std::vector<std::vector<std::size_t>> sets(a.cols);
    std::vector<std::size_t> order(a.rows);
    for (std::size_t j = 0; j < a.cols; ++j) {
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::sort(order.begin(), order.end(), [&](std::size_t r1, std::size_t r2) {
            const double v1 = a.at(r1, j);
            const double v2 = a.at(r2, j);
            if (v1 != v2) return v1 > v2;
            return r1 < r2;
        });
        sets[j].assign(order.begin(), order.begin() + k);
    }
    return sets;
}

std::vector<std::size_t> golden_top1(const Matrix& a) {
    if (a.rows == 0 || a.cols == 0) {
        throw shape_error("golden_top1: empty map");
    }
    std::vector<std::size_t> best(a.cols, 0);
    for (std::size_t j = 0; j < a.cols; ++j) {
        for (std::size_t i = 1; i < a.rows; ++i) {
            if (a.at(i, j) > a.at(best[j], j)) best[j] = i;
        }
    }
    return best;
}

double pmr_value(const std::vector<std::size_t>& golden,
                 const std::vector<std::vector<std::size_t>>& candidate_topk) {
    if (golden.empty() || golden.size() != candidate_topk.size()) {
        throw shape_error("pmr_value: source lists differ");
    }
    std::size_t hits = 0;
    for (std::size_t j = 0; j < golden.size(); ++j) {
        const auto& set = candidate_topk[j];
        if (std::find(set.begin(), set.end(), golden[j]) != set.end()) ++hits;
    }
    return static_cast<double>(hits) / static_cast<double>(golden.size());
}

std::size_t PmrTable::delta_index(std::size_t delta) const {
    const auto it = std::lower_bound(deltas.begin(), deltas.end(), delta);
    if (it == deltas.end() || *it != delta) return npos;
    return static_cast<std::size_t>(it - deltas.begin());
}

PmrAccumulator::PmrAccumulator(Partition partition, std::size_t top_k,
                               std::vector<std::size_t> deltas, Metric metric)
    : partition_(std::move(partition)), top_k_(top_k), deltas_(std::move(deltas)),
      metric_(metric) {
    if (deltas_.empty()) {
        throw config_error("pmr: empty interval range");
    }
    std::sort(deltas_.begin(), deltas_.end());
    deltas_.erase(std::unique(deltas_.begin(), deltas_.end()), deltas_.end());
    if (top_k_ < 1 || top_k_ > partition_.dst.size()) {
        throw config_error("pmr: top_k must be in [1, |D|]");
    }
}

void PmrAccumulator::add(const Trajectory& trajectory, std::uint64_t seed) {
    const ModelConfig& cfg = trajectory.config;
    if (count_ == 0) {
        config_ = cfg;
        if (deltas_.back() > cfg.num_steps - 1) {
            throw config_error("pmr: interval exceeds num_steps - 1");
        }
        sums_.assign(cfg.num_steps * cfg.num_blocks * deltas_.size(), 0.0);
    } else if (cfg.num_steps != config_.num_steps || cfg.num_blocks != config_.num_blocks ||
               cfg.num_tokens != config_.num_tokens || cfg.hidden_dim != config_.hidden_dim) {
        throw config_error("pmr: trajectories disagree on model shape");
    }
    if (cfg.num_tokens != partition_.total()) {
        throw config_error("pmr: partition does not cover the token count");
    }

    const std::size_t T = cfg.num_steps;
    const std::size_t B = cfg.num_blocks;
    const bool want_delta0 = deltas_.front() == 0;

    // One similarity map per (t, b) output serves both the golden top-1 at t
    // and the candidate Top-k for every later step that reaches back to t.
    std::vector<std::vector<std::size_t>> golden(T * B);
    std::vector<std::vector<std::vector<std::size_t>>> out_topk(T * B);
    std::vector<std::vector<std::vector<std::size_t>>> in_topk(want_delta0 ? T * B : 0);
    for (std::size_t t = 0; t < T; ++t) {
        for (std::size_t b = 0; b < B; ++b) {
            const Matrix map_y = similarity_map(trajectory.block_output[t][b], partition_, metric_);
            golden[t * B + b] = golden_top1(map_y);
            out_topk[t * B + b] = topk_dst_sets(map_y, top_k_);
            if (want_delta0) {
                const Matrix map_x =
                    similarity_map(trajectory.block_input[t][b], partition_, metric_);
                in_topk[t * B + b] = topk_dst_sets(map_x, top_k_);
            }
        }
    }

    for (std::size_t t = 0; t < T; ++t) {
        for (std::size_t b = 0; b < B; ++b) {
            for (std::size_t di = 0; di < deltas_.size(); ++di) {
                const std::size_t delta = deltas_[di];
                if (delta > t) continue;
                const auto& cand =
                    delta == 0 ? in_topk[t * B + b] : out_topk[(t - delta) * B + b];
                sums_[(t * B + b) * deltas_.size() + di] += pmr_value(golden[t * B + b], cand);
            }
        }
    }
    seeds_.push_back(seed);
    ++count_;
}

PmrTable PmrAccumulator::finish() const {
    if (count_ == 0) {
        throw config_error("pmr: empty calibration corpus");
    }
    PmrTable table;
    table.num_steps = config_.num_steps;
    table.num_blocks = config_.num_blocks;
    table.top_k = top_k_;
    table.metric = metric_;
    table.deltas = deltas_;
    table.seeds = seeds_;

    const std::size_t nd = deltas_.size();
    table.raw.assign(sums_.size(), PmrTable::absent);
    for (std::size_t t = 0; t < table.num_steps; ++t) {
        for (std::size_t di = 0; di < nd; ++di) {
            if (!table.present(t, deltas_[di])) continue;
            for (std::size_t b = 0; b < table.num_blocks; ++b) {
                const std::size_t idx = (t * table.num_blocks + b) * nd + di;
                table.raw[idx] = sums_[idx] / static_cast<double>(count_);
            }
        }
    }
    recompute_block_averages(table);
    return table;
}

void recompute_block_averages(PmrTable& table) {
    const std::size_t nd = table.deltas.size();
    table.block_avg.assign(table.num_steps * nd, PmrTable::absent);
    for (std::size_t t = 0; t < table.num_steps; ++t) {
        for (std::size_t di = 0; di < nd; ++di) {
            if (!table.present(t, table.deltas[di])) continue;
            double acc = 0.0;
            for (std::size_t b = 0; b < table.num_blocks; ++b) {
                acc += table.raw_at(t, b, di);
            }
            table.block_avg[t * nd + di] = acc / static_cast<double>(table.num_blocks);
        }
    }
}

PmrTable build_pmr_table(const std::vector<Trajectory>& trajectories,
                         const Partition& partition, std::size_t top_k,
                         const std::vector<std::size_t>& deltas, Metric metric,
                         const std::vector<std::uint64_t>& seeds) {
    if (!seeds.empty() && seeds.size() != trajectories.size()) {
        throw config_error("pmr: seed list does not match the corpus");
    }
    PmrAccumulator acc(partition, top_k, deltas, metric);
    for (std::size_t i = 0; i < trajectories.size(); ++i) {
        acc.add(trajectories[i], seeds.empty() ? i : seeds[i]);
    }
    return acc.finish();
}

MaxIntervals max_intervals(const PmrTable& table, double tau) {
    if (!(tau > 0.0) || tau > 1.0) {
        throw config_error("max_intervals: tau must be in (0, 1]");
    }
    MaxIntervals out;
    out.tau = tau;
    out.delta_max.assign(table.num_steps, 0);
    for (std::size_t t = 0; t < table.num_steps; ++t) {
        for (std::size_t di = 0; di < table.deltas.size(); ++di) {
            const std::size_t delta = table.deltas[di];
            if (delta < 1 || delta > t) continue;
            if (table.avg_at(t, di) >= tau) {
                out.delta_max[t] = std::max(out.delta_max[t], delta);
            }
        }
    }
    return out;
}

}  // namespace dito
