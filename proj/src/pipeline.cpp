#include "dito/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <optional>

namespace dito {

std::string variant_name(Variant v) {
    switch (v) {
        case Variant::dense: return "dense";
        case Variant::dito: return "dito";
        case Variant::input_baseline: return "input_baseline";
        case Variant::output_oracle: return "output_oracle";
    }
    throw internal_error("variant_name: unknown variant");
}

Variant parse_variant(const std::string& name) {
    if (name == "dense") return Variant::dense;
    if (name == "dito") return Variant::dito;
    if (name == "input_baseline") return Variant::input_baseline;
    if (name == "output_oracle") return Variant::output_oracle;
    throw config_error("unknown variant '" + name + "'");
}

void RunConfig::validate() const {
    model.validate();
    if (ratio < 0.0 || ratio > 1.0) {
        throw config_error("run config: ratio must be in [0, 1]");
    }
    if (penalty_lambda < 0.0) {
        throw config_error("run config: penalty_lambda must be >= 0");
    }
    if (!(tau > 0.0) || tau > 1.0) {
        throw config_error("run config: tau must be in (0, 1]");
    }
    if (pmr_top_k < 1) {
        throw config_error("run config: pmr_top_k must be >= 1");
    }
}

std::size_t pair_count(const RunConfig& cfg) {
    const Partition p = bipartition(cfg.model.num_tokens, cfg.partition);
    const auto want = static_cast<std::size_t>(
        std::floor(cfg.ratio * static_cast<double>(cfg.model.num_tokens) + 1e-9));
    return std::min(want, p.src.size());
}

namespace {

void finalize_flops(RunResult& result) {
    for (const FlopsEntry& e : result.flops.entries) {
        result.flops.attention_total += e.attention_flops;
        result.flops.matching_total += e.matching_flops;
    }
}

std::vector<std::size_t> ascending(std::size_t n) {
    std::vector<std::size_t> v(n);
    for (std::size_t i = 0; i < n; ++i) v[i] = i;
    return v;
}

PairSet match_on(const Matrix& feats, const Partition& partition, const RunConfig& cfg) {
    const Matrix a = similarity_map(feats, partition, cfg.metric);
    const Candidates c = match_candidates(a, partition);
    return select_top_k(c, cfg.ratio, partition.total());
}

}  // namespace

RunResult run_dense_variant(const RunConfig& cfg) {
    cfg.validate();
    const Trajectory traj = run_dense(cfg.model, cfg.latent_seed);
    RunResult result;
    result.variant = Variant::dense;
    result.config = cfg;
    result.config.variant = Variant::dense;
    result.final_latent = traj.latent_after.back();
    result.flops.entries = traj.flops;
    finalize_flops(result);
    result.history = SelectionHistory(cfg.model.num_tokens);
    result.schedule.num_steps = cfg.model.num_steps;
    result.schedule.tau = cfg.tau;
    result.schedule.full_steps = ascending(cfg.model.num_steps);
    return result;
}

RunResult run_dito(const RunConfig& cfg, const Schedule& schedule,
                   const Trajectory* dense_ref, MatchTrace* trace) {
    cfg.validate();
    const ModelConfig& mc = cfg.model;
    if (schedule.num_steps != mc.num_steps) {
        throw config_error("run_dito: schedule covers " + std::to_string(schedule.num_steps) +
                           " steps but the model has " + std::to_string(mc.num_steps));
    }

    enum class Role { match, reduce, full };
    std::vector<std::optional<Role>> roles(mc.num_steps);
    auto assign = [&](const std::vector<std::size_t>& steps, Role role) {
        for (const std::size_t t : steps) {
            if (t >= mc.num_steps || roles[t].has_value()) {
                throw config_error("run_dito: schedule roles do not partition the steps");
            }
            roles[t] = role;
        }
    };
    assign(schedule.match_steps, Role::match);
    assign(schedule.reduce_steps, Role::reduce);
    assign(schedule.full_steps, Role::full);
    for (const auto& r : roles) {
        if (!r.has_value()) {
            throw config_error("run_dito: schedule roles do not partition the steps");
        }
    }

    std::optional<Trajectory> local_ref;
    if (dense_ref == nullptr) {
        local_ref = run_dense(mc, cfg.latent_seed);
        dense_ref = &*local_ref;
    }

    const ModelParams params = init_model(mc);
    const Partition partition = bipartition(mc.num_tokens, cfg.partition);

    RunResult result;
    result.variant = Variant::dito;
    result.config = cfg;
    result.config.variant = Variant::dito;
    result.history = SelectionHistory(mc.num_tokens);
    result.schedule = schedule;

    std::vector<std::optional<PairSet>> stored(mc.num_blocks);
    Matrix latent = initial_latent(mc, cfg.latent_seed);
    for (std::size_t t = 0; t < mc.num_steps; ++t) {
        Matrix state = latent;
        for (std::size_t b = 0; b < mc.num_blocks; ++b) {
            const Matrix x = std::move(state);
            switch (*roles[t]) {
                case Role::match: {
                    const Matrix y = attention_block(x, params.blocks[b]);
                    const Matrix a = similarity_map(y, partition, cfg.metric);
                    Candidates cand = match_candidates(a, partition);
                    cand = apply_penalty(cand, result.history, cfg.penalty_lambda, cfg.ratio);
                    stored[b] = select_top_k(cand, cfg.ratio, partition.total());
                    result.flops.entries.push_back(
                        {t, b, mc.num_tokens, flops_attention(mc.num_tokens, mc.hidden_dim),
                         flops_matching(partition.dst.size(), partition.src.size(),
                                        mc.hidden_dim)});
                    if (trace != nullptr) {
                        trace->entries.push_back({t, b, stored[b]->serialize(), y});
                    }
                    state = add_rows(x, y);
                    break;
                }
                case Role::reduce: {
                    if (!stored[b].has_value()) {
                        throw internal_error("run_dito: reduce step " + std::to_string(t) +
                                             " has no stored pair set for block " +
                                             std::to_string(b));
                    }
                    const PairSet& pairs = *stored[b];
                    const Reduced red = reduce_tokens(x, pairs, cfg.mode);
                    const Matrix y_red = attention_block(red.tokens, params.blocks[b]);
                    const Matrix y_tilde = recover_tokens(y_red, red.map, mc.num_tokens);
                    result.recovery_errors.push_back(
                        {t, b, recovery_error(dense_ref->block_output[t][b], y_tilde)});
                    update_history(result.history, pairs);
                    result.flops.entries.push_back(
                        {t, b, red.tokens.rows,
                         flops_attention(red.tokens.rows, mc.hidden_dim), 0});
                    if (trace != nullptr) {
                        trace->entries.push_back({t, b, pairs.serialize(), Matrix{}});
                    }
                    state = add_rows(x, y_tilde);
                    break;
                }
                case Role::full: {
                    const Matrix y = attention_block(x, params.blocks[b]);
                    result.flops.entries.push_back(
                        {t, b, mc.num_tokens, flops_attention(mc.num_tokens, mc.hidden_dim), 0});
                    state = add_rows(x, y);
                    break;
                }
            }
        }
        latent = convex_blend(latent, state, mc.step_size);
    }

    result.final_latent = std::move(latent);
    finalize_flops(result);
    const std::size_t live_blocks =
        static_cast<std::size_t>(std::count_if(stored.begin(), stored.end(),
                                               [](const auto& p) { return p.has_value(); }));
    const std::size_t k = live_blocks > 0 ? stored[0]->k : 0;
    result.flops.metadata_bytes = live_blocks * k * 2 * sizeof(std::uint32_t);
    return result;
}

RunResult run_input_baseline(const RunConfig& cfg, const Trajectory* dense_ref,
                             MatchTrace* trace) {
    cfg.validate();
    const ModelConfig& mc = cfg.model;

    std::optional<Trajectory> local_ref;
    if (dense_ref == nullptr) {
        local_ref = run_dense(mc, cfg.latent_seed);
        dense_ref = &*local_ref;
    }

    const ModelParams params = init_model(mc);
    const Partition partition = bipartition(mc.num_tokens, cfg.partition);

    RunResult result;
    result.variant = Variant::input_baseline;
    result.config = cfg;
    result.config.variant = Variant::input_baseline;
    result.history = SelectionHistory(mc.num_tokens);
    result.schedule.num_steps = mc.num_steps;
    result.schedule.tau = cfg.tau;
    result.schedule.reduce_steps = ascending(mc.num_steps);

    Matrix latent = initial_latent(mc, cfg.latent_seed);
    for (std::size_t t = 0; t < mc.num_steps; ++t) {
        Matrix state = latent;
        for (std::size_t b = 0; b < mc.num_blocks; ++b) {
            const Matrix x = std::move(state);
            const PairSet pairs = match_on(x, partition, cfg);
            const Reduced red = reduce_tokens(x, pairs, cfg.mode);
            const Matrix y_red = attention_block(red.tokens, params.blocks[b]);
            const Matrix y_tilde = recover_tokens(y_red, red.map, mc.num_tokens);
            result.recovery_errors.push_back(
                {t, b, recovery_error(dense_ref->block_output[t][b], y_tilde)});
            update_history(result.history, pairs);
            result.flops.entries.push_back(
                {t, b, red.tokens.rows, flops_attention(red.tokens.rows, mc.hidden_dim),
                 flops_matching(partition.dst.size(), partition.src.size(), mc.hidden_dim)});
            if (trace != nullptr) {
                trace->entries.push_back({t, b, pairs.serialize(), x});
            }
            state = add_rows(x, y_tilde);
        }
        latent = convex_blend(latent, state, mc.step_size);
    }

    result.final_latent = std::move(latent);
    finalize_flops(result);
    return result;
}

RunResult run_output_oracle(const RunConfig& cfg, MatchTrace* trace) {
    cfg.validate();
    const ModelConfig& mc = cfg.model;
    const ModelParams params = init_model(mc);
    const Partition partition = bipartition(mc.num_tokens, cfg.partition);

    RunResult result;
    result.variant = Variant::output_oracle;
    result.config = cfg;
    result.config.variant = Variant::output_oracle;
    result.history = SelectionHistory(mc.num_tokens);
    result.schedule.num_steps = mc.num_steps;
    result.schedule.tau = cfg.tau;
    result.schedule.reduce_steps = ascending(mc.num_steps);

    Matrix latent = initial_latent(mc, cfg.latent_seed);
    for (std::size_t t = 0; t < mc.num_steps; ++t) {
        Matrix state = latent;
        for (std::size_t b = 0; b < mc.num_blocks; ++b) {
            const Matrix x = std::move(state);
            const Matrix y = attention_block(x, params.blocks[b]);
            const PairSet pairs = golden_match(y, partition, cfg.ratio, cfg.metric);
            const Matrix y_tilde = apply_pairs(y, pairs, cfg.mode);
            result.recovery_errors.push_back({t, b, recovery_error(y, y_tilde)});
            update_history(result.history, pairs);
            result.flops.entries.push_back(
                {t, b, mc.num_tokens, flops_attention(mc.num_tokens, mc.hidden_dim),
                 flops_matching(partition.dst.size(), partition.src.size(), mc.hidden_dim)});
            if (trace != nullptr) {
                trace->entries.push_back({t, b, pairs.serialize(), y});
            }
            state = add_rows(x, y);  // dense propagation
        }
        latent = convex_blend(latent, state, mc.step_size);
    }

    result.final_latent = std::move(latent);
    finalize_flops(result);
    return result;
}

RunResult run_variant(const RunConfig& cfg, const Schedule* schedule) {
    switch (cfg.variant) {
        case Variant::dense:
            return run_dense_variant(cfg);
        case Variant::dito:
            if (schedule == nullptr) {
                throw config_error("the dito variant needs a schedule");
            }
            return run_dito(cfg, *schedule);
        case Variant::input_baseline:
            return run_input_baseline(cfg);
        case Variant::output_oracle:
            return run_output_oracle(cfg);
    }
    throw internal_error("run_variant: unknown variant");
}

CompareResult compare_recovery(const RunConfig& cfg, const std::vector<std::uint64_t>& seeds) {
    cfg.validate();
    if (seeds.empty()) {
        throw config_error("compare_recovery: need at least one seed");
    }
    const Partition partition = bipartition(cfg.model.num_tokens, cfg.partition);

    CompareResult out;
    std::size_t below_or_on = 0;
    std::size_t strictly_below = 0;
    double sum_in = 0.0;
    double sum_out = 0.0;
    for (const std::uint64_t seed : seeds) {
        const Trajectory traj = run_dense(cfg.model, seed);
        for (std::size_t t = 0; t < cfg.model.num_steps; ++t) {
            for (std::size_t b = 0; b < cfg.model.num_blocks; ++b) {
                const Matrix& y = traj.block_output[t][b];
                const PairSet in_pairs = match_on(traj.block_input[t][b], partition, cfg);
                const PairSet out_pairs = golden_match(y, partition, cfg.ratio, cfg.metric);
                const double e_in = recovery_error(y, apply_pairs(y, in_pairs, cfg.mode));
                const double e_out = recovery_error(y, apply_pairs(y, out_pairs, cfg.mode));
                out.records.push_back({seed, t, b, e_in, e_out});
                if (e_out <= e_in + 1e-9) ++below_or_on;
                if (e_out < e_in) ++strictly_below;
                sum_in += e_in;
                sum_out += e_out;
            }
        }
    }
    const double n = static_cast<double>(out.records.size());
    out.below_or_on_fraction = static_cast<double>(below_or_on) / n;
    out.strictly_below_fraction = static_cast<double>(strictly_below) / n;
    out.mean_e_in = sum_in / n;
    out.mean_e_out = sum_out / n;
    return out;
}

}  // namespace dito
