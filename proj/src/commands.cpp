#include "dito/commands.hpp"

#include <algorithm>
#include <cstdio>
#include <iomanip>
#include <map>
#include <sstream>

#include "dito/io.hpp"

namespace dito {

namespace {

namespace fs = std::filesystem;

template <typename Fn>
int guarded(std::ostream& err, Fn&& fn) {
    try {
        fn();
        return 0;
    } catch (const io_error& e) {
        err << "error: " << e.what() << "\n";
        return 2;
    } catch (const fs::filesystem_error& e) {
        err << "error: " << e.what() << "\n";
        return 2;
    } catch (const internal_error& e) {
        err << "internal error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    }
}

void write_json_file(const fs::path& path, const nlohmann::ordered_json& j) {
    write_text_file(path, j.dump(2) + "\n");
}

}  // namespace

int cmd_calibrate(const ExperimentConfig& cfg, std::ostream& out, std::ostream& err) {
    return guarded(err, [&] {
        cfg.validate();
        const Partition partition = bipartition(cfg.model.num_tokens, cfg.partition);
        PmrAccumulator acc(partition, cfg.pmr_top_k, cfg.effective_deltas(), cfg.metric);
        const ModelParams params = init_model(cfg.model);
        for (const std::uint64_t seed : cfg.calibration_seeds) {
            acc.add(run_dense(cfg.model, params, seed), seed);
        }
        const PmrTable table = acc.finish();
        const MaxIntervals intervals = max_intervals(table, cfg.tau);
        const Schedule schedule = build_schedule(intervals, cfg.model.num_steps);

        const fs::path dir(cfg.output_dir);
        fs::create_directories(dir);
        write_text_file(dir / "pmr.csv", pmr_to_csv(table));
        write_text_file(dir / "delta_max.csv", delta_max_to_csv(intervals));
        write_text_file(dir / "schedule.csv", schedule_to_csv(schedule));
        out << "calibrated over " << cfg.calibration_seeds.size() << " seeds: "
            << schedule.match_steps.size() << " match, " << schedule.reduce_steps.size()
            << " reduce, " << schedule.full_steps.size() << " full -> " << dir.string()
            << "\n";
    });
}

int cmd_run(const ExperimentConfig& cfg, Variant variant,
            const std::optional<std::filesystem::path>& schedule_path, std::ostream& out,
            std::ostream& err) {
    return guarded(err, [&] {
        cfg.validate();
        std::optional<Schedule> schedule;
        if (variant == Variant::dito) {
            if (!schedule_path.has_value()) {
                throw config_error("the dito variant requires --schedule");
            }
            schedule = schedule_from_csv(read_text_file(*schedule_path));
        } else if (schedule_path.has_value()) {
            throw config_error("--schedule only applies to the dito variant");
        }

        const RunConfig rc = cfg.run_config(variant);
        const RunResult result = run_variant(rc, schedule.has_value() ? &*schedule : nullptr);

        // One subdirectory per variant so that results from several runs can sit
        // side by side and feed a single `report` invocation.
        const fs::path dir = fs::path(cfg.output_dir) / variant_name(variant);
        fs::create_directories(dir);
        write_json_file(dir / "result.json", result_to_json(result));
        write_text_file(dir / "heatmap.csv", heatmap_to_csv(make_heatmap(result.history)));
        out << variant_name(variant) << " run: attention " << result.flops.attention_total
            << " FLOPs, matching " << result.flops.matching_total << " FLOPs, "
            << result.recovery_errors.size() << " recovery samples -> " << dir.string()
            << "\n";
    });
}

int cmd_compare(const ExperimentConfig& cfg, std::size_t num_seeds, std::ostream& out,
                std::ostream& err) {
    return guarded(err, [&] {
        cfg.validate();
        if (num_seeds < 1) {
            throw config_error("cmd_compare: need at least one seed");
        }
        std::vector<std::uint64_t> seeds(num_seeds);
        for (std::size_t i = 0; i < num_seeds; ++i) seeds[i] = i;

        const RunConfig rc = cfg.run_config(Variant::dense);
        const CompareResult compare = compare_recovery(rc, seeds);

        const fs::path dir(cfg.output_dir);
        fs::create_directories(dir);
        write_text_file(dir / "scatter.csv", scatter_to_csv(compare.records));
        write_json_file(dir / "summary.json", summary_to_json(compare, rc, num_seeds));
        out << "compared " << compare.records.size() << " samples over " << num_seeds
            << " seeds: below-or-on-diagonal fraction "
            << format_double(compare.below_or_on_fraction) << " -> " << dir.string() << "\n";
    });
}

namespace {

struct VariantAggregate {
    std::size_t runs = 0;
    std::size_t error_samples = 0;
    double error_sum = 0.0;
    double total_flops_sum = 0.0;
    double saving_sum = 0.0;
    double metadata_sum = 0.0;
    std::uint64_t max_selection = 0;
};

std::string fixed2(double value) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.2f", value);
    return buf;
}

}  // namespace

int cmd_report(const std::filesystem::path& results_dir, std::ostream& out,
               std::ostream& err) {
    return guarded(err, [&] {
        if (!fs::is_directory(results_dir)) {
            throw config_error("'" + results_dir.string() + "' is not a directory");
        }
        std::vector<fs::path> files;
        for (const auto& entry : fs::recursive_directory_iterator(results_dir)) {
            if (entry.is_regular_file() && entry.path().filename() == "result.json") {
                files.push_back(entry.path());
            }
        }
        std::sort(files.begin(), files.end());
        if (files.empty()) {
            throw config_error("no result.json files under '" + results_dir.string() + "'");
        }

        std::map<Variant, VariantAggregate> agg;
        for (const fs::path& file : files) {
            RunResult result;
            try {
                result = result_from_json(
                    nlohmann::ordered_json::parse(read_text_file(file)));
            } catch (const io_error&) {
                throw;
            } catch (const std::exception& e) {
                throw config_error(file.string() + ": " + e.what());
            }
            VariantAggregate& a = agg[result.variant];
            ++a.runs;
            for (const RecoveryRecord& r : result.recovery_errors) {
                ++a.error_samples;
                a.error_sum += r.error;
            }
            const ModelConfig& m = result.config.model;
            const double dense_total = static_cast<double>(
                static_cast<std::uint64_t>(m.num_steps) * m.num_blocks *
                flops_attention(m.num_tokens, m.hidden_dim));
            const double total = static_cast<double>(result.flops.attention_total +
                                                     result.flops.matching_total);
            a.total_flops_sum += total;
            a.saving_sum += 1.0 - total / dense_total;
            a.metadata_sum += static_cast<double>(result.flops.metadata_bytes);
            a.max_selection = std::max(a.max_selection, result.history.max_count());
        }

        auto rows = nlohmann::ordered_json::array();
        std::ostringstream table;
        table << std::left << std::setw(16) << "variant" << std::right << std::setw(6)
              << "runs" << std::setw(16) << "flops_saving_%" << std::setw(22)
              << "mean_recovery_error" << std::setw(21) << "max_selection_count" << "\n";
        for (const auto& [variant, a] : agg) {
            const double mean_error =
                a.error_samples == 0 ? 0.0 : a.error_sum / static_cast<double>(a.error_samples);
            const double runs = static_cast<double>(a.runs);
            const double saving_pct = 100.0 * a.saving_sum / runs;
            rows.push_back({{"variant", variant_name(variant)},
                            {"runs", a.runs},
                            {"mean_recovery_error", mean_error},
                            {"mean_total_flops", a.total_flops_sum / runs},
                            {"flops_saving_pct", saving_pct},
                            {"mean_metadata_bytes", a.metadata_sum / runs},
                            {"max_selection_count", a.max_selection}});
            table << std::left << std::setw(16) << variant_name(variant) << std::right
                  << std::setw(6) << a.runs << std::setw(16) << fixed2(saving_pct)
                  << std::setw(22) << format_double(mean_error) << std::setw(21)
                  << a.max_selection << "\n";
        }

        nlohmann::ordered_json j;
        j["schema_version"] = 1;
        j["num_results"] = files.size();
        j["rows"] = std::move(rows);
        write_json_file(results_dir / "report.json", j);
        out << table.str();
    });
}

}  // namespace dito
