#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "dito/error.hpp"
#include "dito/pipeline.hpp"
#include "dito/pmr.hpp"
#include "dito/scheduler.hpp"

namespace dito {

// Shortest decimal rendering that parses back to the identical double; every
// numeric field in the CSV/JSON files goes through these two.
std::string format_double(double value);
double parse_double(const std::string& text);

std::string metric_name(Metric m);
Metric parse_metric(const std::string& name);
std::string mode_name(ReduceMode m);
ReduceMode parse_mode(const std::string& name);
std::string partition_kind_name(BipartitionStrategy::Kind k);
BipartitionStrategy::Kind parse_partition_kind(const std::string& name);

// Whole-file helpers; failures surface as io_error.
void write_text_file(const std::filesystem::path& path, const std::string& content);
std::string read_text_file(const std::filesystem::path& path);

// CSV formats. Each file starts with '#' metadata lines (format name and
// version first), then a column-header row, then data rows; parsers restore
// the exact in-memory value that was written.
std::string pmr_to_csv(const PmrTable& table);
PmrTable pmr_from_csv(const std::string& text);

std::string delta_max_to_csv(const MaxIntervals& intervals);
MaxIntervals delta_max_from_csv(const std::string& text);

std::string schedule_to_csv(const Schedule& schedule);
Schedule schedule_from_csv(const std::string& text);

std::string scatter_to_csv(const std::vector<ScatterRecord>& records);
std::vector<ScatterRecord> scatter_from_csv(const std::string& text);

// Selection counts laid out on the token grid.
struct Heatmap {
    std::size_t side = 0;
    std::vector<std::uint64_t> counts;

    bool operator==(const Heatmap& other) const = default;
};

Heatmap make_heatmap(const SelectionHistory& history);
std::string heatmap_to_csv(const Heatmap& grid);
Heatmap heatmap_from_csv(const std::string& text);

nlohmann::ordered_json run_config_to_json(const RunConfig& cfg);
RunConfig run_config_from_json(const nlohmann::ordered_json& j);

nlohmann::ordered_json result_to_json(const RunResult& result);
RunResult result_from_json(const nlohmann::ordered_json& j);

nlohmann::ordered_json summary_to_json(const CompareResult& compare, const RunConfig& cfg,
                                       std::size_t num_seeds);

}  // namespace dito
