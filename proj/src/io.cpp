#include "dito/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace dito {

std::string format_double(double value) {
    char buf[40];
    const auto res = std::to_chars(buf, buf + sizeof(buf), value);
    if (res.ec != std::errc()) {
        throw internal_error("format_double: conversion failed");
    }
    return std::string(buf, res.ptr);
}

double parse_double(const std::string& text) {
    double value = 0.0;
    const char* end = text.data() + text.size();
    const auto res = std::from_chars(text.data(), end, value);
    if (res.ec != std::errc() || res.ptr != end || text.empty()) {
        throw config_error("bad numeric field '" + text + "'");
    }
    return value;
}

namespace {

std::uint64_t parse_u64(const std::string& text) {
    std::uint64_t value = 0;
    const char* end = text.data() + text.size();
    const auto res = std::from_chars(text.data(), end, value);
    if (res.ec != std::errc() || res.ptr != end || text.empty()) {
        throw config_error("bad integer field '" + text + "'");
    }
    return value;
}

std::size_t parse_size(const std::string& text) {
    return static_cast<std::size_t>(parse_u64(text));
}

std::vector<std::string> split(const std::string& line, char sep) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        const std::size_t pos = line.find(sep, start);
        if (pos == std::string::npos) {
            out.push_back(line.substr(start));
            return out;
        }
        out.push_back(line.substr(start, pos - start));
        start = pos + 1;
    }
}

template <typename T>
std::string join(const std::vector<T>& values) {
    std::string out;
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (i > 0) out += ',';
        out += std::to_string(values[i]);
    }
    return out;
}

template <typename T>
std::vector<T> parse_int_list(const std::string& text) {
    std::vector<T> out;
    if (text.empty()) return out;
    for (const std::string& field : split(text, ',')) {
        out.push_back(static_cast<T>(parse_u64(field)));
    }
    return out;
}

// Lines of a CSV payload: '#' metadata pairs, then a fixed header row, then
// data rows.
struct CsvDoc {
    std::vector<std::pair<std::string, std::string>> meta;
    std::vector<std::vector<std::string>> rows;

    const std::string& meta_value(const std::string& key) const {
        for (const auto& [k, v] : meta) {
            if (k == key) return v;
        }
        throw config_error("missing '# " + key + "' metadata line");
    }

    const std::string* find_meta(const std::string& key) const {
        for (const auto& [k, v] : meta) {
            if (k == key) return &v;
        }
        return nullptr;
    }
};

CsvDoc parse_csv(const std::string& text, const std::string& format,
                 const std::string& header) {
    CsvDoc doc;
    bool saw_header = false;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (line[0] == '#') {
            std::string body = line.substr(1);
            if (!body.empty() && body[0] == ' ') body.erase(0, 1);
            const std::size_t sp = body.find(' ');
            if (sp == std::string::npos) {
                doc.meta.emplace_back(body, "");
            } else {
                doc.meta.emplace_back(body.substr(0, sp), body.substr(sp + 1));
            }
            continue;
        }
        if (!saw_header) {
            if (line != header) {
                throw config_error("expected header '" + header + "', got '" + line + "'");
            }
            saw_header = true;
            continue;
        }
        doc.rows.push_back(split(line, ','));
    }
    if (!saw_header) {
        throw config_error("missing header row '" + header + "'");
    }
    if (!format.empty() && (doc.meta.empty() || doc.meta.front().first != format ||
                            doc.meta.front().second != "v1")) {
        throw config_error("file is not a '" + format + " v1' document");
    }
    return doc;
}

void expect_fields(const std::vector<std::string>& row, std::size_t n) {
    if (row.size() != n) {
        throw config_error("expected " + std::to_string(n) + " fields, got " +
                           std::to_string(row.size()));
    }
}

}  // namespace

std::string metric_name(Metric m) {
    return m == Metric::cosine ? "cosine" : "neg_l2";
}

Metric parse_metric(const std::string& name) {
    if (name == "cosine") return Metric::cosine;
    if (name == "neg_l2") return Metric::neg_l2;
    throw config_error("unknown metric '" + name + "'");
}

std::string mode_name(ReduceMode m) {
    return m == ReduceMode::prune ? "prune" : "merge";
}

ReduceMode parse_mode(const std::string& name) {
    if (name == "prune") return ReduceMode::prune;
    if (name == "merge") return ReduceMode::merge;
    throw config_error("unknown reduce mode '" + name + "'");
}

std::string partition_kind_name(BipartitionStrategy::Kind k) {
    return k == BipartitionStrategy::Kind::strided ? "strided" : "random";
}

BipartitionStrategy::Kind parse_partition_kind(const std::string& name) {
    if (name == "strided") return BipartitionStrategy::Kind::strided;
    if (name == "random") return BipartitionStrategy::Kind::random_pick;
    throw config_error("unknown partition kind '" + name + "'");
}

void write_text_file(const std::filesystem::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw io_error("cannot open '" + path.string() + "' for writing");
    }
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.flush();
    if (!out) {
        throw io_error("failed writing '" + path.string() + "'");
    }
}

std::string read_text_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw io_error("cannot open '" + path.string() + "' for reading");
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    if (in.bad()) {
        throw io_error("failed reading '" + path.string() + "'");
    }
    return std::move(buf).str();
}

std::string pmr_to_csv(const PmrTable& table) {
    std::string out;
    out += "# pmr v1\n";
    out += "# num_steps " + std::to_string(table.num_steps) + "\n";
    out += "# num_blocks " + std::to_string(table.num_blocks) + "\n";
    out += "# top_k " + std::to_string(table.top_k) + "\n";
    out += "# metric " + metric_name(table.metric) + "\n";
    out += "# seeds " + join(table.seeds) + "\n";
    out += "# deltas " + join(table.deltas) + "\n";
    out += "t,b,delta,pmr\n";
    for (std::size_t t = 0; t < table.num_steps; ++t) {
        for (std::size_t b = 0; b < table.num_blocks; ++b) {
            for (std::size_t di = 0; di < table.deltas.size(); ++di) {
                if (!table.present(t, table.deltas[di])) continue;
                out += std::to_string(t) + ',' + std::to_string(b) + ',' +
                       std::to_string(table.deltas[di]) + ',' +
                       format_double(table.raw_at(t, b, di)) + '\n';
            }
        }
    }
    return out;
}

PmrTable pmr_from_csv(const std::string& text) {
    const CsvDoc doc = parse_csv(text, "pmr", "t,b,delta,pmr");
    PmrTable table;
    table.num_steps = parse_size(doc.meta_value("num_steps"));
    table.num_blocks = parse_size(doc.meta_value("num_blocks"));
    table.top_k = parse_size(doc.meta_value("top_k"));
    table.metric = parse_metric(doc.meta_value("metric"));
    table.seeds = parse_int_list<std::uint64_t>(doc.meta_value("seeds"));
    table.deltas = parse_int_list<std::size_t>(doc.meta_value("deltas"));
    if (table.num_steps == 0 || table.num_blocks == 0 || table.deltas.empty()) {
        throw config_error("pmr table metadata is incomplete");
    }
    table.raw.assign(table.num_steps * table.num_blocks * table.deltas.size(),
                     PmrTable::absent);
    for (const auto& row : doc.rows) {
        expect_fields(row, 4);
        const std::size_t t = parse_size(row[0]);
        const std::size_t b = parse_size(row[1]);
        const std::size_t di = table.delta_index(parse_size(row[2]));
        if (t >= table.num_steps || b >= table.num_blocks || di == PmrTable::npos) {
            throw config_error("pmr row outside the declared table");
        }
        table.raw[(t * table.num_blocks + b) * table.deltas.size() + di] =
            parse_double(row[3]);
    }
    recompute_block_averages(table);
    return table;
}

std::string delta_max_to_csv(const MaxIntervals& intervals) {
    std::string out;
    out += "# delta_max v1\n";
    out += "# tau " + format_double(intervals.tau) + "\n";
    out += "t,delta_max\n";
    for (std::size_t t = 0; t < intervals.delta_max.size(); ++t) {
        out += std::to_string(t) + ',' + std::to_string(intervals.delta_max[t]) + '\n';
    }
    return out;
}

MaxIntervals delta_max_from_csv(const std::string& text) {
    const CsvDoc doc = parse_csv(text, "delta_max", "t,delta_max");
    MaxIntervals out;
    out.tau = parse_double(doc.meta_value("tau"));
    for (const auto& row : doc.rows) {
        expect_fields(row, 2);
        if (parse_size(row[0]) != out.delta_max.size()) {
            throw config_error("delta_max rows must list steps 0..T-1 in order");
        }
        out.delta_max.push_back(parse_size(row[1]));
    }
    return out;
}

std::string schedule_to_csv(const Schedule& schedule) {
    std::vector<std::string> role(schedule.num_steps);
    auto tag = [&](const std::vector<std::size_t>& steps, const char* name) {
        for (const std::size_t t : steps) {
            if (t >= schedule.num_steps || !role[t].empty()) {
                throw internal_error("schedule_to_csv: roles do not partition the steps");
            }
            role[t] = name;
        }
    };
    tag(schedule.match_steps, "match");
    tag(schedule.reduce_steps, "reduce");
    tag(schedule.full_steps, "full");

    std::string out;
    out += "# schedule v1\n";
    out += "# tau " + format_double(schedule.tau) + "\n";
    out += "# delta_max " + join(schedule.delta_max) + "\n";
    out += "t,role\n";
    for (std::size_t t = 0; t < schedule.num_steps; ++t) {
        if (role[t].empty()) {
            throw internal_error("schedule_to_csv: roles do not partition the steps");
        }
        out += std::to_string(t) + ',' + role[t] + '\n';
    }
    return out;
}

Schedule schedule_from_csv(const std::string& text) {
    const CsvDoc doc = parse_csv(text, "schedule", "t,role");
    Schedule s;
    // Hand-written schedules may omit the provenance lines emitted by calibrate.
    if (const std::string* tau = doc.find_meta("tau")) {
        s.tau = parse_double(*tau);
    }
    if (const std::string* dm = doc.find_meta("delta_max")) {
        s.delta_max = parse_int_list<std::size_t>(*dm);
    }
    for (const auto& row : doc.rows) {
        expect_fields(row, 2);
        const std::size_t t = parse_size(row[0]);
        if (t != s.num_steps) {
            throw config_error("schedule rows must list steps 0..T-1 in order");
        }
        if (row[1] == "match") {
            s.match_steps.push_back(t);
        } else if (row[1] == "reduce") {
            s.reduce_steps.push_back(t);
        } else if (row[1] == "full") {
            s.full_steps.push_back(t);
        } else {
            throw config_error("unknown schedule role '" + row[1] + "'");
        }
        ++s.num_steps;
    }
    if (s.num_steps == 0) {
        throw config_error("schedule file has no steps");
    }
    return s;
}

std::string scatter_to_csv(const std::vector<ScatterRecord>& records) {
    std::string out = "seed,t,b,e_in,e_out\n";
    for (const ScatterRecord& r : records) {
        out += std::to_string(r.seed) + ',' + std::to_string(r.step) + ',' +
               std::to_string(r.block) + ',' + format_double(r.e_in) + ',' +
               format_double(r.e_out) + '\n';
    }
    return out;
}

std::vector<ScatterRecord> scatter_from_csv(const std::string& text) {
    const CsvDoc doc = parse_csv(text, "", "seed,t,b,e_in,e_out");
    std::vector<ScatterRecord> records;
    for (const auto& row : doc.rows) {
        expect_fields(row, 5);
        ScatterRecord r;
        r.seed = parse_u64(row[0]);
        r.step = parse_size(row[1]);
        r.block = parse_size(row[2]);
        r.e_in = parse_double(row[3]);
        r.e_out = parse_double(row[4]);
        records.push_back(r);
    }
    return records;
}

Heatmap make_heatmap(const SelectionHistory& history) {
    Heatmap grid;
    const auto side = static_cast<std::size_t>(
        std::llround(std::sqrt(static_cast<double>(history.counts.size()))));
    if (side * side != history.counts.size()) {
        throw internal_error("make_heatmap: token count is not a perfect square");
    }
    grid.side = side;
    grid.counts = history.counts;
    return grid;
}

std::string heatmap_to_csv(const Heatmap& grid) {
    std::string out;
    out += "# heatmap v1\n";
    out += "# side " + std::to_string(grid.side) + "\n";
    for (std::size_t i = 0; i < grid.side; ++i) {
        for (std::size_t j = 0; j < grid.side; ++j) {
            out += std::to_string(grid.counts[i * grid.side + j]);
            out += j + 1 < grid.side ? ',' : '\n';
        }
    }
    return out;
}

Heatmap heatmap_from_csv(const std::string& text) {
    Heatmap grid;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (line[0] == '#') {
            if (line.rfind("# side ", 0) == 0) {
                grid.side = parse_size(line.substr(7));
            } else if (line != "# heatmap v1") {
                throw config_error("file is not a 'heatmap v1' document");
            }
            continue;
        }
        for (const std::string& field : split(line, ',')) {
            grid.counts.push_back(parse_u64(field));
        }
    }
    if (grid.side * grid.side != grid.counts.size()) {
        throw config_error("heatmap is not a full side x side grid");
    }
    return grid;
}

nlohmann::ordered_json run_config_to_json(const RunConfig& cfg) {
    nlohmann::ordered_json j;
    j["model"] = {{"num_tokens", cfg.model.num_tokens},
                  {"hidden_dim", cfg.model.hidden_dim},
                  {"num_blocks", cfg.model.num_blocks},
                  {"num_steps", cfg.model.num_steps},
                  {"step_size", cfg.model.step_size},
                  {"weight_seed", cfg.model.weight_seed}};
    j["ratio"] = cfg.ratio;
    j["penalty_lambda"] = cfg.penalty_lambda;
    j["tau"] = cfg.tau;
    j["pmr_top_k"] = cfg.pmr_top_k;
    j["metric"] = metric_name(cfg.metric);
    j["mode"] = mode_name(cfg.mode);
    j["partition"] = {{"kind", partition_kind_name(cfg.partition.kind)},
                      {"stride", cfg.partition.stride},
                      {"seed", cfg.partition.seed}};
    j["variant"] = variant_name(cfg.variant);
    j["latent_seed"] = cfg.latent_seed;
    return j;
}

RunConfig run_config_from_json(const nlohmann::ordered_json& j) {
    RunConfig cfg;
    const auto& m = j.at("model");
    cfg.model.num_tokens = m.at("num_tokens").get<std::size_t>();
    cfg.model.hidden_dim = m.at("hidden_dim").get<std::size_t>();
    cfg.model.num_blocks = m.at("num_blocks").get<std::size_t>();
    cfg.model.num_steps = m.at("num_steps").get<std::size_t>();
    cfg.model.step_size = m.at("step_size").get<double>();
    cfg.model.weight_seed = m.at("weight_seed").get<std::uint64_t>();
    cfg.ratio = j.at("ratio").get<double>();
    cfg.penalty_lambda = j.at("penalty_lambda").get<double>();
    cfg.tau = j.at("tau").get<double>();
    cfg.pmr_top_k = j.at("pmr_top_k").get<std::size_t>();
    cfg.metric = parse_metric(j.at("metric").get<std::string>());
    cfg.mode = parse_mode(j.at("mode").get<std::string>());
    const auto& p = j.at("partition");
    cfg.partition.kind = parse_partition_kind(p.at("kind").get<std::string>());
    cfg.partition.stride = p.at("stride").get<std::size_t>();
    cfg.partition.seed = p.at("seed").get<std::uint64_t>();
    cfg.variant = parse_variant(j.at("variant").get<std::string>());
    cfg.latent_seed = j.at("latent_seed").get<std::uint64_t>();
    return cfg;
}

nlohmann::ordered_json result_to_json(const RunResult& result) {
    nlohmann::ordered_json j;
    j["schema_version"] = 1;
    j["variant"] = variant_name(result.variant);
    j["config"] = run_config_to_json(result.config);
    j["schedule"] = {{"num_steps", result.schedule.num_steps},
                     {"tau", result.schedule.tau},
                     {"delta_max", result.schedule.delta_max},
                     {"match_steps", result.schedule.match_steps},
                     {"reduce_steps", result.schedule.reduce_steps},
                     {"full_steps", result.schedule.full_steps}};
    auto errors = nlohmann::ordered_json::array();
    for (const RecoveryRecord& r : result.recovery_errors) {
        errors.push_back({{"step", r.step}, {"block", r.block}, {"error", r.error}});
    }
    j["recovery_errors"] = std::move(errors);
    auto entries = nlohmann::ordered_json::array();
    for (const FlopsEntry& e : result.flops.entries) {
        entries.push_back({{"step", e.step},
                           {"block", e.block},
                           {"tokens", e.tokens},
                           {"attention", e.attention_flops},
                           {"matching", e.matching_flops}});
    }
    j["flops"] = {{"attention_total", result.flops.attention_total},
                  {"matching_total", result.flops.matching_total},
                  {"metadata_bytes", result.flops.metadata_bytes},
                  {"entries", std::move(entries)}};
    j["selection_counts"] = result.history.counts;
    j["final_latent"] = {{"rows", result.final_latent.rows},
                         {"cols", result.final_latent.cols},
                         {"data", result.final_latent.data}};
    return j;
}

RunResult result_from_json(const nlohmann::ordered_json& j) {
    if (j.at("schema_version").get<int>() != 1) {
        throw config_error("unsupported result schema version");
    }
    RunResult result;
    result.variant = parse_variant(j.at("variant").get<std::string>());
    result.config = run_config_from_json(j.at("config"));
    const auto& s = j.at("schedule");
    result.schedule.num_steps = s.at("num_steps").get<std::size_t>();
    result.schedule.tau = s.at("tau").get<double>();
    result.schedule.delta_max = s.at("delta_max").get<std::vector<std::size_t>>();
    result.schedule.match_steps = s.at("match_steps").get<std::vector<std::size_t>>();
    result.schedule.reduce_steps = s.at("reduce_steps").get<std::vector<std::size_t>>();
    result.schedule.full_steps = s.at("full_steps").get<std::vector<std::size_t>>();
    for (const auto& r : j.at("recovery_errors")) {
        result.recovery_errors.push_back({r.at("step").get<std::size_t>(),
                                          r.at("block").get<std::size_t>(),
                                          r.at("error").get<double>()});
    }
    const auto& f = j.at("flops");
    result.flops.attention_total = f.at("attention_total").get<std::uint64_t>();
    result.flops.matching_total = f.at("matching_total").get<std::uint64_t>();
    result.flops.metadata_bytes = f.at("metadata_bytes").get<std::uint64_t>();
    for (const auto& e : f.at("entries")) {
        result.flops.entries.push_back({e.at("step").get<std::size_t>(),
                                        e.at("block").get<std::size_t>(),
                                        e.at("tokens").get<std::size_t>(),
                                        e.at("attention").get<std::uint64_t>(),
                                        e.at("matching").get<std::uint64_t>()});
    }
    result.history.counts = j.at("selection_counts").get<std::vector<std::uint64_t>>();
    result.final_latent.rows = j.at("final_latent").at("rows").get<std::size_t>();
    result.final_latent.cols = j.at("final_latent").at("cols").get<std::size_t>();
    result.final_latent.data = j.at("final_latent").at("data").get<std::vector<double>>();
    if (result.final_latent.data.size() !=
        result.final_latent.rows * result.final_latent.cols) {
        throw config_error("final_latent data does not match its shape");
    }
    return result;
}

nlohmann::ordered_json summary_to_json(const CompareResult& compare, const RunConfig& cfg,
                                       std::size_t num_seeds) {
    nlohmann::ordered_json j;
    j["schema_version"] = 1;
    j["metric"] = metric_name(cfg.metric);
    j["mode"] = mode_name(cfg.mode);
    j["ratio"] = cfg.ratio;
    j["num_seeds"] = num_seeds;
    j["num_samples"] = compare.records.size();
    j["below_or_on_fraction"] = compare.below_or_on_fraction;
    j["strictly_below_fraction"] = compare.strictly_below_fraction;
    j["mean_e_in"] = compare.mean_e_in;
    j["mean_e_out"] = compare.mean_e_out;
    return j;
}

}  // namespace dito
