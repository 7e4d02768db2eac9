#include "dito/config.hpp"

#include <algorithm>
#include <cctype>
#include <sstream>

#include "dito/io.hpp"

namespace dito {

void ExperimentConfig::validate() const {
    run_config(Variant::dense).validate();
    if (calibration_seeds.empty()) {
        throw config_error("config: calibration seeds must not be empty");
    }
    for (const std::size_t d : deltas) {
        if (d > model.num_steps - 1) {
            throw config_error("config: delta " + std::to_string(d) +
                               " exceeds num_steps - 1");
        }
    }
    if (pmr_top_k > model.num_tokens) {
        throw config_error("config: pmr_top_k exceeds the token count");
    }
    if (output_dir.empty()) {
        throw config_error("config: output dir must not be empty");
    }
}

std::vector<std::size_t> ExperimentConfig::effective_deltas() const {
    if (!deltas.empty()) return deltas;
    std::vector<std::size_t> all(model.num_steps);
    for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
    return all;
}

RunConfig ExperimentConfig::run_config(Variant variant) const {
    RunConfig cfg;
    cfg.model = model;
    cfg.ratio = ratio;
    cfg.penalty_lambda = penalty_lambda;
    cfg.tau = tau;
    cfg.pmr_top_k = pmr_top_k;
    cfg.metric = metric;
    cfg.mode = mode;
    cfg.partition = partition;
    cfg.variant = variant;
    cfg.latent_seed = calibration_seeds.empty() ? 0 : calibration_seeds.front();
    return cfg;
}

namespace {

std::string trim(const std::string& s) {
    std::size_t a = 0;
    std::size_t b = s.size();
    while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
    while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
    return s.substr(a, b - a);
}

std::uint64_t to_u64(const std::string& key, const std::string& value) {
    try {
        std::size_t used = 0;
        const std::uint64_t v = std::stoull(value, &used);
        if (used != value.size()) throw std::invalid_argument(value);
        return v;
    } catch (const std::exception&) {
        throw config_error("config: bad integer for '" + key + "': '" + value + "'");
    }
}

double to_double(const std::string& key, const std::string& value) {
    try {
        return parse_double(value);
    } catch (const std::exception&) {
        throw config_error("config: bad number for '" + key + "': '" + value + "'");
    }
}

template <typename T>
std::vector<T> to_int_list(const std::string& key, const std::string& value) {
    std::vector<T> out;
    std::istringstream in(value);
    std::string field;
    while (std::getline(in, field, ',')) {
        out.push_back(static_cast<T>(to_u64(key, trim(field))));
    }
    if (out.empty()) {
        throw config_error("config: empty list for '" + key + "'");
    }
    return out;
}

}  // namespace

ExperimentConfig parse_experiment_config(const std::string& text) {
    ExperimentConfig cfg;
    std::string section;
    std::istringstream in(text);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        const std::string stripped = trim(line.substr(0, line.find('#')));
        if (stripped.empty()) continue;
        if (stripped.front() == '[') {
            if (stripped.back() != ']') {
                throw config_error("config line " + std::to_string(lineno) +
                                   ": malformed section header");
            }
            section = trim(stripped.substr(1, stripped.size() - 2));
            if (section != "model" && section != "tr" && section != "calibration" &&
                section != "output") {
                throw config_error("config: unknown section [" + section + "]");
            }
            continue;
        }
        const std::size_t eq = stripped.find('=');
        if (eq == std::string::npos) {
            throw config_error("config line " + std::to_string(lineno) +
                               ": expected key = value");
        }
        const std::string key = trim(stripped.substr(0, eq));
        const std::string value = trim(stripped.substr(eq + 1));
        if (section.empty()) {
            throw config_error("config: key '" + key + "' appears before any section");
        }

        if (section == "model") {
            if (key == "num_tokens") {
                cfg.model.num_tokens = static_cast<std::size_t>(to_u64(key, value));
            } else if (key == "hidden_dim") {
                cfg.model.hidden_dim = static_cast<std::size_t>(to_u64(key, value));
            } else if (key == "num_blocks") {
                cfg.model.num_blocks = static_cast<std::size_t>(to_u64(key, value));
            } else if (key == "num_steps") {
                cfg.model.num_steps = static_cast<std::size_t>(to_u64(key, value));
            } else if (key == "step_size") {
                cfg.model.step_size = to_double(key, value);
            } else if (key == "weight_seed") {
                cfg.model.weight_seed = to_u64(key, value);
            } else {
                throw config_error("config: unknown key '" + key + "' in [model]");
            }
        } else if (section == "tr") {
            if (key == "ratio") {
                cfg.ratio = to_double(key, value);
            } else if (key == "penalty_lambda") {
                cfg.penalty_lambda = to_double(key, value);
            } else if (key == "tau") {
                cfg.tau = to_double(key, value);
            } else if (key == "pmr_top_k") {
                cfg.pmr_top_k = static_cast<std::size_t>(to_u64(key, value));
            } else if (key == "metric") {
                cfg.metric = parse_metric(value);
            } else if (key == "mode") {
                cfg.mode = parse_mode(value);
            } else if (key == "partition") {
                cfg.partition.kind = parse_partition_kind(value);
            } else if (key == "stride") {
                cfg.partition.stride = static_cast<std::size_t>(to_u64(key, value));
            } else if (key == "partition_seed") {
                cfg.partition.seed = to_u64(key, value);
            } else {
                throw config_error("config: unknown key '" + key + "' in [tr]");
            }
        } else if (section == "calibration") {
            if (key == "seeds") {
                cfg.calibration_seeds = to_int_list<std::uint64_t>(key, value);
            } else if (key == "deltas") {
                cfg.deltas = to_int_list<std::size_t>(key, value);
                std::sort(cfg.deltas.begin(), cfg.deltas.end());
                cfg.deltas.erase(std::unique(cfg.deltas.begin(), cfg.deltas.end()),
                                 cfg.deltas.end());
            } else {
                throw config_error("config: unknown key '" + key + "' in [calibration]");
            }
        } else {  // output
            if (key == "dir") {
                cfg.output_dir = value;
            } else {
                throw config_error("config: unknown key '" + key + "' in [output]");
            }
        }
    }
    cfg.validate();
    return cfg;
}

ExperimentConfig load_experiment_config(const std::filesystem::path& path) {
    return parse_experiment_config(read_text_file(path));
}

}  // namespace dito
