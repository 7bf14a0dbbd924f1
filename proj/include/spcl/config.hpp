#pragma once

#include <cstdint>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "spcl/data.hpp"
#include "spcl/errors.hpp"
#include "spcl/trainer.hpp"

namespace spcl {

// Everything a run needs: a TrainConfig plus dataset paths, the label table,
// the output directory, and the sweep grids. Parsed from a flat key=value
// file; unknown keys are errors.
struct RunConfig {
    TrainConfig train;
    std::string train_path;
    std::string dev_path;
    std::string test_path;
    std::vector<std::string> labels;
    std::string out_dir = "out";
    std::vector<std::uint64_t> seeds = {1, 2, 3, 4, 5};
    std::vector<std::size_t> sweep_batch_sizes = {4, 8, 16, 32};
    std::vector<std::string> sweep_losses = {"supcon", "spcl"};
    std::string data_kind = "vector";  // vector | dialogue

    LabelTable label_table() const { return LabelTable::from_names(labels); }
};

namespace detail {

inline std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

inline std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::string item;
    std::istringstream ss(s);
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

template <typename T>
T parse_number(const std::string& key, const std::string& value) {
    std::istringstream ss(value);
    T out{};
    ss >> out;
    if (ss.fail() || !ss.eof())
        throw ConfigError("config key \"" + key + "\": cannot parse \"" + value + "\"");
    return out;
}

inline bool parse_on_off(const std::string& key, const std::string& value) {
    if (value == "on" || value == "true" || value == "1") return true;
    if (value == "off" || value == "false" || value == "0") return false;
    throw ConfigError("config key \"" + key + "\": expected on|off, got \"" + value + "\"");
}

}  // namespace detail

inline void apply_config_entry(RunConfig& cfg, const std::string& key, const std::string& value) {
    using detail::parse_number;
    if (key == "loss") {
        cfg.train.loss = loss_kind_from_name(value);
    } else if (key == "curriculum") {
        cfg.train.curriculum = detail::parse_on_off(key, value);
    } else if (key == "epochs") {
        cfg.train.epochs = parse_number<std::size_t>(key, value);
    } else if (key == "batch_size") {
        cfg.train.batch_size = parse_number<std::size_t>(key, value);
    } else if (key == "temperature") {
        cfg.train.temperature = parse_number<double>(key, value);
    } else if (key == "queue_capacity") {
        cfg.train.queue_capacity = parse_number<std::size_t>(key, value);
    } else if (key == "support_size") {
        cfg.train.support_size = parse_number<std::size_t>(key, value);
    } else if (key == "learning_rate") {
        cfg.train.learning_rate = parse_number<double>(key, value);
    } else if (key == "weight_decay") {
        cfg.train.weight_decay = parse_number<double>(key, value);
    } else if (key == "lr_floor") {
        cfg.train.lr_floor = parse_number<double>(key, value);
    } else if (key == "seed") {
        cfg.train.seed = parse_number<std::uint64_t>(key, value);
    } else if (key == "encoder") {
        cfg.train.encoder_kind = value;
    } else if (key == "hash_dim") {
        cfg.train.hash_dim = parse_number<std::size_t>(key, value);
    } else if (key == "hidden_dim") {
        cfg.train.hidden_dim = parse_number<std::size_t>(key, value);
    } else if (key == "rep_dim") {
        cfg.train.rep_dim = parse_number<std::size_t>(key, value);
    } else if (key == "context_window") {
        cfg.train.context_window = parse_number<std::size_t>(key, value);
    } else if (key == "max_len") {
        cfg.train.max_len = parse_number<std::size_t>(key, value);
    } else if (key == "aux_pairs") {
        cfg.train.aux_pairs = detail::parse_on_off(key, value);
    } else if (key == "train") {
        cfg.train_path = value;
    } else if (key == "dev") {
        cfg.dev_path = value;
    } else if (key == "test") {
        cfg.test_path = value;
    } else if (key == "labels") {
        cfg.labels = detail::split_list(value);
    } else if (key == "out") {
        cfg.out_dir = value;
    } else if (key == "data_kind") {
        if (value != "vector" && value != "dialogue")
            throw ConfigError("config key \"data_kind\": expected vector|dialogue");
        cfg.data_kind = value;
    } else if (key == "seeds") {
        cfg.seeds.clear();
        for (const auto& s : detail::split_list(value))
            cfg.seeds.push_back(parse_number<std::uint64_t>(key, s));
    } else if (key == "batch_sizes") {
        cfg.sweep_batch_sizes.clear();
        for (const auto& s : detail::split_list(value))
            cfg.sweep_batch_sizes.push_back(parse_number<std::size_t>(key, s));
    } else if (key == "losses") {
        cfg.sweep_losses = detail::split_list(value);
        for (const auto& name : cfg.sweep_losses) loss_kind_from_name(name);
    } else {
        throw ConfigError("unknown config key \"" + key + "\"");
    }
}

inline RunConfig load_run_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config " + path);
    RunConfig cfg;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const std::string t = detail::trim(line);
        if (t.empty() || t[0] == '#') continue;
        const auto eq = t.find('=');
        if (eq == std::string::npos)
            throw ConfigError(path + ":" + std::to_string(lineno) +
                              ": expected key=value, got \"" + t + "\"");
        try {
            apply_config_entry(cfg, detail::trim(t.substr(0, eq)), detail::trim(t.substr(eq + 1)));
        } catch (const ConfigError& e) {
            throw ConfigError(path + ":" + std::to_string(lineno) + ": " + e.what());
        }
    }
    return cfg;
}

}  // namespace spcl
