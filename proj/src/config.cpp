#include "evosts/config.hpp"

#include "evosts/errors.hpp"

#include <nlohmann/json.hpp>

#include <fstream>

namespace evosts {

namespace {

using nlohmann::json;

int get_int(const json& v, const std::string& key) {
    if (!v.is_number_integer())
        throw InvalidConfigError("config key '" + key + "' must be an integer");
    return v.get<int>();
}

std::int64_t get_i64(const json& v, const std::string& key) {
    if (!v.is_number_integer())
        throw InvalidConfigError("config key '" + key + "' must be an integer");
    return v.get<std::int64_t>();
}

std::uint64_t get_u64(const json& v, const std::string& key) {
    if (!v.is_number_integer() || (v.is_number_integer() && !v.is_number_unsigned() &&
                                   v.get<std::int64_t>() < 0))
        throw InvalidConfigError("config key '" + key + "' must be a non-negative integer");
    return v.get<std::uint64_t>();
}

double get_double(const json& v, const std::string& key) {
    if (!v.is_number()) throw InvalidConfigError("config key '" + key + "' must be a number");
    return v.get<double>();
}

bool get_bool(const json& v, const std::string& key) {
    if (!v.is_boolean()) throw InvalidConfigError("config key '" + key + "' must be a boolean");
    return v.get<bool>();
}

std::string get_string(const json& v, const std::string& key) {
    if (!v.is_string()) throw InvalidConfigError("config key '" + key + "' must be a string");
    return v.get<std::string>();
}

} // namespace

RunConfig apply_preset(RunConfig cfg, const std::string& name) {
    if (name == "desk") {
        cfg.feature_len = 256;
        cfg.target_len = 32;
        cfg.hidden_dim = 16;
        cfg.generations = 3;
        cfg.children = 4;
    } else if (name == "paper") {
        cfg.feature_len = 6400;
        cfg.target_len = 128;
        cfg.hidden_dim = 100;
    } else {
        throw InvalidConfigError("unknown preset '" + name + "' (expected 'desk' or 'paper')");
    }
    return cfg;
}

RunConfig load_config_file(const std::filesystem::path& path, RunConfig base) {
    std::ifstream in(path);
    if (!in) throw FileNotFoundError("config file not found: " + path.string());
    json doc;
    try {
        in >> doc;
    } catch (const json::exception& e) {
        throw InvalidConfigError("config file " + path.string() +
                                 " is not valid JSON: " + e.what());
    }
    if (!doc.is_object())
        throw InvalidConfigError("config file " + path.string() + " must hold a JSON object");

    RunConfig cfg = base;
    for (const auto& [key, value] : doc.items()) {
        if (key == "feature_len") cfg.feature_len = get_int(value, key);
        else if (key == "target_len") cfg.target_len = get_int(value, key);
        else if (key == "window_stride") cfg.window_stride = get_int(value, key);
        else if (key == "hidden_dim") cfg.hidden_dim = get_int(value, key);
        else if (key == "generations") cfg.generations = get_int(value, key);
        else if (key == "children") cfg.children = get_int(value, key);
        else if (key == "epochs_per_generation") cfg.epochs_per_generation = get_int(value, key);
        else if (key == "batch_size") cfg.batch_size = get_int(value, key);
        else if (key == "learning_rate") cfg.learning_rate = get_double(value, key);
        else if (key == "val_fraction") cfg.val_fraction = get_double(value, key);
        else if (key == "lambda") cfg.lambda = get_double(value, key);
        else if (key == "sparse_max_iter") cfg.sparse_max_iter = get_int(value, key);
        else if (key == "sparse_tol") cfg.sparse_tol = get_double(value, key);
        else if (key == "dict_atoms") cfg.dict_atoms = get_int(value, key);
        else if (key == "dict_iters") cfg.dict_iters = get_int(value, key);
        else if (key == "dict_window_stride") cfg.dict_window_stride = get_int(value, key);
        else if (key == "relearn_dictionary_per_partition")
            cfg.relearn_dictionary_per_partition = get_bool(value, key);
        else if (key == "score_on_holdout") cfg.score_on_holdout = get_bool(value, key);
        else if (key == "k_folds") cfg.k_folds = get_int(value, key);
        else if (key == "master_seed") cfg.master_seed = get_u64(value, key);
        else if (key == "split_seed") cfg.split_seed = get_u64(value, key);
        else if (key == "synth_length") cfg.synth_length = get_i64(value, key);
        else if (key == "synth_frequency_hz") cfg.synth_frequency_hz = get_double(value, key);
        else if (key == "synth_amplitude") cfg.synth_amplitude = get_double(value, key);
        else if (key == "synth_phase") cfg.synth_phase = get_double(value, key);
        else if (key == "synth_noise_std") cfg.synth_noise_std = get_double(value, key);
        else if (key == "synth_seed") cfg.synth_seed = get_u64(value, key);
        else if (key == "sample_rate_hz") cfg.sample_rate_hz = get_double(value, key);
        else if (key == "csv_column") cfg.csv_column = get_int(value, key);
        else if (key == "lsb_mv") cfg.lsb_mv = get_double(value, key);
        else if (key == "signal_path") cfg.signal_path = get_string(value, key);
        else if (key == "out_path") cfg.out_path = get_string(value, key);
        else if (key == "preset")
            throw InvalidConfigError("set presets via --preset, not the config file");
        else throw InvalidConfigError("unknown config key: " + key);
    }
    return cfg;
}

void validate(const RunConfig& cfg) {
    const auto require = [](bool ok, const char* message) {
        if (!ok) throw InvalidConfigError(message);
    };
    require(cfg.feature_len >= 1, "feature_len must be >= 1");
    require(cfg.target_len >= 1, "target_len must be >= 1");
    require(cfg.window_stride >= 0, "window_stride must be >= 0 (0 = target_len)");
    require(cfg.hidden_dim >= 1, "hidden_dim must be >= 1");
    require(cfg.generations >= 1, "generations must be >= 1");
    require(cfg.children >= 1, "children must be >= 1");
    require(cfg.epochs_per_generation >= 1, "epochs_per_generation must be >= 1");
    require(cfg.batch_size >= 1, "batch_size must be >= 1");
    require(cfg.learning_rate >= 0.0, "learning_rate must be >= 0");
    require(cfg.val_fraction > 0.0 && cfg.val_fraction < 1.0,
            "val_fraction must be in (0, 1)");
    require(cfg.lambda >= 0.0, "lambda must be >= 0");
    require(cfg.sparse_max_iter >= 1, "sparse_max_iter must be >= 1");
    require(cfg.sparse_tol > 0.0, "sparse_tol must be > 0");
    require(cfg.dict_atoms >= 0, "dict_atoms must be >= 0 (0 = 2 * target_len)");
    require(cfg.dict_iters >= 1, "dict_iters must be >= 1");
    require(cfg.dict_window_stride >= 0,
            "dict_window_stride must be >= 0 (0 = target_len / 2)");
    require(cfg.k_folds >= 2, "k_folds must be >= 2");
    require(cfg.synth_length >= 1, "synth_length must be >= 1");
    require(cfg.synth_noise_std >= 0.0, "synth_noise_std must be >= 0");
    require(cfg.sample_rate_hz > 0.0, "sample_rate_hz must be > 0");
    require(cfg.csv_column >= 0, "csv_column must be >= 0");
    require(cfg.lsb_mv > 0.0, "lsb_mv must be > 0");
}

EvoConfig to_evo_config(const RunConfig& cfg) {
    EvoConfig evo;
    evo.generations = cfg.generations;
    evo.children = cfg.children;
    evo.hidden_dim = cfg.hidden_dim;
    evo.epochs_per_generation = cfg.epochs_per_generation;
    evo.master_seed = cfg.master_seed;
    evo.sparse.lambda = cfg.lambda;
    evo.sparse.max_iter = cfg.sparse_max_iter;
    evo.sparse.tol = cfg.sparse_tol;
    evo.train.batch_size = cfg.batch_size;
    evo.train.learning_rate = cfg.learning_rate;
    evo.train.val_fraction = cfg.val_fraction;
    evo.dict_atoms = cfg.dict_atoms;
    evo.dict_iters = cfg.dict_iters;
    evo.dict_window_stride = cfg.dict_window_stride;
    evo.relearn_dictionary_per_partition = cfg.relearn_dictionary_per_partition;
    evo.score_on_holdout = cfg.score_on_holdout;
    return evo;
}

} // namespace evosts
