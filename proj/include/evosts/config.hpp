#pragma once

#include "evosts/evolution.hpp"
#include "evosts/signal_io.hpp"

#include <cstdint>
#include <filesystem>
#include <string>

namespace evosts {

/// Every tunable of the pipeline. Resolution order for a run:
/// defaults -> preset -> config file -> command-line flags.
struct RunConfig {
    // windowing
    int feature_len = 256; // F, input window length
    int target_len = 32;   // T, forecast window length
    int window_stride = 0; // 0 = target_len

    // model / evolution
    int hidden_dim = 16; // H
    int generations = 3; // l
    int children = 4;    // k
    int epochs_per_generation = 10;
    int batch_size = 32;
    double learning_rate = 0.05;
    double val_fraction = 0.2;

    // sparse coding
    double lambda = 0.1;
    int sparse_max_iter = 200;
    double sparse_tol = 1e-6;
    int dict_atoms = 0; // 0 = 2 * target_len
    int dict_iters = 30;
    int dict_window_stride = 0; // 0 = max(1, target_len / 2)
    bool relearn_dictionary_per_partition = true;
    bool score_on_holdout = false;

    // evaluation
    int k_folds = 10;

    // seeds
    std::uint64_t master_seed = 1;
    std::uint64_t split_seed = 17;

    // synthetic signal generation
    std::int64_t synth_length = 20000;
    double synth_frequency_hz = 5.0;
    double synth_amplitude = 1.0;
    double synth_phase = 0.0;
    double synth_noise_std = 0.05;
    std::uint64_t synth_seed = 7;
    double sample_rate_hz = 1000.0;

    // input decoding
    int csv_column = 0;
    double lsb_mv = kDefaultLsbMv;

    // default paths, overridable per command
    std::string signal_path;
    std::string out_path;
};

/// Named presets: "desk" (F=256, T=32, H=16, l=3, k=4) for fast runs,
/// "paper" (F=6400, T=128, H=100) for full-scale dimensions.
RunConfig apply_preset(RunConfig cfg, const std::string& name);

/// Overlays a JSON config document onto `base`. Unknown keys are rejected
/// by name; value type mismatches name the offending key.
RunConfig load_config_file(const std::filesystem::path& path, RunConfig base);

/// Enforces every downstream invariant before any work starts.
void validate(const RunConfig& cfg);

EvoConfig to_evo_config(const RunConfig& cfg);

} // namespace evosts
