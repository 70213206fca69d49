#include "evosts/cli.hpp"

#include "evosts/config.hpp"
#include "evosts/errors.hpp"
#include "evosts/eval_report.hpp"
#include "evosts/evolution.hpp"
#include "evosts/lstm.hpp"
#include "evosts/rng.hpp"
#include "evosts/signal_io.hpp"
#include "evosts/sparse_coding.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>

namespace evosts {

namespace {

/// Raw flag storage; only values whose flag was actually passed are applied.
struct CliState {
    std::string config_path;
    std::string preset;
    int threads = 1;
    RunConfig flags;
};

void add_config_flags(CLI::App* cmd, CliState& st) {
    cmd->add_option("--config", st.config_path, "JSON config file overlaying the defaults");
    cmd->add_option("--preset", st.preset, "named preset applied before the config file: desk or paper");
    cmd->add_option("--threads", st.threads, "worker thread cap (results are identical for any value)");

    RunConfig& f = st.flags;
    cmd->add_option("--feature-len", f.feature_len, "input window length F");
    cmd->add_option("--target-len", f.target_len, "forecast window length T");
    cmd->add_option("--window-stride", f.window_stride, "window origin step; 0 = target-len");
    cmd->add_option("--hidden-dim", f.hidden_dim, "LSTM hidden units H");
    cmd->add_option("--generations", f.generations, "evolutionary generations l");
    cmd->add_option("--children", f.children, "children per generation k");
    cmd->add_option("--epochs-per-generation", f.epochs_per_generation,
                    "SGD epochs each child runs per generation");
    cmd->add_option("--batch-size", f.batch_size, "SGD minibatch size");
    cmd->add_option("--learning-rate", f.learning_rate, "SGD learning rate");
    cmd->add_option("--val-fraction", f.val_fraction, "tail fraction held out by train/holdout splits");
    cmd->add_option("--lambda", f.lambda, "sparsity weight in the coding objective");
    cmd->add_option("--sparse-max-iter", f.sparse_max_iter, "ISTA iteration cap");
    cmd->add_option("--sparse-tol", f.sparse_tol, "ISTA convergence tolerance");
    cmd->add_option("--dict-atoms", f.dict_atoms, "dictionary atoms; 0 = 2 * target-len");
    cmd->add_option("--dict-iters", f.dict_iters, "dictionary learning outer iterations");
    cmd->add_option("--dict-window-stride", f.dict_window_stride,
                    "dictionary sub-window step; 0 = target-len / 2");
    cmd->add_option("--relearn-dictionary-per-partition", f.relearn_dictionary_per_partition,
                    "learn a fresh dictionary for each generation's partition");
    cmd->add_option("--score-on-holdout", f.score_on_holdout,
                    "score children on a tail split instead of their training pairs");
    cmd->add_option("--k-folds", f.k_folds, "cross-validation fold count");
    cmd->add_option("--master-seed", f.master_seed, "root seed of every derived stream");
    cmd->add_option("--split-seed", f.split_seed, "fold assignment shuffle seed");
    cmd->add_option("--synth-length", f.synth_length, "synthetic signal length in samples");
    cmd->add_option("--synth-frequency-hz", f.synth_frequency_hz, "synthetic sine frequency");
    cmd->add_option("--synth-amplitude", f.synth_amplitude, "synthetic sine amplitude (mV)");
    cmd->add_option("--synth-phase", f.synth_phase, "synthetic sine phase (radians)");
    cmd->add_option("--synth-noise-std", f.synth_noise_std, "synthetic Gaussian noise stddev");
    cmd->add_option("--synth-seed", f.synth_seed, "synthetic noise seed");
    cmd->add_option("--sample-rate-hz", f.sample_rate_hz, "sample rate of loaded/generated signals");
    cmd->add_option("--csv-column", f.csv_column, "0-based CSV column holding the samples");
    cmd->add_option("--lsb-mv", f.lsb_mv, "mV per code for raw 16-bit input");
    cmd->add_option("--signal-path", f.signal_path, "input signal file (.csv or .i16/.raw/.bin)");
    cmd->add_option("--out-path", f.out_path, "output file (directory for evolve)");
}

void apply_flag_overrides(const CLI::App& cmd, const RunConfig& f, RunConfig& cfg) {
    const auto set_if = [&cmd](const char* flag, auto& dst, const auto& src) {
        if (cmd.count(flag)) dst = src;
    };
    set_if("--feature-len", cfg.feature_len, f.feature_len);
    set_if("--target-len", cfg.target_len, f.target_len);
    set_if("--window-stride", cfg.window_stride, f.window_stride);
    set_if("--hidden-dim", cfg.hidden_dim, f.hidden_dim);
    set_if("--generations", cfg.generations, f.generations);
    set_if("--children", cfg.children, f.children);
    set_if("--epochs-per-generation", cfg.epochs_per_generation, f.epochs_per_generation);
    set_if("--batch-size", cfg.batch_size, f.batch_size);
    set_if("--learning-rate", cfg.learning_rate, f.learning_rate);
    set_if("--val-fraction", cfg.val_fraction, f.val_fraction);
    set_if("--lambda", cfg.lambda, f.lambda);
    set_if("--sparse-max-iter", cfg.sparse_max_iter, f.sparse_max_iter);
    set_if("--sparse-tol", cfg.sparse_tol, f.sparse_tol);
    set_if("--dict-atoms", cfg.dict_atoms, f.dict_atoms);
    set_if("--dict-iters", cfg.dict_iters, f.dict_iters);
    set_if("--dict-window-stride", cfg.dict_window_stride, f.dict_window_stride);
    set_if("--relearn-dictionary-per-partition", cfg.relearn_dictionary_per_partition,
           f.relearn_dictionary_per_partition);
    set_if("--score-on-holdout", cfg.score_on_holdout, f.score_on_holdout);
    set_if("--k-folds", cfg.k_folds, f.k_folds);
    set_if("--master-seed", cfg.master_seed, f.master_seed);
    set_if("--split-seed", cfg.split_seed, f.split_seed);
    set_if("--synth-length", cfg.synth_length, f.synth_length);
    set_if("--synth-frequency-hz", cfg.synth_frequency_hz, f.synth_frequency_hz);
    set_if("--synth-amplitude", cfg.synth_amplitude, f.synth_amplitude);
    set_if("--synth-phase", cfg.synth_phase, f.synth_phase);
    set_if("--synth-noise-std", cfg.synth_noise_std, f.synth_noise_std);
    set_if("--synth-seed", cfg.synth_seed, f.synth_seed);
    set_if("--sample-rate-hz", cfg.sample_rate_hz, f.sample_rate_hz);
    set_if("--csv-column", cfg.csv_column, f.csv_column);
    set_if("--lsb-mv", cfg.lsb_mv, f.lsb_mv);
    set_if("--signal-path", cfg.signal_path, f.signal_path);
    set_if("--out-path", cfg.out_path, f.out_path);
}

RunConfig resolve_config(const CLI::App& cmd, const CliState& st) {
    RunConfig cfg;
    if (cmd.count("--preset")) cfg = apply_preset(cfg, st.preset);
    if (cmd.count("--config")) cfg = load_config_file(st.config_path, cfg);
    apply_flag_overrides(cmd, st.flags, cfg);
    validate(cfg);
    return cfg;
}

std::string require_path(const std::string& value, const char* key) {
    if (value.empty())
        throw InvalidConfigError(std::string(key) + " is required (flag or config key)");
    return value;
}

bool has_suffix(const std::string& s, const std::string& suffix) {
    return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

Signal load_signal(const RunConfig& cfg, const std::string& path) {
    if (has_suffix(path, ".i16") || has_suffix(path, ".raw") || has_suffix(path, ".bin"))
        return load_raw_i16(path, cfg.lsb_mv, cfg.sample_rate_hz);
    return load_csv(path, cfg.csv_column, cfg.sample_rate_hz);
}

int resolve_dict_stride(const RunConfig& cfg) {
    return cfg.dict_window_stride > 0 ? cfg.dict_window_stride
                                      : std::max(1, cfg.target_len / 2);
}

void cmd_synth(const RunConfig& cfg) {
    const std::string out = require_path(cfg.out_path, "out_path");
    const SineComponent component{cfg.synth_amplitude, cfg.synth_frequency_hz, cfg.synth_phase};
    const Signal signal = generate_synthetic(cfg.synth_length, {component}, cfg.synth_noise_std,
                                             cfg.synth_seed, cfg.sample_rate_hz);
    std::ofstream file(out, std::ios::binary);
    if (!file) throw IoError("synth: cannot write " + out);
    file << "amplitude_mv\n";
    char buf[64];
    for (double v : signal.samples) {
        std::snprintf(buf, sizeof(buf), "%.17g", v);
        file << buf << "\n";
    }
    file.close();
    if (!file) throw IoError("synth: short write to " + out);
    std::cout << "wrote " << out << " (" << signal.size() << " samples)\n";
}

void cmd_learn_dict(const RunConfig& cfg, int threads) {
    const std::string signal_path = require_path(cfg.signal_path, "signal_path");
    const std::string out = require_path(cfg.out_path, "out_path");

    const Signal raw = load_signal(cfg, signal_path);
    if (raw.size() < static_cast<std::size_t>(cfg.target_len))
        throw SignalTooShortError("learn-dict: signal has " + std::to_string(raw.size()) +
                                  " samples, need at least target_len = " +
                                  std::to_string(cfg.target_len));
    const Signal signal = normalize(raw).first;

    const int stride = resolve_dict_stride(cfg);
    std::vector<Eigen::VectorXd> windows;
    for (std::size_t origin = 0; origin + cfg.target_len <= signal.size();
         origin += static_cast<std::size_t>(stride)) {
        windows.push_back(Eigen::Map<const Eigen::VectorXd>(signal.samples.data() + origin,
                                                            cfg.target_len));
    }

    SparseConfig sparse{cfg.lambda, cfg.sparse_max_iter, cfg.sparse_tol};
    const int n_atoms = cfg.dict_atoms > 0 ? cfg.dict_atoms : 2 * cfg.target_len;
    const std::uint64_t seed = RngStream::derive_seed(cfg.master_seed, StreamKind::dictionary);
    const auto result = learn_dictionary(windows, n_atoms, sparse, cfg.dict_iters, seed, threads);
    save_dictionary(result.dictionary, out, cfg.lambda, seed);
    std::cout << "wrote " << out << " (" << result.dictionary.n_atoms() << " atoms, checksum "
              << dictionary_checksum(result.dictionary) << ")\n";
}

void cmd_evolve(const RunConfig& cfg, int threads) {
    const std::string signal_path = require_path(cfg.signal_path, "signal_path");
    const std::string out_dir = require_path(cfg.out_path, "out_path");

    const Signal raw = load_signal(cfg, signal_path);
    const Signal signal = normalize(raw).first;
    const int stride = cfg.window_stride > 0 ? cfg.window_stride : cfg.target_len;
    const Dataset dataset = make_windows(signal, cfg.feature_len, cfg.target_len, stride);

    const EvoRun run = evosts(dataset, to_evo_config(cfg), threads);
    write_run(run, out_dir);

    for (const GenerationResult& gen : run.generations) {
        std::cout << "generation " << gen.generation_index << ": best child "
                  << gen.best_index << " score "
                  << gen.children[static_cast<std::size_t>(gen.best_index)].score << "\n";
    }
    std::cout << "wrote " << out_dir << "/run_manifest.json\n";
}

void cmd_evaluate(const RunConfig& cfg, int threads) {
    const std::string signal_path = require_path(cfg.signal_path, "signal_path");
    const std::string out = require_path(cfg.out_path, "out_path");

    const Signal raw = load_signal(cfg, signal_path);
    const int stride = cfg.window_stride > 0 ? cfg.window_stride : cfg.target_len;
    const Dataset dataset = make_windows(raw, cfg.feature_len, cfg.target_len, stride);

    const CvReport report = cross_validate(dataset, to_evo_config(cfg), cfg.k_folds,
                                           cfg.split_seed, threads);
    write_report(report, out);
    std::cout << "wrote " << out << " (" << report.rows.size() << " folds, mean rmse random "
              << report.means.rmse_random << ", optimized " << report.means.rmse_optimized
              << ")\n";
}

void cmd_plot(const RunConfig& cfg, const std::string& checkpoint, std::int64_t offset,
              std::int64_t count) {
    const std::string signal_path = require_path(cfg.signal_path, "signal_path");
    const std::string out = require_path(cfg.out_path, "out_path");
    if (offset < 0) throw InvalidConfigError("plot: --offset must be >= 0");
    if (count < 1) throw InvalidConfigError("plot: --count must be >= 1");

    const Signal raw = load_signal(cfg, signal_path);
    if (static_cast<std::size_t>(offset + count) > raw.size())
        throw SignalTooShortError("plot: segment extends past the signal end");

    Signal segment;
    segment.sample_rate_hz = raw.sample_rate_hz;
    segment.source_id = "signal";
    segment.samples.assign(raw.samples.begin() + offset, raw.samples.begin() + offset + count);

    std::vector<PlotSeries> overlays;
    if (!checkpoint.empty()) {
        // Forecast overlay: track the signal over the feature window, then
        // continue with the model's prediction of the next target window.
        const LstmWeights weights = load_checkpoint(checkpoint);
        const int f = weights.dims.input_dim, t = weights.dims.output_dim;
        if (count < f + t)
            throw SignalTooShortError("plot: segment shorter than feature+target windows");
        auto [norm, stats] = normalize(raw);
        const Eigen::VectorXd features =
            Eigen::Map<const Eigen::VectorXd>(norm.samples.data() + offset, f);
        const Eigen::VectorXd prediction = stats.invert(forward(weights, features));
        PlotSeries forecast{"forecast", {}};
        forecast.values.assign(segment.samples.begin(), segment.samples.begin() + f);
        forecast.values.insert(forecast.values.end(), prediction.data(),
                               prediction.data() + prediction.size());
        overlays.push_back(std::move(forecast));
    }

    plot_signal(segment, overlays, out);
    std::cout << "wrote " << out << "\n";
}

} // namespace

int run_cli(int argc, const char* const* argv) {
    CLI::App app{"EvoSTS: evolutionary LSTM forecasting with sparse-coded selection"};
    app.require_subcommand(1);

    CliState st;
    std::string plot_checkpoint;
    std::int64_t plot_offset = 0;
    std::int64_t plot_count = 512;

    CLI::App* synth = app.add_subcommand("synth", "generate a synthetic sine signal CSV");
    CLI::App* learn_dict =
        app.add_subcommand("learn-dict", "learn a sparse dictionary from a signal");
    CLI::App* evolve =
        app.add_subcommand("evolve", "run the evolutionary loop and write run artifacts");
    CLI::App* evaluate =
        app.add_subcommand("evaluate", "k-fold cross-validation report (random vs optimized)");
    CLI::App* plot = app.add_subcommand("plot", "render a signal segment (plus optional forecast) as SVG");

    for (CLI::App* cmd : {synth, learn_dict, evolve, evaluate, plot}) add_config_flags(cmd, st);
    plot->add_option("--checkpoint", plot_checkpoint, "weights checkpoint to overlay as a forecast");
    plot->add_option("--offset", plot_offset, "first sample of the plotted segment");
    plot->add_option("--count", plot_count, "number of samples to plot");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 1;
    }

    try {
        const CLI::App* cmd = app.get_subcommands().front();
        const RunConfig cfg = resolve_config(*cmd, st);
        if (st.threads < 1) throw InvalidConfigError("--threads must be >= 1");
        if (cmd == synth) cmd_synth(cfg);
        else if (cmd == learn_dict) cmd_learn_dict(cfg, st.threads);
        else if (cmd == evolve) cmd_evolve(cfg, st.threads);
        else if (cmd == evaluate) cmd_evaluate(cfg, st.threads);
        else cmd_plot(cfg, plot_checkpoint, plot_offset, plot_count);
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return static_cast<int>(e.error_class());
    } catch (const std::exception& e) {
        std::cerr << "unexpected error: " << e.what() << "\n";
        return 3;
    }
    return 0;
}

} // namespace evosts
