#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

namespace evosts {

/// Default quantization step for raw 16-bit inputs: a ±16.384 mV range
/// spanned by 2^16 codes gives 32.768 / 65536 = 0.0005 mV per code.
inline constexpr double kDefaultLsbMv = 0.0005;

/// Uniformly sampled univariate signal (amplitudes in mV).
struct Signal {
    std::vector<double> samples;
    double sample_rate_hz = 1000.0;
    std::string source_id;

    std::size_t size() const { return samples.size(); }
};

/// One (feature window, target window) pair cut from a parent signal.
/// target[0] is the parent sample at origin_index + features.size().
struct WindowPair {
    Eigen::VectorXd features;
    Eigen::VectorXd target;
    std::int64_t origin_index = 0;
};

struct NormalizationStats {
    double mean = 0.0;
    double std_dev = 1.0;

    double apply(double x) const { return (x - mean) / std_dev; }
    double invert(double z) const { return z * std_dev + mean; }
    Eigen::VectorXd apply(const Eigen::VectorXd& v) const {
        return (v.array() - mean) / std_dev;
    }
    Eigen::VectorXd invert(const Eigen::VectorXd& v) const {
        return v.array() * std_dev + mean;
    }
};

/// Windowed view of a signal: every pair shares feature_len and target_len.
struct Dataset {
    std::vector<WindowPair> pairs;
    int feature_len = 0;
    int target_len = 0;
    NormalizationStats normalization_stats;

    std::size_t size() const { return pairs.size(); }
};

/// Assignment of every pair index to a fold in [0, fold_count).
struct FoldAssignment {
    int fold_count = 0;
    std::vector<int> assignment; // indexed by pair index
};

struct SineComponent {
    double amplitude = 1.0;
    double frequency_hz = 5.0;
    double phase = 0.0;
};

/// Reads one sample per row from the given 0-based column. A single header
/// row is skipped automatically when its cell does not parse as a number.
/// Rejects NaN/infinite samples with ParseError.
Signal load_csv(const std::filesystem::path& path, int column = 0,
                double sample_rate_hz = 1000.0);

/// Reads signed 16-bit little-endian samples; amplitude = code * lsb_mv.
Signal load_raw_i16(const std::filesystem::path& path, double lsb_mv = kDefaultLsbMv,
                    double sample_rate_hz = 1000.0);

/// samples[i] = sum_j amp_j * sin(2*pi*f_j*i/rate + phase_j) + N(0, noise_std),
/// noise drawn from a stream keyed by seed only.
Signal generate_synthetic(std::int64_t length, const std::vector<SineComponent>& components,
                          double noise_std, std::uint64_t seed,
                          double sample_rate_hz = 1000.0);

/// Z-scores the signal with population statistics; the returned stats invert
/// the transform for metric reporting.
std::pair<Signal, NormalizationStats> normalize(const Signal& signal);

/// Population (mean, std) of a sample buffer. Throws ZeroVariance when flat.
NormalizationStats compute_stats(const std::vector<double>& samples);

/// Windows the signal at origins 0, stride, 2*stride, ... while the full
/// feature+target slice fits.
Dataset make_windows(const Signal& signal, int feature_len, int target_len, int stride);

/// Seeded shuffle, then round-robin fold assignment; fold sizes differ by <= 1.
FoldAssignment kfold_split(const Dataset& dataset, int k_folds, std::uint64_t seed);

/// Contiguous, time-ordered split into `generations` near-equal slices,
/// remainder pairs going to the earliest slices.
std::vector<Dataset> partition_generations(const Dataset& dataset, int generations);

/// Pairs whose index falls in `indices`, original order preserved.
Dataset subset(const Dataset& dataset, const std::vector<std::size_t>& indices);

/// Copy of the dataset with every feature/target z-scored by `stats`.
Dataset apply_normalization(const Dataset& dataset, const NormalizationStats& stats);

/// Unique parent-signal samples covered by the dataset's windows, as maximal
/// contiguous runs (window overlap is de-duplicated via origin indices).
std::vector<std::vector<double>> covered_runs(const Dataset& dataset);

/// Population stats over the unique samples covered by the dataset.
NormalizationStats covered_stats(const Dataset& dataset);

/// Length-`window_len` sliding sub-windows (step `stride`) over every
/// contiguous run covered by the dataset; the dictionary training set.
std::vector<Eigen::VectorXd> sliding_subwindows(const Dataset& dataset, int window_len,
                                                int stride);

} // namespace evosts
