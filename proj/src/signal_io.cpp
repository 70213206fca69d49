#include "evosts/signal_io.hpp"

#include "evosts/errors.hpp"
#include "evosts/rng.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <map>
#include <numbers>
#include <sstream>

namespace evosts {

namespace {

// Strict double parse of a whole CSV cell; leading/trailing blanks allowed.
bool parse_cell(const std::string& cell, double& out) {
    std::size_t begin = cell.find_first_not_of(" \t\r");
    if (begin == std::string::npos) return false;
    std::size_t end = cell.find_last_not_of(" \t\r");
    const std::string trimmed = cell.substr(begin, end - begin + 1);
    char* parse_end = nullptr;
    out = std::strtod(trimmed.c_str(), &parse_end);
    return parse_end == trimmed.c_str() + trimmed.size() && !trimmed.empty();
}

std::string nth_column(const std::string& line, int column) {
    std::stringstream ss(line);
    std::string cell;
    for (int c = 0; c <= column; ++c) {
        if (!std::getline(ss, cell, ',')) return {};
    }
    return cell;
}

} // namespace

Signal load_csv(const std::filesystem::path& path, int column, double sample_rate_hz) {
    if (column < 0) throw InvalidConfigError("load_csv: column must be >= 0");
    std::ifstream in(path);
    if (!in) throw FileNotFoundError("load_csv: cannot open " + path.string());

    Signal signal;
    signal.sample_rate_hz = sample_rate_hz;
    signal.source_id = path.filename().string();

    std::string line;
    std::int64_t row = 0;
    while (std::getline(in, line)) {
        ++row;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const std::string cell = nth_column(line, column);
        double value = 0.0;
        if (!parse_cell(cell, value)) {
            if (row == 1) continue; // header row
            throw ParseError("load_csv: row " + std::to_string(row) + " column " +
                             std::to_string(column) + " of " + path.string() +
                             " is not a number: '" + cell + "'");
        }
        if (!std::isfinite(value)) {
            throw ParseError("load_csv: non-finite sample at row " + std::to_string(row) +
                             " column " + std::to_string(column) + " of " + path.string());
        }
        signal.samples.push_back(value);
    }
    if (signal.samples.empty()) throw EmptySignalError("load_csv: no samples in " + path.string());
    return signal;
}

Signal load_raw_i16(const std::filesystem::path& path, double lsb_mv, double sample_rate_hz) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FileNotFoundError("load_raw_i16: cannot open " + path.string());
    std::vector<char> bytes((std::istreambuf_iterator<char>(in)),
                            std::istreambuf_iterator<char>());
    if (bytes.size() % 2 != 0) {
        throw OddByteCountError("load_raw_i16: " + path.string() + " has " +
                                std::to_string(bytes.size()) + " bytes, expected a multiple of 2");
    }
    if (bytes.empty()) throw EmptySignalError("load_raw_i16: no samples in " + path.string());

    Signal signal;
    signal.sample_rate_hz = sample_rate_hz;
    signal.source_id = path.filename().string();
    signal.samples.reserve(bytes.size() / 2);
    for (std::size_t i = 0; i + 1 < bytes.size(); i += 2) {
        const auto lo = static_cast<std::uint16_t>(static_cast<unsigned char>(bytes[i]));
        const auto hi = static_cast<std::uint16_t>(static_cast<unsigned char>(bytes[i + 1]));
        const auto code = static_cast<std::int16_t>(static_cast<std::uint16_t>(lo | (hi << 8)));
        signal.samples.push_back(static_cast<double>(code) * lsb_mv);
    }
    return signal;
}

Signal generate_synthetic(std::int64_t length, const std::vector<SineComponent>& components,
                          double noise_std, std::uint64_t seed, double sample_rate_hz) {
    if (length <= 0) throw InvalidLengthError("generate_synthetic: length must be positive");
    if (noise_std < 0.0) throw InvalidConfigError("generate_synthetic: noise_std must be >= 0");
    if (sample_rate_hz <= 0.0) throw InvalidConfigError("generate_synthetic: sample_rate_hz must be > 0");
    for (const auto& c : components) {
        if (!std::isfinite(c.amplitude) || !std::isfinite(c.frequency_hz) || !std::isfinite(c.phase))
            throw InvalidConfigError("generate_synthetic: non-finite component");
    }

    RngStream noise = RngStream::derive(seed, StreamKind::synth);
    Signal signal;
    signal.sample_rate_hz = sample_rate_hz;
    signal.source_id = "synthetic:" + std::to_string(seed);
    signal.samples.resize(static_cast<std::size_t>(length));
    for (std::int64_t i = 0; i < length; ++i) {
        double v = 0.0;
        for (const auto& c : components) {
            v += c.amplitude *
                 std::sin(2.0 * std::numbers::pi * c.frequency_hz * static_cast<double>(i) /
                              sample_rate_hz +
                          c.phase);
        }
        if (noise_std > 0.0) v += noise.normal(0.0, noise_std);
        signal.samples[static_cast<std::size_t>(i)] = v;
    }
    return signal;
}

NormalizationStats compute_stats(const std::vector<double>& samples) {
    if (samples.empty()) throw EmptySignalError("compute_stats: empty sample buffer");
    double mean = 0.0;
    for (double s : samples) mean += s;
    mean /= static_cast<double>(samples.size());
    double var = 0.0;
    for (double s : samples) var += (s - mean) * (s - mean);
    var /= static_cast<double>(samples.size());
    if (var <= 0.0) throw ZeroVarianceError("compute_stats: signal has zero variance");
    return {mean, std::sqrt(var)};
}

std::pair<Signal, NormalizationStats> normalize(const Signal& signal) {
    const NormalizationStats stats = compute_stats(signal.samples);
    Signal out = signal;
    for (double& s : out.samples) s = stats.apply(s);
    return {std::move(out), stats};
}

Dataset make_windows(const Signal& signal, int feature_len, int target_len, int stride) {
    if (feature_len < 1 || target_len < 1)
        throw InvalidConfigError("make_windows: feature_len and target_len must be >= 1");
    if (stride < 1) throw InvalidConfigError("make_windows: stride must be >= 1");
    const std::int64_t window = feature_len + target_len;
    const auto n = static_cast<std::int64_t>(signal.samples.size());
    if (n < window) {
        throw SignalTooShortError("make_windows: signal has " + std::to_string(n) +
                                  " samples, needs at least " + std::to_string(window));
    }

    Dataset dataset;
    dataset.feature_len = feature_len;
    dataset.target_len = target_len;
    for (std::int64_t origin = 0; origin + window <= n; origin += stride) {
        WindowPair pair;
        pair.origin_index = origin;
        pair.features = Eigen::Map<const Eigen::VectorXd>(signal.samples.data() + origin,
                                                          feature_len);
        pair.target = Eigen::Map<const Eigen::VectorXd>(
            signal.samples.data() + origin + feature_len, target_len);
        dataset.pairs.push_back(std::move(pair));
    }
    return dataset;
}

FoldAssignment kfold_split(const Dataset& dataset, int k_folds, std::uint64_t seed) {
    if (k_folds < 2) throw InvalidConfigError("kfold_split: k_folds must be >= 2");
    const std::size_t n = dataset.pairs.size();
    if (n < static_cast<std::size_t>(k_folds)) {
        throw TooFewPairsError("kfold_split: " + std::to_string(n) + " pairs cannot fill " +
                               std::to_string(k_folds) + " folds");
    }

    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    RngStream stream = RngStream::derive(seed, StreamKind::fold);
    stream.shuffle(order);

    FoldAssignment folds;
    folds.fold_count = k_folds;
    folds.assignment.assign(n, 0);
    for (std::size_t pos = 0; pos < n; ++pos) {
        folds.assignment[order[pos]] = static_cast<int>(pos % static_cast<std::size_t>(k_folds));
    }
    return folds;
}

std::vector<Dataset> partition_generations(const Dataset& dataset, int generations) {
    if (generations < 1) throw InvalidConfigError("partition_generations: generations must be >= 1");
    const std::size_t n = dataset.pairs.size();
    if (n < static_cast<std::size_t>(generations)) {
        throw TooFewPairsError("partition_generations: " + std::to_string(n) +
                               " pairs cannot fill " + std::to_string(generations) +
                               " generations");
    }

    const std::size_t g = static_cast<std::size_t>(generations);
    const std::size_t base = n / g;
    const std::size_t remainder = n % g;

    std::vector<Dataset> slices;
    slices.reserve(g);
    std::size_t begin = 0;
    for (std::size_t s = 0; s < g; ++s) {
        const std::size_t size = base + (s < remainder ? 1 : 0);
        Dataset slice;
        slice.feature_len = dataset.feature_len;
        slice.target_len = dataset.target_len;
        slice.normalization_stats = dataset.normalization_stats;
        slice.pairs.assign(dataset.pairs.begin() + static_cast<std::ptrdiff_t>(begin),
                           dataset.pairs.begin() + static_cast<std::ptrdiff_t>(begin + size));
        slices.push_back(std::move(slice));
        begin += size;
    }
    return slices;
}

Dataset subset(const Dataset& dataset, const std::vector<std::size_t>& indices) {
    Dataset out;
    out.feature_len = dataset.feature_len;
    out.target_len = dataset.target_len;
    out.normalization_stats = dataset.normalization_stats;
    out.pairs.reserve(indices.size());
    for (std::size_t i : indices) out.pairs.push_back(dataset.pairs.at(i));
    return out;
}

Dataset apply_normalization(const Dataset& dataset, const NormalizationStats& stats) {
    Dataset out;
    out.feature_len = dataset.feature_len;
    out.target_len = dataset.target_len;
    out.normalization_stats = stats;
    out.pairs.reserve(dataset.pairs.size());
    for (const auto& p : dataset.pairs) {
        WindowPair q;
        q.origin_index = p.origin_index;
        q.features = stats.apply(p.features);
        q.target = stats.apply(p.target);
        out.pairs.push_back(std::move(q));
    }
    return out;
}

std::vector<std::vector<double>> covered_runs(const Dataset& dataset) {
    // Overlapping windows repeat parent samples; keying by absolute index
    // collapses the duplicates and recovers maximal contiguous runs.
    std::map<std::int64_t, double> by_index;
    const std::int64_t window = dataset.feature_len + dataset.target_len;
    for (const auto& p : dataset.pairs) {
        for (std::int64_t k = 0; k < window; ++k) {
            const double v = k < dataset.feature_len
                                 ? p.features[static_cast<Eigen::Index>(k)]
                                 : p.target[static_cast<Eigen::Index>(k - dataset.feature_len)];
            by_index[p.origin_index + k] = v;
        }
    }

    std::vector<std::vector<double>> runs;
    std::int64_t prev = 0;
    for (const auto& [index, value] : by_index) {
        if (runs.empty() || index != prev + 1) runs.emplace_back();
        runs.back().push_back(value);
        prev = index;
    }
    return runs;
}

NormalizationStats covered_stats(const Dataset& dataset) {
    std::vector<double> flat;
    for (const auto& run : covered_runs(dataset)) flat.insert(flat.end(), run.begin(), run.end());
    return compute_stats(flat);
}

std::vector<Eigen::VectorXd> sliding_subwindows(const Dataset& dataset, int window_len,
                                                int stride) {
    if (window_len < 1 || stride < 1)
        throw InvalidConfigError("sliding_subwindows: window_len and stride must be >= 1");
    std::vector<Eigen::VectorXd> windows;
    for (const auto& run : covered_runs(dataset)) {
        const auto n = static_cast<std::int64_t>(run.size());
        for (std::int64_t origin = 0; origin + window_len <= n; origin += stride) {
            windows.emplace_back(
                Eigen::Map<const Eigen::VectorXd>(run.data() + origin, window_len));
        }
    }
    return windows;
}

} // namespace evosts
