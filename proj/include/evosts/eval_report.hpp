#pragma once

#include "evosts/evolution.hpp"
#include "evosts/signal_io.hpp"

#include <Eigen/Core>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace evosts {

/// One cross-validation fold's metrics for first-generation ("random") vs.
/// final-generation ("optimized") best weights, in original signal units.
struct FoldReportRow {
    int partition_id = 0; // 1-based fold number
    double r2_random = 0.0;
    double r2_optimized = 0.0;
    double rmse_random = 0.0;
    double rmse_optimized = 0.0;
};

struct CvReport {
    std::vector<FoldReportRow> rows;
    FoldReportRow means; // arithmetic column means, partition_id = 0
    EvoConfig config;
    std::uint64_t split_seed = 0;
};

/// sqrt of the mean squared error over all elements of all pairs.
double rmse(const std::vector<Eigen::VectorXd>& pred,
            const std::vector<Eigen::VectorXd>& actual);

/// 1 - SS_res / SS_tot with SS_tot centered on the flattened actual mean.
/// Unbounded below; exactly 1 when pred == actual.
double r2(const std::vector<Eigen::VectorXd>& pred,
          const std::vector<Eigen::VectorXd>& actual);

/// k-fold cross-validation: per fold, normalize by the training portion's
/// covered-sample stats, run the evolutionary loop on it, then score both
/// first- and final-generation best weights on the held-out (raw) pairs.
/// Fold f's evolutionary master seed derives from (evo_cfg.master_seed, f).
CvReport cross_validate(const Dataset& dataset, const EvoConfig& evo_cfg, int k_folds,
                        std::uint64_t seed, int threads = 1);

/// CSV (header + one row per fold + mean row, 6 significant digits) plus a
/// <path>.json manifest with config, seeds, and the CSV checksum.
void write_report(const CvReport& report, const std::filesystem::path& path);

/// One labeled series for plotting.
struct PlotSeries {
    std::string label;
    std::vector<double> values;
};

/// Standalone deterministic SVG: one polyline per series (the signal first,
/// then each prediction), axis ticks, and a legend.
void plot_signal(const Signal& actual, const std::vector<PlotSeries>& predictions,
                 const std::filesystem::path& path);

} // namespace evosts
