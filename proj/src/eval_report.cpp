#include "evosts/eval_report.hpp"

#include "evosts/checksum.hpp"
#include "evosts/errors.hpp"
#include "evosts/manifest.hpp"
#include "evosts/parallel.hpp"
#include "evosts/rng.hpp"

#include <nlohmann/json.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>

namespace evosts {

namespace {

void check_paired(const std::vector<Eigen::VectorXd>& pred,
                  const std::vector<Eigen::VectorXd>& actual, const char* where) {
    if (pred.size() != actual.size())
        throw DimensionMismatchError(std::string(where) + ": sequence counts differ");
    if (pred.empty()) throw EmptyInputError(std::string(where) + ": no pairs");
    for (std::size_t i = 0; i < pred.size(); ++i) {
        if (pred[i].size() != actual[i].size())
            throw DimensionMismatchError(std::string(where) + ": vector length mismatch at pair " +
                                         std::to_string(i));
        if (pred[i].size() == 0)
            throw EmptyInputError(std::string(where) + ": empty vector at pair " +
                                  std::to_string(i));
    }
}

std::string format_sig6(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return buf;
}

} // namespace

double rmse(const std::vector<Eigen::VectorXd>& pred,
            const std::vector<Eigen::VectorXd>& actual) {
    check_paired(pred, actual, "rmse");
    double sum_sq = 0.0;
    std::size_t count = 0;
    for (std::size_t i = 0; i < pred.size(); ++i) {
        sum_sq += (pred[i] - actual[i]).squaredNorm();
        count += static_cast<std::size_t>(pred[i].size());
    }
    return std::sqrt(sum_sq / static_cast<double>(count));
}

double r2(const std::vector<Eigen::VectorXd>& pred,
          const std::vector<Eigen::VectorXd>& actual) {
    check_paired(pred, actual, "r2");
    double actual_sum = 0.0;
    std::size_t count = 0;
    for (const auto& a : actual) {
        actual_sum += a.sum();
        count += static_cast<std::size_t>(a.size());
    }
    const double mean = actual_sum / static_cast<double>(count);

    double ss_res = 0.0, ss_tot = 0.0;
    for (std::size_t i = 0; i < pred.size(); ++i) {
        ss_res += (pred[i] - actual[i]).squaredNorm();
        ss_tot += (actual[i].array() - mean).square().sum();
    }
    if (ss_tot == 0.0) throw ZeroVarianceError("r2: actual values have zero variance");
    return 1.0 - ss_res / ss_tot;
}

CvReport cross_validate(const Dataset& dataset, const EvoConfig& evo_cfg, int k_folds,
                        std::uint64_t seed, int threads) {
    const FoldAssignment folds = kfold_split(dataset, k_folds, seed);

    CvReport report;
    report.config = evo_cfg;
    report.split_seed = seed;
    report.rows.resize(static_cast<std::size_t>(k_folds));

    parallel_for(static_cast<std::size_t>(k_folds), threads, [&](std::size_t f) {
        std::vector<std::size_t> train_indices, test_indices;
        for (std::size_t i = 0; i < dataset.pairs.size(); ++i) {
            (folds.assignment[i] == static_cast<int>(f) ? test_indices : train_indices)
                .push_back(i);
        }
        const Dataset train_raw = subset(dataset, train_indices);
        const Dataset test_raw = subset(dataset, test_indices);
        if (train_raw.pairs.empty() || test_raw.pairs.empty())
            throw TooFewPairsError("cross_validate: fold " + std::to_string(f) +
                                   " has an empty side");

        const NormalizationStats stats = covered_stats(train_raw);
        const Dataset train_norm = apply_normalization(train_raw, stats);

        EvoConfig fold_cfg = evo_cfg;
        fold_cfg.master_seed = RngStream::derive_seed(evo_cfg.master_seed, StreamKind::fold,
                                                      {static_cast<std::uint64_t>(f)});
        const EvoRun run = evosts(train_norm, fold_cfg, 1);

        std::vector<Eigen::VectorXd> pred_random, pred_optimized, actuals;
        pred_random.reserve(test_raw.pairs.size());
        pred_optimized.reserve(test_raw.pairs.size());
        actuals.reserve(test_raw.pairs.size());
        for (const WindowPair& pair : test_raw.pairs) {
            const Eigen::VectorXd x = stats.apply(pair.features);
            pred_random.push_back(stats.invert(forward(run.first_generation_best, x)));
            pred_optimized.push_back(stats.invert(forward(run.final_generation_best, x)));
            actuals.push_back(pair.target);
        }

        FoldReportRow row;
        row.partition_id = static_cast<int>(f) + 1;
        row.r2_random = r2(pred_random, actuals);
        row.r2_optimized = r2(pred_optimized, actuals);
        row.rmse_random = rmse(pred_random, actuals);
        row.rmse_optimized = rmse(pred_optimized, actuals);
        report.rows[f] = row;
    });

    FoldReportRow& means = report.means;
    for (const FoldReportRow& row : report.rows) {
        means.r2_random += row.r2_random;
        means.r2_optimized += row.r2_optimized;
        means.rmse_random += row.rmse_random;
        means.rmse_optimized += row.rmse_optimized;
    }
    const auto n = static_cast<double>(report.rows.size());
    means.r2_random /= n;
    means.r2_optimized /= n;
    means.rmse_random /= n;
    means.rmse_optimized /= n;
    return report;
}

void write_report(const CvReport& report, const std::filesystem::path& path) {
    if (report.rows.empty()) throw IoError("write_report: refusing to write an empty report");

    std::string csv = "partition,r2_random,r2_optimized,rmse_random,rmse_optimized\n";
    for (const FoldReportRow& row : report.rows) {
        csv += std::to_string(row.partition_id) + "," + format_sig6(row.r2_random) + "," +
               format_sig6(row.r2_optimized) + "," + format_sig6(row.rmse_random) + "," +
               format_sig6(row.rmse_optimized) + "\n";
    }
    csv += "mean," + format_sig6(report.means.r2_random) + "," +
           format_sig6(report.means.r2_optimized) + "," + format_sig6(report.means.rmse_random) +
           "," + format_sig6(report.means.rmse_optimized) + "\n";

    std::ofstream out(path);
    if (!out) throw IoError("write_report: cannot write " + path.string());
    out << csv;
    out.close();
    if (!out) throw IoError("write_report: short write to " + path.string());

    nlohmann::json manifest{
        {"schema_version", 1},
        {"k_folds", report.rows.size()},
        {"split_seed", report.split_seed},
        {"config", evo_config_json(report.config)},
        {"csv_checksum", checksum_hex(fnv1a64(csv.data(), csv.size()))},
    };
    std::ofstream meta(path.string() + ".json");
    if (!meta) throw IoError("write_report: cannot write sidecar for " + path.string());
    meta << manifest.dump(2) << "\n";
}

} // namespace evosts
