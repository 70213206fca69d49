#include "evosts/evolution.hpp"

#include "evosts/checksum.hpp"
#include "evosts/errors.hpp"
#include "evosts/manifest.hpp"
#include "evosts/parallel.hpp"
#include "evosts/rng.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>

namespace evosts {

namespace {

void check_evo_config(const EvoConfig& cfg) {
    if (cfg.generations < 1) throw InvalidConfigError("generations must be >= 1");
    if (cfg.children < 1) throw InvalidConfigError("children must be >= 1");
    if (cfg.hidden_dim < 1) throw InvalidConfigError("hidden_dim must be >= 1");
    if (cfg.epochs_per_generation < 1)
        throw InvalidConfigError("epochs_per_generation must be >= 1");
    if (cfg.dict_atoms < 0) throw InvalidConfigError("dict_atoms must be >= 0");
    if (cfg.dict_iters < 1) throw InvalidConfigError("dict_iters must be >= 1");
    if (cfg.dict_window_stride < 0)
        throw InvalidConfigError("dict_window_stride must be >= 0");
}

int resolve_dict_atoms(const EvoConfig& cfg, int target_len) {
    return cfg.dict_atoms > 0 ? cfg.dict_atoms : 2 * target_len;
}

int resolve_dict_stride(const EvoConfig& cfg, int target_len) {
    return cfg.dict_window_stride > 0 ? cfg.dict_window_stride
                                      : std::max(1, target_len / 2);
}

Dictionary learn_partition_dictionary(const Dataset& partition, const EvoConfig& cfg,
                                      std::uint64_t dict_seed, int threads) {
    const int target_len = partition.target_len;
    const auto windows =
        sliding_subwindows(partition, target_len, resolve_dict_stride(cfg, target_len));
    const auto result = learn_dictionary(windows, resolve_dict_atoms(cfg, target_len),
                                         cfg.sparse, cfg.dict_iters, dict_seed, threads);
    return result.dictionary;
}

} // namespace

nlohmann::json evo_config_json(const EvoConfig& cfg) {
    return nlohmann::json{
        {"generations", cfg.generations},
        {"children", cfg.children},
        {"hidden_dim", cfg.hidden_dim},
        {"epochs_per_generation", cfg.epochs_per_generation},
        {"master_seed", cfg.master_seed},
        {"sparse",
         {{"lambda", cfg.sparse.lambda},
          {"max_iter", cfg.sparse.max_iter},
          {"tol", cfg.sparse.tol}}},
        {"train",
         {{"batch_size", cfg.train.batch_size},
          {"learning_rate", cfg.train.learning_rate},
          {"val_fraction", cfg.train.val_fraction}}},
        {"dict_atoms", cfg.dict_atoms},
        {"dict_iters", cfg.dict_iters},
        {"dict_window_stride", cfg.dict_window_stride},
        {"relearn_dictionary_per_partition", cfg.relearn_dictionary_per_partition},
        {"score_on_holdout", cfg.score_on_holdout},
    };
}

std::vector<LstmWeights> spawn_children(const LstmWeights& gamma, int k) {
    if (k < 1) throw InvalidConfigError("spawn_children: k must be >= 1");
    return std::vector<LstmWeights>(static_cast<std::size_t>(k), gamma);
}

double evaluate_child(const LstmWeights& weights, const Dictionary& dictionary,
                      const std::vector<Eigen::VectorXd>& features,
                      const SparseConfig& cfg) {
    if (dictionary.atom_len() != weights.dims.output_dim)
        throw DimensionMismatchError(
            "evaluate_child: dictionary atom_len " + std::to_string(dictionary.atom_len()) +
            " != model output_dim " + std::to_string(weights.dims.output_dim));
    if (features.empty()) throw EmptyInputError("evaluate_child: no windows to score");

    double total = 0.0;
    for (const auto& x : features) {
        total += reconstruction_loss(dictionary, forward(weights, x), cfg);
    }
    const double score = total / static_cast<double>(features.size());
    if (!std::isfinite(score))
        throw NonFiniteInputError("evaluate_child: non-finite reconstruction score");
    return score;
}

GenerationResult run_generation(const LstmWeights& gamma, const Dataset& partition,
                                const Dictionary& dictionary, const EvoConfig& cfg,
                                int generation_index, int threads) {
    check_evo_config(cfg);
    if (partition.pairs.empty()) throw EmptyPartitionError("run_generation: empty partition");
    if (gamma.dims.input_dim != partition.feature_len ||
        gamma.dims.output_dim != partition.target_len)
        throw DimensionMismatchError("run_generation: gamma dims do not match partition windows");

    const std::size_t n = partition.pairs.size();
    std::size_t n_train = n;
    if (cfg.score_on_holdout) {
        const auto n_score = static_cast<std::size_t>(
            std::ceil(cfg.train.val_fraction * static_cast<double>(n)));
        if (n_score == 0 || n_score >= n)
            throw EmptyPartitionError("run_generation: holdout split leaves an empty side");
        n_train = n - n_score;
    }
    Dataset train_part = partition;
    train_part.pairs.assign(partition.pairs.begin(),
                            partition.pairs.begin() + static_cast<std::ptrdiff_t>(n_train));
    std::vector<Eigen::VectorXd> score_features;
    for (std::size_t i = cfg.score_on_holdout ? n_train : 0; i < n; ++i)
        score_features.push_back(partition.pairs[i].features);

    GenerationResult result;
    result.generation_index = generation_index;
    result.partition_id = generation_index;
    result.dictionary_checksum = dictionary_checksum(dictionary);
    result.children.resize(static_cast<std::size_t>(cfg.children));

    const auto g = static_cast<std::uint64_t>(generation_index);
    parallel_for(static_cast<std::size_t>(cfg.children), threads, [&](std::size_t i) {
        RngStream stream =
            RngStream::derive(cfg.master_seed, StreamKind::child, {g, static_cast<std::uint64_t>(i)});
        ChildResult child;
        child.child_index = static_cast<int>(i);
        child.weights = gamma;
        SgdState sgd;
        for (int epoch = 0; epoch < cfg.epochs_per_generation; ++epoch) {
            child.weights = train_epoch(child.weights, train_part, cfg.train, stream, &sgd);
            child.train_history.push_back(
                dataset_mse(child.weights, train_part, 0, train_part.pairs.size()));
        }
        child.score = evaluate_child(child.weights, dictionary, score_features, cfg.sparse);
        result.children[i] = std::move(child);
    });

    result.best_index = 0;
    for (std::size_t i = 1; i < result.children.size(); ++i) {
        if (result.children[i].score < result.children[result.best_index].score)
            result.best_index = static_cast<int>(i);
    }
    return result;
}

EvoRun evosts(const Dataset& dataset, const EvoConfig& cfg, int threads) {
    check_evo_config(cfg);
    const std::vector<Dataset> partitions = partition_generations(dataset, cfg.generations);

    LstmDims dims{dataset.feature_len, cfg.hidden_dim, dataset.target_len};
    LstmWeights gamma = init_weights(dims, cfg.master_seed);

    EvoRun run;
    run.config = cfg;

    Dictionary shared_dictionary;
    if (!cfg.relearn_dictionary_per_partition) {
        shared_dictionary = learn_partition_dictionary(
            dataset, cfg, RngStream::derive_seed(cfg.master_seed, StreamKind::dictionary),
            threads);
    }

    for (int g = 0; g < cfg.generations; ++g) {
        const Dataset& partition = partitions[static_cast<std::size_t>(g)];
        const Dictionary dictionary =
            cfg.relearn_dictionary_per_partition
                ? learn_partition_dictionary(
                      partition, cfg,
                      RngStream::derive_seed(cfg.master_seed, StreamKind::dictionary,
                                             {static_cast<std::uint64_t>(g)}),
                      threads)
                : shared_dictionary;

        GenerationResult gen = run_generation(gamma, partition, dictionary, cfg, g, threads);
        gamma = gen.children[static_cast<std::size_t>(gen.best_index)].weights;
        if (g == 0) run.first_generation_best = gamma;
        run.generations.push_back(std::move(gen));
    }
    run.final_generation_best = gamma;
    return run;
}

void write_run(const EvoRun& run, const std::filesystem::path& out_dir) {
    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (ec) throw IoError("write_run: cannot create " + out_dir.string());

    const EvoConfig& cfg = run.config;
    nlohmann::json manifest{
        {"schema_version", 1},
        {"config", evo_config_json(cfg)},
        {"first_best_checksum", weights_checksum(run.first_generation_best)},
        {"final_best_checksum", weights_checksum(run.final_generation_best)},
    };

    nlohmann::json generations = nlohmann::json::array();
    for (const GenerationResult& gen : run.generations) {
        nlohmann::json children = nlohmann::json::array();
        for (const ChildResult& child : gen.children) {
            children.push_back({{"child_index", child.child_index},
                                {"score", child.score},
                                {"train_history", child.train_history},
                                {"weights_checksum", weights_checksum(child.weights)}});
        }
        generations.push_back({{"generation_index", gen.generation_index},
                               {"partition_id", gen.partition_id},
                               {"dictionary_checksum", gen.dictionary_checksum},
                               {"best_index", gen.best_index},
                               {"children", std::move(children)}});
    }
    manifest["generations"] = std::move(generations);

    std::ofstream out(out_dir / "run_manifest.json");
    if (!out) throw IoError("write_run: cannot write manifest in " + out_dir.string());
    out << manifest.dump(2) << "\n";
    out.close();

    save_checkpoint(run.first_generation_best, out_dir / "first_best.bin", cfg.master_seed, 0);
    save_checkpoint(run.final_generation_best, out_dir / "final_best.bin", cfg.master_seed,
                    cfg.generations - 1);
}

} // namespace evosts
