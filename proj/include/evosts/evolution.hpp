#pragma once

#include "evosts/lstm.hpp"
#include "evosts/signal_io.hpp"
#include "evosts/sparse_coding.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace evosts {

/// Configuration of one evolutionary run.
struct EvoConfig {
    int generations = 3;            // l
    int children = 4;               // k
    int hidden_dim = 16;            // H of every child network
    int epochs_per_generation = 10; // SGD epochs each child runs per generation
    std::uint64_t master_seed = 0; // root of every derived stream
    SparseConfig sparse;           // encoder used for scoring
    TrainConfig train;             // batch_size / learning_rate for child SGD
    int dict_atoms = 0;            // dictionary size; 0 = 2 * target_len
    int dict_iters = 30;           // dictionary learning outer iterations
    int dict_window_stride = 0;    // sub-window step; 0 = max(1, target_len / 2)
    bool relearn_dictionary_per_partition = true;
    bool score_on_holdout = false; // score children on a tail split of the partition
};

/// One trained-and-scored candidate weight set.
struct ChildResult {
    int child_index = 0;
    LstmWeights weights;
    double score = 0.0;                // mean reconstruction loss, finite
    std::vector<double> train_history; // per-epoch training MSE
};

/// Outcome of one spawn -> train -> score -> select cycle.
struct GenerationResult {
    int generation_index = 0;
    int partition_id = 0;
    std::string dictionary_checksum;
    std::vector<ChildResult> children;
    int best_index = 0; // first argmin of child scores
};

/// Full run record: exactly config.generations generation results.
struct EvoRun {
    EvoConfig config;
    std::vector<GenerationResult> generations;
    LstmWeights first_generation_best;
    LstmWeights final_generation_best;
};

/// k value copies of gamma. Stochastic divergence comes only from each
/// child's derived rng stream, applied later during training.
std::vector<LstmWeights> spawn_children(const LstmWeights& gamma, int k);

/// Mean reconstruction loss of the model's predictions against the
/// partition dictionary. Requires dictionary atom_len == output_dim.
double evaluate_child(const LstmWeights& weights, const Dictionary& dictionary,
                      const std::vector<Eigen::VectorXd>& features, const SparseConfig& cfg);

/// Spawns, trains, and scores k children of gamma on one partition; children
/// may run concurrently and the result is independent of scheduling.
GenerationResult run_generation(const LstmWeights& gamma, const Dataset& partition,
                                const Dictionary& dictionary, const EvoConfig& cfg,
                                int generation_index, int threads = 1);

/// The full generational loop: partition the dataset into `generations`
/// time-ordered slices, learn (or reuse) a dictionary per slice, and chain
/// best children as Gamma priors. Always runs every generation.
EvoRun evosts(const Dataset& dataset, const EvoConfig& cfg, int threads = 1);

/// Writes <out_dir>/run_manifest.json plus first_best / final_best weight
/// checkpoints. Byte-identical for identical runs.
void write_run(const EvoRun& run, const std::filesystem::path& out_dir);

} // namespace evosts
