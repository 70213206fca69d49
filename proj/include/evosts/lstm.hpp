#pragma once

#include "evosts/signal_io.hpp"

#include <Eigen/Core>
#include <cstdint>
#include <filesystem>
#include <vector>

namespace evosts {

class RngStream;

struct LstmDims {
    int input_dim = 0;  // F, consumed as one time step of F features
    int hidden_dim = 0; // H
    int output_dim = 0; // T, direct multi-step horizon
};

struct ParameterCount {
    std::int64_t lstm_count = 0;  // 4*H*(F+H+1)
    std::int64_t dense_count = 0; // T*(H+1)
    std::int64_t total = 0;
};

ParameterCount count_parameters(const LstmDims& dims);

/// Full parameter set of one network. Gate weight matrices act on the
/// concatenated [x; h_prev] vector, so each is H x (F+H).
struct LstmWeights {
    Eigen::MatrixXd w_input, w_forget, w_cell, w_output; // H x (F+H)
    Eigen::VectorXd b_input, b_forget, b_cell, b_output; // H
    Eigen::MatrixXd w_dense;                             // T x H
    Eigen::VectorXd b_dense;                             // T
    LstmDims dims;
};

/// Applies fn to every parameter block of one or more weight structs in the
/// serialization order: gate matrices i,f,g,o, gate biases i,f,g,o, dense
/// weight, dense bias.
template <typename Fn, typename... Ws>
void visit_blocks(Fn&& fn, Ws&... weights) {
    fn(weights.w_input...);
    fn(weights.w_forget...);
    fn(weights.w_cell...);
    fn(weights.w_output...);
    fn(weights.b_input...);
    fn(weights.b_forget...);
    fn(weights.b_cell...);
    fn(weights.b_output...);
    fn(weights.w_dense...);
    fn(weights.b_dense...);
}

bool weights_equal(const LstmWeights& a, const LstmWeights& b);

/// Checksum over all parameters in serialization order.
std::string weights_checksum(const LstmWeights& weights);

/// Uniform +-1/sqrt(fan_in) weights per matrix; forget bias 1, other biases 0.
LstmWeights init_weights(const LstmDims& dims, std::uint64_t seed);

/// Intermediates of one forward pass, consumed by backward().
struct ForwardCache {
    Eigen::VectorXd input;     // the x this cache was built from
    Eigen::VectorXd gate_i, gate_f, gate_g, gate_o;
    Eigen::VectorXd cell, cell_tanh, hidden;
};

/// One LSTM step from zero initial hidden/cell state, then the dense head.
Eigen::VectorXd forward(const LstmWeights& weights, const Eigen::VectorXd& x,
                        ForwardCache* cache = nullptr);

double mse_loss(const Eigen::VectorXd& prediction, const Eigen::VectorXd& target);

using LstmGradients = LstmWeights;

/// Analytic gradient of mse_loss(forward(weights, x), target) w.r.t. every
/// parameter. The cache must come from forward() on the same x and shapes.
LstmGradients backward(const LstmWeights& weights, const Eigen::VectorXd& x,
                       const Eigen::VectorXd& target, const ForwardCache& cache);

struct TrainConfig {
    int epochs = 30;
    int batch_size = 32;
    double learning_rate = 0.05;
    int early_stop_patience = 5;
    double val_fraction = 0.2;
    std::uint64_t seed = 0;
};

/// Momentum buffer carried across epochs of one training run.
struct SgdState {
    LstmWeights velocity;
    bool initialized = false;
};

inline constexpr double kSgdMomentum = 0.9;

/// One epoch of minibatch SGD (momentum 0.9): shuffles pair order with
/// rng_stream, averages gradients per batch, applies the update. The stream
/// is the sole source of stochasticity. Passing the same SgdState across
/// calls carries momentum across epochs; null starts from rest.
LstmWeights train_epoch(const LstmWeights& weights, const Dataset& dataset,
                        const TrainConfig& cfg, RngStream& rng_stream,
                        SgdState* state = nullptr);

struct EpochStats {
    double train_mse = 0.0;
    double val_mse = 0.0;
};

struct TrainResult {
    LstmWeights weights; // parameters of the best validation epoch
    std::vector<EpochStats> history;
    int best_epoch = -1;
};

/// Trains with a time-ordered validation holdout (the last
/// ceil(val_fraction*n) pairs) and early stopping: halts after
/// early_stop_patience consecutive epochs without validation improvement.
TrainResult train(const LstmWeights& weights, const Dataset& dataset, const TrainConfig& cfg);

/// Element-wise forward over a feature sequence, order preserved.
std::vector<Eigen::VectorXd> predict_batch(const LstmWeights& weights,
                                           const std::vector<Eigen::VectorXd>& features);

/// Mean MSE over a set of pairs.
double dataset_mse(const LstmWeights& weights, const Dataset& dataset, std::size_t begin,
                   std::size_t end);

/// Flat little-endian binary in visit_blocks order (matrices row-major),
/// plus a JSON sidecar at path + ".json" with dims, seed and epoch.
/// Round-trips bit-exactly.
void save_checkpoint(const LstmWeights& weights, const std::filesystem::path& path,
                     std::uint64_t seed, int epoch);

LstmWeights load_checkpoint(const std::filesystem::path& path);

} // namespace evosts
