#include "evosts/lstm.hpp"

#include "evosts/checksum.hpp"
#include "evosts/errors.hpp"
#include "evosts/rng.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>

namespace evosts {

namespace {

void check_dims(const LstmDims& dims, const char* where) {
    if (dims.input_dim < 1 || dims.hidden_dim < 1 || dims.output_dim < 1)
        throw InvalidConfigError(std::string(where) + ": all dims must be >= 1");
}

Eigen::VectorXd sigmoid(const Eigen::VectorXd& v) {
    return v.unaryExpr([](double x) { return 1.0 / (1.0 + std::exp(-x)); });
}

LstmWeights zeros_like(const LstmWeights& w) {
    LstmWeights z;
    z.dims = w.dims;
    visit_blocks([](auto& dst, const auto& src) { dst = src.Zero(src.rows(), src.cols()); }, z, w);
    return z;
}

void fill_uniform_rowmajor(Eigen::MatrixXd& m, RngStream& stream, double bound) {
    for (Eigen::Index r = 0; r < m.rows(); ++r)
        for (Eigen::Index c = 0; c < m.cols(); ++c) m(r, c) = stream.uniform(-bound, bound);
}

} // namespace

ParameterCount count_parameters(const LstmDims& dims) {
    check_dims(dims, "count_parameters");
    const std::int64_t f = dims.input_dim, h = dims.hidden_dim, t = dims.output_dim;
    ParameterCount count;
    count.lstm_count = 4 * h * (f + h + 1);
    count.dense_count = t * (h + 1);
    count.total = count.lstm_count + count.dense_count;
    return count;
}

LstmWeights init_weights(const LstmDims& dims, std::uint64_t seed) {
    check_dims(dims, "init_weights");
    const int f = dims.input_dim, h = dims.hidden_dim, t = dims.output_dim;
    RngStream stream = RngStream::derive(seed, StreamKind::weight_init);

    LstmWeights w;
    w.dims = dims;
    const double gate_bound = 1.0 / std::sqrt(static_cast<double>(f + h));
    for (Eigen::MatrixXd* m : {&w.w_input, &w.w_forget, &w.w_cell, &w.w_output}) {
        m->resize(h, f + h);
        fill_uniform_rowmajor(*m, stream, gate_bound);
    }
    w.b_input = Eigen::VectorXd::Zero(h);
    w.b_forget = Eigen::VectorXd::Ones(h);
    w.b_cell = Eigen::VectorXd::Zero(h);
    w.b_output = Eigen::VectorXd::Zero(h);

    w.w_dense.resize(t, h);
    fill_uniform_rowmajor(w.w_dense, stream, 1.0 / std::sqrt(static_cast<double>(h)));
    w.b_dense = Eigen::VectorXd::Zero(t);
    return w;
}

bool weights_equal(const LstmWeights& a, const LstmWeights& b) {
    if (a.dims.input_dim != b.dims.input_dim || a.dims.hidden_dim != b.dims.hidden_dim ||
        a.dims.output_dim != b.dims.output_dim)
        return false;
    bool equal = true;
    visit_blocks(
        [&](const auto& x, const auto& y) {
            if (x.rows() != y.rows() || x.cols() != y.cols() ||
                !(x.array() == y.array()).all())
                equal = false;
        },
        a, b);
    return equal;
}

std::string weights_checksum(const LstmWeights& weights) {
    std::uint64_t hash = 0xCBF29CE484222325ull;
    visit_blocks(
        [&](const auto& block) {
            for (Eigen::Index r = 0; r < block.rows(); ++r) {
                for (Eigen::Index c = 0; c < block.cols(); ++c) {
                    const double v = block(r, c);
                    hash = fnv1a64(&v, sizeof(v), hash);
                }
            }
        },
        weights);
    return checksum_hex(hash);
}

Eigen::VectorXd forward(const LstmWeights& weights, const Eigen::VectorXd& x,
                        ForwardCache* cache) {
    const int f = weights.dims.input_dim;
    if (x.size() != f)
        throw DimensionMismatchError("forward: input length " + std::to_string(x.size()) +
                                     " != input_dim " + std::to_string(f));
    if (!x.allFinite()) throw NonFiniteInputError("forward: non-finite input");

    // h0 = c0 = 0, so only the first F columns of each gate matrix act.
    const auto xw = [&](const Eigen::MatrixXd& m) { return m.leftCols(f) * x; };
    const Eigen::VectorXd gate_i = sigmoid(xw(weights.w_input) + weights.b_input);
    const Eigen::VectorXd gate_f = sigmoid(xw(weights.w_forget) + weights.b_forget);
    const Eigen::VectorXd gate_g = (xw(weights.w_cell) + weights.b_cell).array().tanh();
    const Eigen::VectorXd gate_o = sigmoid(xw(weights.w_output) + weights.b_output);
    const Eigen::VectorXd cell = gate_i.cwiseProduct(gate_g); // f * c0 vanishes
    const Eigen::VectorXd cell_tanh = cell.array().tanh();
    const Eigen::VectorXd hidden = gate_o.cwiseProduct(cell_tanh);
    Eigen::VectorXd prediction = weights.w_dense * hidden + weights.b_dense;

    if (cache) {
        cache->input = x;
        cache->gate_i = gate_i;
        cache->gate_f = gate_f;
        cache->gate_g = gate_g;
        cache->gate_o = gate_o;
        cache->cell = cell;
        cache->cell_tanh = cell_tanh;
        cache->hidden = hidden;
    }
    return prediction;
}

double mse_loss(const Eigen::VectorXd& prediction, const Eigen::VectorXd& target) {
    if (prediction.size() != target.size())
        throw DimensionMismatchError("mse_loss: length mismatch");
    if (prediction.size() == 0) throw EmptyInputError("mse_loss: empty vectors");
    return (prediction - target).squaredNorm() / static_cast<double>(prediction.size());
}

LstmGradients backward(const LstmWeights& weights, const Eigen::VectorXd& x,
                       const Eigen::VectorXd& target, const ForwardCache& cache) {
    const int f = weights.dims.input_dim;
    const int h = weights.dims.hidden_dim;
    const int t = weights.dims.output_dim;
    if (x.size() != f || target.size() != t)
        throw DimensionMismatchError("backward: input/target lengths do not match dims");
    if (cache.input.size() != x.size() || !(cache.input.array() == x.array()).all() ||
        cache.hidden.size() != h)
        throw CacheMismatchError("backward: cache was not produced by forward on this input");

    const Eigen::VectorXd prediction = weights.w_dense * cache.hidden + weights.b_dense;
    const Eigen::VectorXd d_pred = 2.0 / static_cast<double>(t) * (prediction - target);

    LstmGradients grads = zeros_like(weights);
    grads.w_dense = d_pred * cache.hidden.transpose();
    grads.b_dense = d_pred;

    const Eigen::VectorXd d_hidden = weights.w_dense.transpose() * d_pred;
    const Eigen::VectorXd d_gate_o = d_hidden.cwiseProduct(cache.cell_tanh);
    const Eigen::VectorXd d_cell = d_hidden.cwiseProduct(cache.gate_o)
                                       .cwiseProduct((1.0 - cache.cell_tanh.array().square()).matrix());
    const Eigen::VectorXd d_gate_i = d_cell.cwiseProduct(cache.gate_g);
    const Eigen::VectorXd d_gate_g = d_cell.cwiseProduct(cache.gate_i);
    // d_gate_f is identically zero: the forget gate multiplies c0 = 0.

    const Eigen::VectorXd dz_i =
        d_gate_i.cwiseProduct(cache.gate_i).cwiseProduct((1.0 - cache.gate_i.array()).matrix());
    const Eigen::VectorXd dz_g = d_gate_g.cwiseProduct((1.0 - cache.gate_g.array().square()).matrix());
    const Eigen::VectorXd dz_o =
        d_gate_o.cwiseProduct(cache.gate_o).cwiseProduct((1.0 - cache.gate_o.array()).matrix());

    // Pre-activation gradients times [x; h0]^T: only the x block is nonzero.
    grads.w_input.leftCols(f) = dz_i * x.transpose();
    grads.w_cell.leftCols(f) = dz_g * x.transpose();
    grads.w_output.leftCols(f) = dz_o * x.transpose();
    grads.b_input = dz_i;
    grads.b_cell = dz_g;
    grads.b_output = dz_o;
    return grads;
}

LstmWeights train_epoch(const LstmWeights& weights, const Dataset& dataset,
                        const TrainConfig& cfg, RngStream& rng_stream, SgdState* state) {
    if (dataset.pairs.empty()) throw EmptyDatasetError("train_epoch: empty dataset");
    if (cfg.batch_size < 1) throw InvalidConfigError("train_epoch: batch_size must be >= 1");
    if (cfg.learning_rate < 0.0)
        throw InvalidConfigError("train_epoch: learning_rate must be >= 0");

    const std::size_t n = dataset.pairs.size();
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    rng_stream.shuffle(order);

    LstmWeights current = weights;
    SgdState local;
    SgdState& sgd = state ? *state : local;
    if (!sgd.initialized) {
        sgd.velocity = zeros_like(weights);
        sgd.initialized = true;
    }

    const auto batch = static_cast<std::size_t>(cfg.batch_size);
    for (std::size_t begin = 0; begin < n; begin += batch) {
        const std::size_t end = std::min(begin + batch, n);
        LstmGradients accum = zeros_like(current);
        ForwardCache cache;
        for (std::size_t k = begin; k < end; ++k) {
            const WindowPair& pair = dataset.pairs[order[k]];
            forward(current, pair.features, &cache);
            const LstmGradients g = backward(current, pair.features, pair.target, cache);
            visit_blocks([](auto& acc, const auto& grad) { acc += grad; }, accum, g);
        }
        const double scale = 1.0 / static_cast<double>(end - begin);
        visit_blocks(
            [&](auto& w, auto& v, const auto& g) {
                v = kSgdMomentum * v - cfg.learning_rate * scale * g;
                w += v;
            },
            current, sgd.velocity, accum);
    }
    return current;
}

double dataset_mse(const LstmWeights& weights, const Dataset& dataset, std::size_t begin,
                   std::size_t end) {
    if (begin >= end || end > dataset.pairs.size())
        throw EmptyInputError("dataset_mse: empty pair range");
    double total = 0.0;
    for (std::size_t i = begin; i < end; ++i) {
        total += mse_loss(forward(weights, dataset.pairs[i].features), dataset.pairs[i].target);
    }
    return total / static_cast<double>(end - begin);
}

TrainResult train(const LstmWeights& weights, const Dataset& dataset, const TrainConfig& cfg) {
    if (dataset.pairs.size() < 2)
        throw EmptyDatasetError("train: need at least 2 pairs for a validation split");
    if (cfg.epochs < 1) throw InvalidConfigError("train: epochs must be >= 1");
    if (cfg.early_stop_patience < 1)
        throw InvalidConfigError("train: early_stop_patience must be >= 1");
    if (!(cfg.val_fraction > 0.0 && cfg.val_fraction < 1.0))
        throw InvalidConfigError("train: val_fraction must be in (0, 1)");

    const std::size_t n = dataset.pairs.size();
    const auto n_val = static_cast<std::size_t>(
        std::ceil(cfg.val_fraction * static_cast<double>(n)));
    const std::size_t n_train = n - n_val;
    if (n_train == 0) throw EmptyDatasetError("train: validation holdout leaves no training pairs");

    Dataset train_part = dataset;
    train_part.pairs.assign(dataset.pairs.begin(),
                            dataset.pairs.begin() + static_cast<std::ptrdiff_t>(n_train));

    RngStream stream = RngStream::derive(cfg.seed, StreamKind::shuffle);
    SgdState sgd;
    TrainResult result;
    LstmWeights current = weights;
    result.weights = weights;

    double best_val = std::numeric_limits<double>::infinity();
    int epochs_without_improvement = 0;
    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        current = train_epoch(current, train_part, cfg, stream, &sgd);
        EpochStats stats;
        stats.train_mse = dataset_mse(current, dataset, 0, n_train);
        stats.val_mse = dataset_mse(current, dataset, n_train, n);
        result.history.push_back(stats);

        if (stats.val_mse < best_val) {
            best_val = stats.val_mse;
            result.weights = current;
            result.best_epoch = epoch;
            epochs_without_improvement = 0;
        } else {
            ++epochs_without_improvement;
            if (epochs_without_improvement >= cfg.early_stop_patience) break;
        }
    }
    return result;
}

std::vector<Eigen::VectorXd> predict_batch(const LstmWeights& weights,
                                           const std::vector<Eigen::VectorXd>& features) {
    std::vector<Eigen::VectorXd> predictions;
    predictions.reserve(features.size());
    for (const auto& x : features) predictions.push_back(forward(weights, x));
    return predictions;
}

void save_checkpoint(const LstmWeights& weights, const std::filesystem::path& path,
                     std::uint64_t seed, int epoch) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("save_checkpoint: cannot write " + path.string());
    visit_blocks(
        [&](const auto& block) {
            for (Eigen::Index r = 0; r < block.rows(); ++r) {
                for (Eigen::Index c = 0; c < block.cols(); ++c) {
                    const double v = block(r, c);
                    out.write(reinterpret_cast<const char*>(&v), sizeof(v));
                }
            }
        },
        weights);
    if (!out) throw IoError("save_checkpoint: short write to " + path.string());
    out.close();

    nlohmann::json sidecar{
        {"schema_version", 1},
        {"dims",
         {{"input_dim", weights.dims.input_dim},
          {"hidden_dim", weights.dims.hidden_dim},
          {"output_dim", weights.dims.output_dim}}},
        {"seed", seed},
        {"epoch", epoch},
        {"checksum", weights_checksum(weights)},
    };
    std::ofstream meta(path.string() + ".json");
    if (!meta) throw IoError("save_checkpoint: cannot write sidecar for " + path.string());
    meta << sidecar.dump(2) << "\n";
}

LstmWeights load_checkpoint(const std::filesystem::path& path) {
    std::ifstream meta(path.string() + ".json");
    if (!meta)
        throw FileNotFoundError("load_checkpoint: missing sidecar " + path.string() + ".json");
    nlohmann::json sidecar;
    try {
        meta >> sidecar;
    } catch (const nlohmann::json::exception& e) {
        throw ParseError("load_checkpoint: bad sidecar: " + std::string(e.what()));
    }
    LstmDims dims;
    dims.input_dim = sidecar.at("dims").at("input_dim").get<int>();
    dims.hidden_dim = sidecar.at("dims").at("hidden_dim").get<int>();
    dims.output_dim = sidecar.at("dims").at("output_dim").get<int>();
    check_dims(dims, "load_checkpoint");

    LstmWeights w;
    w.dims = dims;
    const int f = dims.input_dim, h = dims.hidden_dim, t = dims.output_dim;
    w.w_input.resize(h, f + h);
    w.w_forget.resize(h, f + h);
    w.w_cell.resize(h, f + h);
    w.w_output.resize(h, f + h);
    w.b_input.resize(h);
    w.b_forget.resize(h);
    w.b_cell.resize(h);
    w.b_output.resize(h);
    w.w_dense.resize(t, h);
    w.b_dense.resize(t);

    std::ifstream in(path, std::ios::binary);
    if (!in) throw FileNotFoundError("load_checkpoint: cannot open " + path.string());
    bool truncated = false;
    visit_blocks(
        [&](auto& block) {
            for (Eigen::Index r = 0; r < block.rows() && !truncated; ++r) {
                for (Eigen::Index c = 0; c < block.cols(); ++c) {
                    double v = 0.0;
                    if (!in.read(reinterpret_cast<char*>(&v), sizeof(v))) {
                        truncated = true;
                        break;
                    }
                    block(r, c) = v;
                }
            }
        },
        w);
    if (truncated)
        throw ParseError("load_checkpoint: " + path.string() + " shorter than sidecar dims");
    if (weights_checksum(w) != sidecar.at("checksum").get<std::string>())
        throw ParseError("load_checkpoint: checksum mismatch for " + path.string());
    return w;
}

} // namespace evosts
