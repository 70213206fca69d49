#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <filesystem>
#include <vector>

namespace evosts {

/// Dictionary of atoms: each column of `atoms` is one unit-norm atom of
/// length atom_len. Overcomplete dictionaries (n_atoms > atom_len) are
/// expected in normal use.
struct Dictionary {
    Eigen::MatrixXd atoms; // atom_len x n_atoms

    int atom_len() const { return static_cast<int>(atoms.rows()); }
    int n_atoms() const { return static_cast<int>(atoms.cols()); }
};

struct SparseCode {
    Eigen::VectorXd coefficients;
    int iterations_used = 0;
    bool converged = false;
};

struct SparseConfig {
    double lambda = 0.1;    // sparsity weight
    int max_iter = 200;
    double tol = 1e-6;      // max-abs coefficient change below which we stop
    double fixed_step = 0.0; // 0 = auto (1/L from lipschitz_step)
    bool random_init = false; // start from a small seeded-random vector instead of zero
    std::uint64_t init_seed = 0;
};

/// Shrinkage: out[i] = sign(v[i]) * max(|v[i]| - theta, 0).
Eigen::VectorXd soft_threshold(const Eigen::VectorXd& v, double theta);

/// Step size 1/L with L the largest eigenvalue of D^T D, estimated by power
/// iteration (1e-6 relative change or 1000 iterations).
double lipschitz_step(const Dictionary& dictionary);

/// Reporting energy from the sparse-coding formulation: ||x - D a||_2 + lambda * ||a||_1.
double energy(const Dictionary& dictionary, const Eigen::VectorXd& x, const SparseCode& code,
              double lambda);

/// The objective the ISTA iteration provably descends for steps <= 1/L:
/// 0.5 * ||x - D a||_2^2 + lambda * ||a||_1. Descent and oracle checks use
/// this quantity; `energy` above is the reporting form.
double ista_objective(const Dictionary& dictionary, const Eigen::VectorXd& x,
                      const Eigen::VectorXd& coefficients, double lambda);

/// Proximal-gradient sparse inference:
///   a <- soft_threshold(a + eta * D^T (x - D a), eta * lambda)
/// until the max-abs coefficient change drops below cfg.tol or cfg.max_iter
/// is reached. When `objective_trace` is given, it receives ista_objective
/// after every iteration (index 0 = starting point).
SparseCode ista_encode(const Dictionary& dictionary, const Eigen::VectorXd& x,
                       const SparseConfig& cfg, std::vector<double>* objective_trace = nullptr);

/// Residual norm ||y - D a||_2 of the ISTA encoding of y; the sparsity
/// penalty is deliberately excluded from this score.
double reconstruction_loss(const Dictionary& dictionary, const Eigen::VectorXd& y,
                           const SparseConfig& cfg);

struct DictionaryLearnResult {
    Dictionary dictionary;
    /// Mean reporting energy over the training windows, one entry per outer
    /// iteration (measured after that iteration's encode pass).
    std::vector<double> mean_energy_history;
};

/// Alternating minimization: ISTA-encode every window, then one projected
/// gradient step on the dictionary (step 1/(lambda_max(A A^T) + eps)) with
/// unit-norm column renormalization. Atoms start as seeded random training
/// windows; dead atoms are replaced by the worst-reconstructed window.
DictionaryLearnResult learn_dictionary(const std::vector<Eigen::VectorXd>& windows, int n_atoms,
                                       const SparseConfig& cfg, int outer_iters,
                                       std::uint64_t seed, int threads = 1);

/// Flat little-endian binary of doubles, column by column (atom by atom),
/// with a JSON sidecar at path + ".json" recording atom_len, n_atoms,
/// lambda, seed and the data checksum.
void save_dictionary(const Dictionary& dictionary, const std::filesystem::path& path,
                     double lambda, std::uint64_t seed);

Dictionary load_dictionary(const std::filesystem::path& path);

/// Checksum of the atom matrix in storage order.
std::string dictionary_checksum(const Dictionary& dictionary);

} // namespace evosts
