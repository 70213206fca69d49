#include "evosts/sparse_coding.hpp"

#include "evosts/checksum.hpp"
#include "evosts/errors.hpp"
#include "evosts/parallel.hpp"
#include "evosts/rng.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <span>

namespace evosts {

namespace {

void check_atom_length(const Dictionary& dictionary, const Eigen::VectorXd& x,
                       const char* where) {
    if (x.size() != dictionary.atoms.rows()) {
        throw DimensionMismatchError(std::string(where) + ": vector length " +
                                     std::to_string(x.size()) + " != atom_len " +
                                     std::to_string(dictionary.atoms.rows()));
    }
}

// Largest eigenvalue of the PSD Gram matrix by power iteration. The start
// vector comes from a fixed stream; a deterministic all-ones start can be
// orthogonal to the dominant eigenvector for sign-symmetric dictionaries.
double largest_gram_eigenvalue(const Eigen::MatrixXd& gram) {
    const Eigen::Index n = gram.rows();
    RngStream stream(0x5CA1AB1Eull);
    Eigen::VectorXd v(n);
    for (Eigen::Index i = 0; i < n; ++i) v[i] = stream.uniform(-1.0, 1.0);
    double norm = v.norm();
    if (norm == 0.0) return 0.0;
    v /= norm;

    double eigenvalue = 0.0;
    for (int iter = 0; iter < 1000; ++iter) {
        Eigen::VectorXd w = gram * v;
        const double next = v.dot(w); // Rayleigh quotient
        const double wnorm = w.norm();
        if (wnorm == 0.0) return 0.0;
        v = w / wnorm;
        if (iter > 0 && std::abs(next - eigenvalue) <= 1e-6 * std::max(std::abs(next), 1e-300)) {
            eigenvalue = next;
            break;
        }
        eigenvalue = next;
    }
    return eigenvalue;
}

} // namespace

Eigen::VectorXd soft_threshold(const Eigen::VectorXd& v, double theta) {
    if (theta < 0.0) throw InvalidConfigError("soft_threshold: theta must be >= 0");
    Eigen::VectorXd out(v.size());
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        const double mag = std::abs(v[i]) - theta;
        out[i] = mag > 0.0 ? (v[i] > 0.0 ? mag : -mag) : 0.0;
    }
    return out;
}

double lipschitz_step(const Dictionary& dictionary) {
    if (dictionary.atoms.size() == 0)
        throw DegenerateDictionaryError("lipschitz_step: empty dictionary");
    const Eigen::MatrixXd gram = dictionary.atoms.transpose() * dictionary.atoms;
    const double l = largest_gram_eigenvalue(gram);
    if (!(l > 0.0) || !std::isfinite(l))
        throw DegenerateDictionaryError("lipschitz_step: dictionary has no positive spectrum");
    return 1.0 / l;
}

double energy(const Dictionary& dictionary, const Eigen::VectorXd& x, const SparseCode& code,
              double lambda) {
    check_atom_length(dictionary, x, "energy");
    if (code.coefficients.size() != dictionary.atoms.cols()) {
        throw DimensionMismatchError("energy: code length " +
                                     std::to_string(code.coefficients.size()) + " != n_atoms " +
                                     std::to_string(dictionary.atoms.cols()));
    }
    return (x - dictionary.atoms * code.coefficients).norm() +
           lambda * code.coefficients.lpNorm<1>();
}

double ista_objective(const Dictionary& dictionary, const Eigen::VectorXd& x,
                      const Eigen::VectorXd& coefficients, double lambda) {
    check_atom_length(dictionary, x, "ista_objective");
    if (coefficients.size() != dictionary.atoms.cols()) {
        throw DimensionMismatchError("ista_objective: code length " +
                                     std::to_string(coefficients.size()) + " != n_atoms " +
                                     std::to_string(dictionary.atoms.cols()));
    }
    return 0.5 * (x - dictionary.atoms * coefficients).squaredNorm() +
           lambda * coefficients.lpNorm<1>();
}

SparseCode ista_encode(const Dictionary& dictionary, const Eigen::VectorXd& x,
                       const SparseConfig& cfg, std::vector<double>* objective_trace) {
    check_atom_length(dictionary, x, "ista_encode");
    if (cfg.lambda < 0.0) throw InvalidConfigError("ista_encode: lambda must be >= 0");
    if (cfg.max_iter < 1) throw InvalidConfigError("ista_encode: max_iter must be >= 1");
    if (!(cfg.tol > 0.0)) throw InvalidConfigError("ista_encode: tol must be > 0");

    const double eta = cfg.fixed_step > 0.0 ? cfg.fixed_step : lipschitz_step(dictionary);
    const Eigen::Index n = dictionary.atoms.cols();

    SparseCode code;
    code.coefficients = Eigen::VectorXd::Zero(n);
    if (cfg.random_init) {
        RngStream stream = RngStream::derive(cfg.init_seed, StreamKind::ista_init);
        for (Eigen::Index i = 0; i < n; ++i) code.coefficients[i] = stream.uniform(-0.1, 0.1);
    }

    if (objective_trace)
        objective_trace->push_back(ista_objective(dictionary, x, code.coefficients, cfg.lambda));

    for (int iter = 0; iter < cfg.max_iter; ++iter) {
        const Eigen::VectorXd residual = x - dictionary.atoms * code.coefficients;
        const Eigen::VectorXd next = soft_threshold(
            code.coefficients + eta * (dictionary.atoms.transpose() * residual),
            eta * cfg.lambda);
        const double change = (next - code.coefficients).lpNorm<Eigen::Infinity>();
        code.coefficients = next;
        code.iterations_used = iter + 1;
        if (objective_trace)
            objective_trace->push_back(
                ista_objective(dictionary, x, code.coefficients, cfg.lambda));
        if (change < cfg.tol) {
            code.converged = true;
            break;
        }
    }
    return code;
}

double reconstruction_loss(const Dictionary& dictionary, const Eigen::VectorXd& y,
                           const SparseConfig& cfg) {
    const SparseCode code = ista_encode(dictionary, y, cfg);
    return (y - dictionary.atoms * code.coefficients).norm();
}

DictionaryLearnResult learn_dictionary(const std::vector<Eigen::VectorXd>& windows, int n_atoms,
                                       const SparseConfig& cfg, int outer_iters,
                                       std::uint64_t seed, int threads) {
    if (windows.empty()) throw EmptyTrainingSetError("learn_dictionary: no training windows");
    if (n_atoms < 1) throw InvalidConfigError("learn_dictionary: n_atoms must be >= 1");
    if (outer_iters < 1) throw InvalidConfigError("learn_dictionary: outer_iters must be >= 1");
    const Eigen::Index atom_len = windows.front().size();
    for (const auto& w : windows) {
        if (w.size() != atom_len)
            throw DimensionMismatchError("learn_dictionary: windows have unequal lengths");
    }
    if (windows.size() < static_cast<std::size_t>(n_atoms)) {
        std::cerr << "learn_dictionary: only " << windows.size() << " windows for " << n_atoms
                  << " atoms; dictionary may be underdetermined\n";
    }

    // Initial atoms: seeded sample of training windows, unit-normalized.
    RngStream stream = RngStream::derive(seed, StreamKind::dictionary);
    std::vector<std::size_t> order(windows.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    stream.shuffle(order);

    Dictionary dict;
    dict.atoms.resize(atom_len, n_atoms);
    for (int j = 0; j < n_atoms; ++j) {
        const auto& w = windows[order[static_cast<std::size_t>(j) % order.size()]];
        const double norm = w.norm();
        if (norm > 1e-12) {
            dict.atoms.col(j) = w / norm;
        } else {
            dict.atoms.col(j) = Eigen::VectorXd::Unit(atom_len, j % atom_len);
        }
    }

    const auto window_count = windows.size();
    Eigen::MatrixXd codes(n_atoms, static_cast<Eigen::Index>(window_count));
    std::vector<double> losses(window_count, 0.0);

    DictionaryLearnResult result;
    for (int outer = 0; outer < outer_iters; ++outer) {
        // (1) sparse inference per window against the current dictionary
        parallel_for(window_count, threads, [&](std::size_t i) {
            const SparseCode code = ista_encode(dict, windows[i], cfg);
            codes.col(static_cast<Eigen::Index>(i)) = code.coefficients;
            losses[i] = energy(dict, windows[i], code, cfg.lambda);
        });
        double mean_energy = 0.0;
        for (double l : losses) mean_energy += l;
        result.mean_energy_history.push_back(mean_energy / static_cast<double>(window_count));

        // (2) one gradient step on the summed reconstruction residual
        Eigen::MatrixXd residuals(atom_len, static_cast<Eigen::Index>(window_count));
        for (std::size_t i = 0; i < window_count; ++i) {
            const auto col = static_cast<Eigen::Index>(i);
            residuals.col(col) = windows[i] - dict.atoms * codes.col(col);
        }
        const Eigen::MatrixXd code_gram = codes * codes.transpose();
        const double gram_top = largest_gram_eigenvalue(code_gram);
        const double step = 1.0 / (gram_top + 1e-6);
        dict.atoms += step * (residuals * codes.transpose());

        // renormalize; a dead atom is reseeded from the worst-fit window
        for (int j = 0; j < n_atoms; ++j) {
            double norm = dict.atoms.col(j).norm();
            if (norm < 1e-12) {
                std::size_t worst = 0;
                for (std::size_t i = 1; i < window_count; ++i) {
                    if (residuals.col(static_cast<Eigen::Index>(i)).norm() >
                        residuals.col(static_cast<Eigen::Index>(worst)).norm())
                        worst = i;
                }
                dict.atoms.col(j) = windows[worst];
                norm = dict.atoms.col(j).norm();
                if (norm < 1e-12) {
                    dict.atoms.col(j) = Eigen::VectorXd::Unit(atom_len, j % atom_len);
                    norm = 1.0;
                }
            }
            dict.atoms.col(j) /= norm;
        }
    }
    result.dictionary = std::move(dict);
    return result;
}

std::string dictionary_checksum(const Dictionary& dictionary) {
    return checksum_hex(std::span<const double>(dictionary.atoms.data(),
                                                static_cast<std::size_t>(dictionary.atoms.size())));
}

void save_dictionary(const Dictionary& dictionary, const std::filesystem::path& path,
                     double lambda, std::uint64_t seed) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("save_dictionary: cannot write " + path.string());
    out.write(reinterpret_cast<const char*>(dictionary.atoms.data()),
              static_cast<std::streamsize>(sizeof(double) *
                                           static_cast<std::size_t>(dictionary.atoms.size())));
    if (!out) throw IoError("save_dictionary: short write to " + path.string());
    out.close();

    nlohmann::json sidecar{
        {"schema_version", 1},
        {"atom_len", dictionary.atom_len()},
        {"n_atoms", dictionary.n_atoms()},
        {"lambda", lambda},
        {"seed", seed},
        {"checksum", dictionary_checksum(dictionary)},
    };
    std::ofstream meta(path.string() + ".json");
    if (!meta) throw IoError("save_dictionary: cannot write sidecar for " + path.string());
    meta << sidecar.dump(2) << "\n";
}

Dictionary load_dictionary(const std::filesystem::path& path) {
    std::ifstream meta(path.string() + ".json");
    if (!meta) throw FileNotFoundError("load_dictionary: missing sidecar " + path.string() + ".json");
    nlohmann::json sidecar;
    try {
        meta >> sidecar;
    } catch (const nlohmann::json::exception& e) {
        throw ParseError("load_dictionary: bad sidecar: " + std::string(e.what()));
    }
    const int atom_len = sidecar.at("atom_len").get<int>();
    const int n_atoms = sidecar.at("n_atoms").get<int>();
    if (atom_len < 1 || n_atoms < 1)
        throw ParseError("load_dictionary: invalid dimensions in sidecar");

    std::ifstream in(path, std::ios::binary);
    if (!in) throw FileNotFoundError("load_dictionary: cannot open " + path.string());
    Dictionary dict;
    dict.atoms.resize(atom_len, n_atoms);
    in.read(reinterpret_cast<char*>(dict.atoms.data()),
            static_cast<std::streamsize>(sizeof(double) * static_cast<std::size_t>(atom_len) *
                                         static_cast<std::size_t>(n_atoms)));
    if (in.gcount() != static_cast<std::streamsize>(sizeof(double) *
                                                    static_cast<std::size_t>(atom_len) *
                                                    static_cast<std::size_t>(n_atoms))) {
        throw ParseError("load_dictionary: " + path.string() + " shorter than sidecar dimensions");
    }
    const std::string expect = sidecar.at("checksum").get<std::string>();
    if (dictionary_checksum(dict) != expect)
        throw ParseError("load_dictionary: checksum mismatch for " + path.string());
    return dict;
}

} // namespace evosts
