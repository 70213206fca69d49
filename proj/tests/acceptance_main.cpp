// Acceptance gate: ten end-to-end checks, one PASS/FAIL line each.
// Usage: acceptance <path-to-cli-binary>

#include "evosts/checksum.hpp"
#include "evosts/config.hpp"
#include "evosts/errors.hpp"
#include "evosts/eval_report.hpp"
#include "evosts/evolution.hpp"
#include "evosts/lstm.hpp"
#include "evosts/rng.hpp"
#include "evosts/signal_io.hpp"
#include "evosts/sparse_coding.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <sstream>
#include <string>
#include <sys/wait.h>
#include <vector>

using namespace evosts;

namespace {

std::string g_cli;
std::filesystem::path g_dir;
int g_failures = 0;

double seconds_since(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

void report(int criterion, const std::string& name, bool pass, const std::string& detail) {
    std::cout << (pass ? "PASS" : "FAIL") << ": criterion " << criterion << " (" << name << ") "
              << detail << "\n";
    if (!pass) ++g_failures;
}

int run_cli(const std::string& args, std::string* output = nullptr) {
    const std::string cmd = g_cli + " " + args + " 2>&1";
    FILE* pipe = popen(cmd.c_str(), "r");
    if (!pipe) return -1;
    std::string out;
    char buf[512];
    while (fgets(buf, sizeof(buf), pipe) != nullptr) out += buf;
    const int status = pclose(pipe);
    if (output) *output = out;
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

bool files_identical(const std::filesystem::path& a, const std::filesystem::path& b) {
    const std::string ba = read_file(a);
    return !ba.empty() && ba == read_file(b);
}

Dictionary random_unit_dictionary(int atom_len, int n_atoms, std::uint64_t seed) {
    RngStream stream(seed);
    Dictionary dict;
    dict.atoms.resize(atom_len, n_atoms);
    for (int c = 0; c < n_atoms; ++c) {
        for (int r = 0; r < atom_len; ++r) dict.atoms(r, c) = stream.normal(0.0, 1.0);
        dict.atoms.col(c).normalize();
    }
    return dict;
}

Eigen::VectorXd random_vector(int n, RngStream& stream, double stddev = 1.0) {
    Eigen::VectorXd v(n);
    for (int i = 0; i < n; ++i) v[i] = stream.normal(0.0, stddev);
    return v;
}

// --- criterion 1: exact parameter counts of the reference architecture ----

void criterion_parameter_counts() {
    const ParameterCount pc = count_parameters({6400, 100, 128});
    const bool pass = pc.lstm_count == 2600400 && pc.dense_count == 12928 && pc.total == 2613328;
    std::ostringstream detail;
    detail << "lstm=" << pc.lstm_count << " dense=" << pc.dense_count << " total=" << pc.total;
    report(1, "parameter counts", pass, detail.str());
}

// --- criterion 2: per-step descent of the encoding objective --------------

void criterion_objective_descent() {
    const auto start = std::chrono::steady_clock::now();
    const double lambdas[3] = {0.01, 0.1, 1.0};
    int checked_steps = 0;
    double worst_rise = 0.0;

    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        const Dictionary dict = random_unit_dictionary(32, 64, seed);
        RngStream stream(1000 + seed);
        const Eigen::VectorXd x = random_vector(32, stream);

        SparseConfig cfg;
        cfg.lambda = lambdas[seed % 3];
        std::vector<double> trace;
        ista_encode(dict, x, cfg, &trace);
        for (std::size_t i = 1; i < trace.size(); ++i) {
            worst_rise = std::max(worst_rise, trace[i] - trace[i - 1]);
            ++checked_steps;
        }
    }
    const double elapsed = seconds_since(start);
    const bool pass = worst_rise <= 1e-10 && elapsed < 10.0;
    std::ostringstream detail;
    detail << "worst step rise " << worst_rise << " over " << checked_steps << " steps, "
           << elapsed << " s";
    report(2, "encoding objective descent", pass, detail.str());
}

// --- criterion 3: brute-force oracle on tiny encoding problems ------------

double grid_minimum(const Dictionary& dict, const Eigen::VectorXd& x, double lambda) {
    constexpr int kPoints = 401; // [-2, 2] step 0.01
    constexpr double kLo = -2.0, kStep = 0.01;
    const int m = dict.atom_len();
    const int k = dict.n_atoms();

    double c0[3] = {0, 0, 0}, c1[3] = {0, 0, 0}, c2[3] = {0, 0, 0}, xx[3] = {0, 0, 0};
    for (int j = 0; j < m; ++j) {
        xx[j] = x[j];
        c0[j] = dict.atoms(j, 0);
        if (k > 1) c1[j] = dict.atoms(j, 1);
        if (k > 2) c2[j] = dict.atoms(j, 2);
    }

    double best = std::numeric_limits<double>::infinity();
    for (int i0 = 0; i0 < kPoints; ++i0) {
        const double a0 = kLo + kStep * i0;
        double r0[3];
        for (int j = 0; j < 3; ++j) r0[j] = xx[j] - a0 * c0[j];
        const double l0 = std::abs(a0);
        if (k == 1) {
            const double obj = 0.5 * (r0[0] * r0[0] + r0[1] * r0[1] + r0[2] * r0[2]) + lambda * l0;
            best = std::min(best, obj);
            continue;
        }
        for (int i1 = 0; i1 < kPoints; ++i1) {
            const double a1 = kLo + kStep * i1;
            double r1[3];
            for (int j = 0; j < 3; ++j) r1[j] = r0[j] - a1 * c1[j];
            const double l1 = l0 + std::abs(a1);
            if (k == 2) {
                const double obj =
                    0.5 * (r1[0] * r1[0] + r1[1] * r1[1] + r1[2] * r1[2]) + lambda * l1;
                best = std::min(best, obj);
                continue;
            }
            for (int i2 = 0; i2 < kPoints; ++i2) {
                const double a2 = kLo + kStep * i2;
                const double d0 = r1[0] - a2 * c2[0];
                const double d1 = r1[1] - a2 * c2[1];
                const double d2 = r1[2] - a2 * c2[2];
                const double obj =
                    0.5 * (d0 * d0 + d1 * d1 + d2 * d2) + lambda * (l1 + std::abs(a2));
                best = std::min(best, obj);
            }
        }
    }
    return best;
}

void criterion_oracle_equivalence() {
    const auto start = std::chrono::steady_clock::now();
    const double lambdas[3] = {0.01, 0.1, 1.0};
    double worst_gap = -std::numeric_limits<double>::infinity();

    for (int i = 0; i < 50; ++i) {
        const int n_atoms = 1 + (i % 3);
        const int atom_len = 1 + ((i / 3) % 3);
        const double lambda = lambdas[i % 3];
        const Dictionary dict =
            random_unit_dictionary(atom_len, n_atoms, 2000 + static_cast<std::uint64_t>(i));
        RngStream stream(3000 + static_cast<std::uint64_t>(i));
        const Eigen::VectorXd x = random_vector(atom_len, stream, 0.8);

        SparseConfig cfg;
        cfg.lambda = lambda;
        cfg.max_iter = 1000;
        cfg.tol = 1e-9;
        const SparseCode code = ista_encode(dict, x, cfg);
        const double ista_final = ista_objective(dict, x, code.coefficients, lambda);
        const double oracle = grid_minimum(dict, x, lambda);
        worst_gap = std::max(worst_gap, ista_final - oracle);
    }
    const double elapsed = seconds_since(start);
    const bool pass = worst_gap <= 0.02 && elapsed < 60.0;
    std::ostringstream detail;
    detail << "worst (final - grid minimum) = " << worst_gap << " over 50 instances, " << elapsed
           << " s";
    report(3, "encoding oracle equivalence", pass, detail.str());
}

// --- criterion 4: analytic gradients vs central finite differences --------

void criterion_gradient_check() {
    const auto start = std::chrono::steady_clock::now();
    const LstmDims dims{8, 4, 3};
    const double h = 1e-5;
    double worst = 0.0;

    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        LstmWeights w = init_weights(dims, seed);
        RngStream stream(4000 + seed);
        const Eigen::VectorXd x = random_vector(8, stream);
        const Eigen::VectorXd target = random_vector(3, stream);

        ForwardCache cache;
        forward(w, x, &cache);
        const LstmGradients grads = backward(w, x, target, cache);

        LstmGradients numeric = grads;
        visit_blocks(
            [&](auto& num_block, auto& block) {
                for (Eigen::Index r = 0; r < block.rows(); ++r) {
                    for (Eigen::Index c = 0; c < block.cols(); ++c) {
                        const double saved = block(r, c);
                        block(r, c) = saved + h;
                        const double up = mse_loss(forward(w, x), target);
                        block(r, c) = saved - h;
                        const double down = mse_loss(forward(w, x), target);
                        block(r, c) = saved;
                        num_block(r, c) = (up - down) / (2.0 * h);
                    }
                }
            },
            numeric, w);
        visit_blocks(
            [&](const auto& analytic, const auto& fd) {
                for (Eigen::Index r = 0; r < analytic.rows(); ++r) {
                    for (Eigen::Index c = 0; c < analytic.cols(); ++c) {
                        const double a = analytic(r, c);
                        const double n = fd(r, c);
                        worst = std::max(worst, std::abs(a - n) / (std::abs(a) + std::abs(n) + 1e-8));
                    }
                }
            },
            grads, numeric);
    }
    const double elapsed = seconds_since(start);
    const bool pass = worst < 1e-4 && elapsed < 30.0;
    std::ostringstream detail;
    detail << "max relative error " << worst << " over 20 networks, " << elapsed << " s";
    report(4, "gradient check", pass, detail.str());
}

// --- criterion 5: selection invariants and exact lineage ------------------

Dataset desk_windows(std::int64_t length, const RunConfig& desk) {
    Signal signal = generate_synthetic(
        length, {SineComponent{desk.synth_amplitude, desk.synth_frequency_hz, desk.synth_phase}},
        desk.synth_noise_std, desk.synth_seed);
    return make_windows(normalize(signal).first, desk.feature_len, desk.target_len,
                        desk.target_len);
}

void criterion_selection_invariants() {
    const RunConfig desk = apply_preset(RunConfig{}, "desk");
    const Dataset data = desk_windows(6000, desk);
    bool pass = true;
    std::ostringstream detail;

    for (std::uint64_t seed : {1ull, 2ull}) {
        EvoConfig cfg = to_evo_config(desk);
        cfg.master_seed = seed;
        const EvoRun run = evosts::evosts(data, cfg, 1);

        if (run.generations.size() != 3) {
            pass = false;
            detail << "seed " << seed << ": ran " << run.generations.size() << " generations; ";
            continue;
        }
        for (const GenerationResult& gen : run.generations) {
            if (gen.children.size() != 4) pass = false;
            double min_score = gen.children[0].score;
            int first_argmin = 0;
            for (std::size_t i = 1; i < gen.children.size(); ++i) {
                if (gen.children[i].score < min_score) {
                    min_score = gen.children[i].score;
                    first_argmin = static_cast<int>(i);
                }
            }
            const double best = gen.children[static_cast<std::size_t>(gen.best_index)].score;
            if (best != min_score || gen.best_index != first_argmin) {
                pass = false;
                detail << "seed " << seed << " generation " << gen.generation_index
                       << ": selection mismatch; ";
            }
        }

        // Exact lineage: every generation must replay bit-identically from the
        // previous winner and the partition's reproduced dictionary.
        const auto partitions = partition_generations(data, 3);
        LstmWeights parent = init_weights(
            {data.feature_len, cfg.hidden_dim, data.target_len}, cfg.master_seed);
        for (int g = 0; g < 3; ++g) {
            const int stride = std::max(1, data.target_len / 2);
            const auto windows =
                sliding_subwindows(partitions[static_cast<std::size_t>(g)], data.target_len, stride);
            const auto learned = learn_dictionary(
                windows, 2 * data.target_len, cfg.sparse, cfg.dict_iters,
                RngStream::derive_seed(cfg.master_seed, StreamKind::dictionary,
                                       {static_cast<std::uint64_t>(g)}),
                1);
            const GenerationResult replay = run_generation(
                parent, partitions[static_cast<std::size_t>(g)], learned.dictionary, cfg, g, 1);
            const GenerationResult& recorded = run.generations[static_cast<std::size_t>(g)];
            bool same = replay.best_index == recorded.best_index &&
                        replay.dictionary_checksum == recorded.dictionary_checksum &&
                        replay.children.size() == recorded.children.size();
            if (same) {
                for (std::size_t i = 0; i < replay.children.size(); ++i) {
                    same = same && replay.children[i].score == recorded.children[i].score &&
                           weights_equal(replay.children[i].weights, recorded.children[i].weights);
                }
            }
            if (!same) {
                pass = false;
                detail << "seed " << seed << " generation " << g << ": lineage replay differs; ";
            }
            parent = recorded.children[static_cast<std::size_t>(recorded.best_index)].weights;
        }
        if (!weights_equal(parent, run.final_generation_best)) {
            pass = false;
            detail << "seed " << seed << ": final winner not on the recorded lineage; ";
        }
    }
    if (pass) detail << "2 seeded runs, l=3 k=4, lineage replayed bit-exactly";
    report(5, "selection invariants", pass, detail.str());
}

// --- criterion 6: thread-count independence of evolve ---------------------

void criterion_scheduling_independence() {
    const auto signal = g_dir / "sched_signal.csv";
    const auto dir1 = g_dir / "sched_t1";
    const auto dir4 = g_dir / "sched_t4";
    std::filesystem::remove_all(dir1);
    std::filesystem::remove_all(dir4);

    std::string log;
    bool pass = run_cli("synth --synth-length 4000 --out-path " + signal.string(), &log) == 0;
    const std::string flags =
        " --feature-len 64 --target-len 16 --hidden-dim 8 --generations 3 --children 4"
        " --epochs-per-generation 3 --dict-iters 10 --sparse-max-iter 100 --master-seed 5"
        " --signal-path " + signal.string();
    pass = pass && run_cli("evolve --threads 1" + flags + " --out-path " + dir1.string(), &log) == 0;
    pass = pass && run_cli("evolve --threads 4" + flags + " --out-path " + dir4.string(), &log) == 0;

    std::string bad;
    for (const char* name : {"run_manifest.json", "first_best.bin", "first_best.bin.json",
                             "final_best.bin", "final_best.bin.json"}) {
        if (!files_identical(dir1 / name, dir4 / name)) {
            pass = false;
            bad += std::string(name) + " ";
        }
    }
    report(6, "scheduling independence", pass,
           pass ? "threads 1 vs 4: manifests and checkpoints byte-identical"
                : "differing artifacts: " + bad);
}

// --- criterion 7: end-to-end desk evaluation pipeline ---------------------

void criterion_end_to_end() {
    const auto start = std::chrono::steady_clock::now();
    const auto signal = g_dir / "desk_signal.csv";
    const auto out = g_dir / "desk_report.csv";

    std::string log;
    bool pass =
        run_cli("synth --synth-length 20000 --synth-noise-std 0.05 --synth-frequency-hz 5"
                " --out-path " + signal.string(), &log) == 0;
    const int rc = run_cli("evaluate --preset desk --k-folds 10 --signal-path " + signal.string() +
                               " --out-path " + out.string(), &log);
    pass = pass && rc == 0;

    std::vector<std::string> lines;
    {
        std::ifstream in(out);
        for (std::string line; std::getline(in, line);) lines.push_back(line);
    }
    pass = pass && lines.size() == 12 &&
           lines[0] == "partition,r2_random,r2_optimized,rmse_random,rmse_optimized" &&
           lines[11].rfind("mean,", 0) == 0;
    if (pass) {
        for (std::size_t i = 1; i <= 10; ++i) {
            const std::string prefix = std::to_string(i) + ",";
            if (lines[i].rfind(prefix, 0) != 0) pass = false;
            std::size_t commas = 0;
            for (char c : lines[i])
                if (c == ',') ++commas;
            if (commas != 4) pass = false;
        }
    }
    const double elapsed = seconds_since(start);
    pass = pass && elapsed < 300.0;
    std::ostringstream detail;
    detail << "exit " << rc << ", " << lines.size() << " report lines, " << elapsed << " s";
    report(7, "end-to-end desk pipeline", pass, detail.str());
}

// --- criterion 8: metric oracles -------------------------------------------

void criterion_metric_oracles() {
    bool pass = true;
    std::ostringstream detail;
    const auto vecs = [](std::initializer_list<std::initializer_list<double>> rows) {
        std::vector<Eigen::VectorXd> out;
        for (const auto& row : rows) {
            Eigen::VectorXd v(static_cast<Eigen::Index>(row.size()));
            Eigen::Index i = 0;
            for (double x : row) v[i++] = x;
            out.push_back(v);
        }
        return out;
    };

    // hand fixtures, incl. a negative-R-squared one
    pass = pass && std::abs(rmse(vecs({{0, 0}}), vecs({{3, 4}})) - std::sqrt(12.5)) <= 1e-12;
    pass = pass && std::abs(rmse(vecs({{1}}), vecs({{4}})) - 3.0) <= 1e-12;
    pass = pass && std::abs(r2(vecs({{2}, {2}}), vecs({{1}, {3}}))) <= 1e-12;
    pass = pass && std::abs(r2(vecs({{3}, {3}}), vecs({{0}, {2}})) - (-4.0)) <= 1e-12;
    pass = pass && std::abs(r2(vecs({{1, 2}, {3, 4}}), vecs({{1, 2}, {3, 4}})) - 1.0) <= 1e-12;
    if (!pass) detail << "hand fixture mismatch; ";

    RngStream stream(5000);
    double worst_rmse = 0.0, worst_r2 = 0.0;
    for (int i = 0; i < 1000; ++i) {
        std::vector<Eigen::VectorXd> x{random_vector(8, stream, 2.0)};
        worst_rmse = std::max(worst_rmse, std::abs(rmse(x, x)));
        worst_r2 = std::max(worst_r2, std::abs(r2(x, x) - 1.0));
    }
    pass = pass && worst_rmse <= 1e-12 && worst_r2 <= 1e-12;
    detail << "identity deviations rmse " << worst_rmse << ", r2 " << worst_r2
           << " over 1000 vectors";
    report(8, "metric oracles", pass, detail.str());
}

// --- criterion 9: byte-identical reruns of every command ------------------

void criterion_determinism() {
    bool pass = true;
    std::string bad;
    const auto check = [&](const std::string& what, bool ok) {
        if (!ok) {
            pass = false;
            bad += what + " ";
        }
    };
    std::string log;

    const auto sig_a = g_dir / "det_sig_a.csv";
    const auto sig_b = g_dir / "det_sig_b.csv";
    check("synth-run", run_cli("synth --synth-length 2000 --out-path " + sig_a.string(), &log) == 0);
    check("synth-run", run_cli("synth --synth-length 2000 --out-path " + sig_b.string(), &log) == 0);
    check("synth", files_identical(sig_a, sig_b));

    const std::string dict_flags = " --feature-len 32 --target-len 8 --dict-atoms 16"
                                   " --dict-iters 5 --signal-path " + sig_a.string();
    const auto dict_a = g_dir / "det_dict_a.bin";
    const auto dict_b = g_dir / "det_dict_b.bin";
    check("learn-dict-run",
          run_cli("learn-dict" + dict_flags + " --out-path " + dict_a.string(), &log) == 0);
    check("learn-dict-run",
          run_cli("learn-dict" + dict_flags + " --out-path " + dict_b.string(), &log) == 0);
    check("learn-dict", files_identical(dict_a, dict_b));
    check("learn-dict-meta",
          files_identical(dict_a.string() + ".json", dict_b.string() + ".json"));

    const std::string evo_flags = " --feature-len 32 --target-len 8 --hidden-dim 4"
                                  " --generations 2 --children 2 --epochs-per-generation 2"
                                  " --dict-iters 5 --signal-path " + sig_a.string();
    const auto evo_a = g_dir / "det_run_a";
    const auto evo_b = g_dir / "det_run_b";
    check("evolve-run", run_cli("evolve" + evo_flags + " --out-path " + evo_a.string(), &log) == 0);
    check("evolve-run", run_cli("evolve" + evo_flags + " --out-path " + evo_b.string(), &log) == 0);
    for (const char* name : {"run_manifest.json", "first_best.bin", "final_best.bin"})
        check(std::string("evolve/") + name, files_identical(evo_a / name, evo_b / name));

    const std::string eval_flags = evo_flags + " --k-folds 3";
    const auto rep_a = g_dir / "det_report_a.csv";
    const auto rep_b = g_dir / "det_report_b.csv";
    check("evaluate-run",
          run_cli("evaluate" + eval_flags + " --out-path " + rep_a.string(), &log) == 0);
    check("evaluate-run",
          run_cli("evaluate" + eval_flags + " --out-path " + rep_b.string(), &log) == 0);
    check("evaluate", files_identical(rep_a, rep_b));
    check("evaluate-meta", files_identical(rep_a.string() + ".json", rep_b.string() + ".json"));

    const std::string plot_flags = " --feature-len 32 --target-len 8 --signal-path " +
                                   sig_a.string() + " --checkpoint " +
                                   (evo_a / "final_best.bin").string() + " --count 256";
    const auto svg_a = g_dir / "det_plot_a.svg";
    const auto svg_b = g_dir / "det_plot_b.svg";
    check("plot-run", run_cli("plot" + plot_flags + " --out-path " + svg_a.string(), &log) == 0);
    check("plot-run", run_cli("plot" + plot_flags + " --out-path " + svg_b.string(), &log) == 0);
    check("plot", files_identical(svg_a, svg_b));

    report(9, "determinism", pass,
           pass ? "synth, learn-dict, evolve, evaluate, plot rerun byte-identically"
                : "non-reproducible: " + bad);
}

// --- criterion 10: improvement trend over ten seeded runs -----------------

void criterion_improvement_trend() {
    const RunConfig desk = apply_preset(RunConfig{}, "desk");
    const Dataset data = desk_windows(20000, desk);

    int improved = 0;
    bool all_recorded = true;
    std::ostringstream rows;
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        EvoConfig cfg = to_evo_config(desk);
        cfg.master_seed = seed;
        const EvoRun run = evosts::evosts(data, cfg, 1);

        const GenerationResult& first = run.generations.front();
        const GenerationResult& last = run.generations.back();
        const double first_score = first.children[static_cast<std::size_t>(first.best_index)].score;
        const double final_score = last.children[static_cast<std::size_t>(last.best_index)].score;
        if (!std::isfinite(first_score) || !std::isfinite(final_score)) all_recorded = false;
        if (final_score <= first_score) ++improved;
        rows << " seed " << seed << ": " << first_score << " -> " << final_score << ";";
    }

    // Hard gate: finite recorded scores. The trend itself is reported.
    const bool pass = all_recorded;
    std::ostringstream detail;
    detail << "final <= first in " << improved << "/10 runs (trend target >= 6);" << rows.str();
    report(10, "improvement trend", pass, detail.str());
}

} // namespace

int main(int argc, char** argv) {
    if (argc < 2) {
        std::cerr << "usage: acceptance <path-to-cli-binary>\n";
        return 2;
    }
    g_cli = argv[1];
    g_dir = std::filesystem::temp_directory_path() / "evosts_acceptance";
    std::filesystem::create_directories(g_dir);

    criterion_parameter_counts();
    criterion_objective_descent();
    criterion_oracle_equivalence();
    criterion_gradient_check();
    criterion_selection_invariants();
    criterion_scheduling_independence();
    criterion_end_to_end();
    criterion_metric_oracles();
    criterion_determinism();
    criterion_improvement_trend();

    if (g_failures > 0) {
        std::cout << g_failures << " criterion(s) failed\n";
        return 1;
    }
    std::cout << "all 10 criteria passed\n";
    return 0;
}
