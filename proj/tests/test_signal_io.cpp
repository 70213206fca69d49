#include "evosts/checksum.hpp"
#include "evosts/errors.hpp"
#include "evosts/signal_io.hpp"

#include <doctest.h>

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <numbers>

using namespace evosts;

namespace {

std::filesystem::path temp_file(const std::string& name) {
    return std::filesystem::temp_directory_path() / ("evosts_sio_" + name);
}

void write_file(const std::filesystem::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    out << content;
}

Signal make_signal(std::vector<double> samples) {
    Signal s;
    s.samples = std::move(samples);
    return s;
}

} // namespace

TEST_CASE("load_csv reads one sample per row") {
    const auto path = temp_file("plain.csv");
    write_file(path, "0.1\n0.2\n0.3\n");
    const Signal s = load_csv(path, 0);
    REQUIRE(s.size() == 3);
    CHECK(s.samples[0] == doctest::Approx(0.1).epsilon(1e-15));
    CHECK(s.samples[1] == doctest::Approx(0.2).epsilon(1e-15));
    CHECK(s.samples[2] == doctest::Approx(0.3).epsilon(1e-15));
}

TEST_CASE("load_csv skips a single header row") {
    const auto path = temp_file("header.csv");
    write_file(path, "mv\n1.0\n-1.0\n");
    const Signal s = load_csv(path, 0);
    REQUIRE(s.size() == 2);
    CHECK(s.samples[0] == 1.0);
    CHECK(s.samples[1] == -1.0);
}

TEST_CASE("load_csv selects the requested column") {
    const auto path = temp_file("cols.csv");
    write_file(path, "t,mv\n0,5.0\n1,6.0\n");
    const Signal s = load_csv(path, 1);
    REQUIRE(s.size() == 2);
    CHECK(s.samples[0] == 5.0);
    CHECK(s.samples[1] == 6.0);
}

TEST_CASE("load_csv error cases") {
    const auto empty = temp_file("empty.csv");
    write_file(empty, "");
    CHECK_THROWS_AS(load_csv(empty, 0), EmptySignalError);

    CHECK_THROWS_AS(load_csv(temp_file("missing_no_such.csv"), 0), FileNotFoundError);

    const auto bad = temp_file("bad.csv");
    write_file(bad, "1.0\nnot_a_number\n");
    CHECK_THROWS_WITH_AS(load_csv(bad, 0), doctest::Contains("row 2"), ParseError);

    const auto nan_file = temp_file("nan.csv");
    write_file(nan_file, "1.0\nnan\n");
    CHECK_THROWS_AS(load_csv(nan_file, 0), ParseError);

    const auto inf_file = temp_file("inf.csv");
    write_file(inf_file, "1.0\ninf\n");
    CHECK_THROWS_AS(load_csv(inf_file, 0), ParseError);
}

TEST_CASE("load_raw_i16 decodes little-endian codes at lsb scaling") {
    CHECK(kDefaultLsbMv == 0.0005); // 2 * 16.384 / 2^16

    const auto path = temp_file("codes.i16");
    // +32767, 0, -1 as little-endian int16
    write_file(path, std::string("\xff\x7f\x00\x00\xff\xff", 6));
    const Signal s = load_raw_i16(path);
    REQUIRE(s.size() == 3);
    CHECK(s.samples[0] == doctest::Approx(16.3835).epsilon(1e-12));
    CHECK(s.samples[1] == 0.0);
    CHECK(s.samples[2] == doctest::Approx(-0.0005).epsilon(1e-12));
}

TEST_CASE("load_raw_i16 rejects odd byte counts") {
    const auto path = temp_file("odd.i16");
    write_file(path, std::string("\x01\x02\x03", 3));
    CHECK_THROWS_AS(load_raw_i16(path), OddByteCountError);
    CHECK_THROWS_AS(load_raw_i16(temp_file("missing_no_such.i16")), FileNotFoundError);
}

TEST_CASE("generate_synthetic constant component") {
    const Signal s =
        generate_synthetic(4, {SineComponent{1.0, 0.0, std::numbers::pi / 2}}, 0.0, 0);
    REQUIRE(s.size() == 4);
    for (double v : s.samples) CHECK(v == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("generate_synthetic is deterministic per seed") {
    const std::vector<SineComponent> comps{{1.0, 5.0, 0.0}};
    const Signal a = generate_synthetic(200, comps, 0.3, 42);
    const Signal b = generate_synthetic(200, comps, 0.3, 42);
    CHECK(a.samples == b.samples);
    const Signal c = generate_synthetic(200, comps, 0.3, 43);
    CHECK(a.samples != c.samples);
}

TEST_CASE("generate_synthetic fixed-seed replay checksum") {
    const Signal s = generate_synthetic(1000, {SineComponent{1.0, 5.0, 0.0}}, 0.01, 7);
    CHECK(checksum_hex(fnv1a64(s.samples)) == "be65caf8fe5e0c59");
}

TEST_CASE("generate_synthetic rejects bad lengths") {
    CHECK_THROWS_AS(generate_synthetic(0, {}, 0.0, 0), InvalidLengthError);
    CHECK_THROWS_AS(generate_synthetic(-5, {}, 0.0, 0), InvalidLengthError);
}

TEST_CASE("normalize z-scores with population std") {
    const auto [out, stats] = normalize(make_signal({1.0, 3.0}));
    CHECK(stats.mean == 2.0);
    CHECK(stats.std_dev == 1.0);
    REQUIRE(out.size() == 2);
    CHECK(out.samples[0] == -1.0);
    CHECK(out.samples[1] == 1.0);
}

TEST_CASE("normalize rejects constant signals") {
    CHECK_THROWS_AS(normalize(make_signal({2.0, 2.0, 2.0})), ZeroVarianceError);
}

TEST_CASE("normalize is a fixed point on zero-mean unit-std input") {
    // Population std of {-1, 1, -1, 1} is exactly 1.
    const std::vector<double> input{-1.0, 1.0, -1.0, 1.0};
    const auto [out, stats] = normalize(make_signal(input));
    for (std::size_t i = 0; i < input.size(); ++i)
        CHECK(out.samples[i] == doctest::Approx(input[i]).epsilon(1e-12));
}

TEST_CASE("normalize round-trips through the stats") {
    const Signal original = generate_synthetic(300, {SineComponent{2.0, 3.0, 0.4}}, 0.1, 9);
    const auto [normed, stats] = normalize(original);
    for (std::size_t i = 0; i < original.size(); ++i) {
        const double back = stats.invert(normed.samples[i]);
        CHECK(back == doctest::Approx(original.samples[i]).epsilon(1e-9));
    }
}

TEST_CASE("make_windows enumerates strided origins") {
    Signal s = make_signal({0, 1, 2, 3, 4, 5, 6, 7, 8, 9});
    const Dataset d = make_windows(s, 4, 2, 2);
    REQUIRE(d.pairs.size() == 3);
    CHECK(d.pairs[0].origin_index == 0);
    CHECK(d.pairs[1].origin_index == 2);
    CHECK(d.pairs[2].origin_index == 4);

    // Window reconstruction: features ++ target == parent slice.
    for (const WindowPair& p : d.pairs) {
        for (int k = 0; k < 4; ++k)
            CHECK(p.features[k] == s.samples[static_cast<std::size_t>(p.origin_index + k)]);
        for (int k = 0; k < 2; ++k)
            CHECK(p.target[k] == s.samples[static_cast<std::size_t>(p.origin_index + 4 + k)]);
    }
}

TEST_CASE("make_windows boundary sizes") {
    CHECK(make_windows(make_signal(std::vector<double>(6, 1.0)), 4, 2, 1).pairs.size() == 1);
    CHECK_THROWS_AS(make_windows(make_signal(std::vector<double>(5, 1.0)), 4, 2, 1),
                    SignalTooShortError);
}

TEST_CASE("kfold_split forced fold sizes") {
    const Dataset d = make_windows(make_signal(std::vector<double>(10 + 2, 0.5)), 1, 1, 1);
    REQUIRE(d.pairs.size() == 11);

    SUBCASE("10 pairs over 10 folds: one each") {
        Dataset ten = d;
        ten.pairs.resize(10);
        const FoldAssignment folds = kfold_split(ten, 10, 3);
        std::vector<int> counts(10, 0);
        for (int f : folds.assignment) counts[static_cast<std::size_t>(f)]++;
        for (int c : counts) CHECK(c == 1);
    }

    SUBCASE("12 pairs over 10 folds: two folds of 2, eight of 1") {
        Dataset twelve = make_windows(make_signal(std::vector<double>(14, 0.5)), 1, 1, 1);
        REQUIRE(twelve.pairs.size() == 13);
        twelve.pairs.resize(12);
        const FoldAssignment folds = kfold_split(twelve, 10, 3);
        std::vector<int> counts(10, 0);
        for (int f : folds.assignment) counts[static_cast<std::size_t>(f)]++;
        int twos = 0, ones = 0;
        for (int c : counts) {
            if (c == 2) ++twos;
            if (c == 1) ++ones;
        }
        CHECK(twos == 2);
        CHECK(ones == 8);
    }
}

TEST_CASE("kfold_split determinism and validation") {
    const Dataset d = make_windows(make_signal(std::vector<double>(30, 0.5)), 2, 1, 1);
    const FoldAssignment a = kfold_split(d, 5, 11);
    const FoldAssignment b = kfold_split(d, 5, 11);
    CHECK(a.assignment == b.assignment);
    const FoldAssignment c = kfold_split(d, 5, 12);
    CHECK(a.assignment != c.assignment);

    CHECK_THROWS_AS(kfold_split(d, 1, 0), InvalidConfigError);
    Dataset two = d;
    two.pairs.resize(2);
    CHECK_THROWS_AS(kfold_split(two, 3, 0), TooFewPairsError);
}

TEST_CASE("kfold_split covers every index with balanced folds") {
    for (std::uint64_t seed : {0ull, 7ull, 99ull}) {
        const Dataset d = make_windows(make_signal(std::vector<double>(40, 0.5)), 2, 1, 1);
        const int k = 7;
        const FoldAssignment folds = kfold_split(d, k, seed);
        REQUIRE(folds.assignment.size() == d.pairs.size());
        std::vector<int> counts(static_cast<std::size_t>(k), 0);
        for (int f : folds.assignment) {
            REQUIRE(f >= 0);
            REQUIRE(f < k);
            counts[static_cast<std::size_t>(f)]++;
        }
        const auto [lo, hi] = std::minmax_element(counts.begin(), counts.end());
        CHECK(*hi - *lo <= 1);
    }
}

TEST_CASE("partition_generations splits contiguously with remainder first") {
    const Dataset d = make_windows(make_signal(std::vector<double>(11, 0.5)), 1, 1, 1);
    REQUIRE(d.pairs.size() == 10);

    const auto slices = partition_generations(d, 3);
    REQUIRE(slices.size() == 3);
    CHECK(slices[0].pairs.size() == 4);
    CHECK(slices[1].pairs.size() == 3);
    CHECK(slices[2].pairs.size() == 3);

    // Order-preserving, disjoint, exhaustive.
    std::vector<std::int64_t> origins;
    for (const auto& slice : slices)
        for (const auto& p : slice.pairs) origins.push_back(p.origin_index);
    REQUIRE(origins.size() == d.pairs.size());
    for (std::size_t i = 0; i < origins.size(); ++i) CHECK(origins[i] == d.pairs[i].origin_index);
}

TEST_CASE("partition_generations even split and degenerate input") {
    const Dataset nine = make_windows(make_signal(std::vector<double>(10, 0.5)), 1, 1, 1);
    REQUIRE(nine.pairs.size() == 9);
    const auto slices = partition_generations(nine, 3);
    for (const auto& s : slices) CHECK(s.pairs.size() == 3);

    Dataset two = nine;
    two.pairs.resize(2);
    CHECK_THROWS_AS(partition_generations(two, 3), TooFewPairsError);
}

TEST_CASE("covered_runs merges overlapping windows and splits gaps") {
    Signal s = make_signal({0, 1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11});
    Dataset d = make_windows(s, 2, 1, 1); // windows cover [origin, origin+3)

    SUBCASE("full overlap collapses to one run") {
        const auto runs = covered_runs(d);
        REQUIRE(runs.size() == 1);
        REQUIRE(runs[0].size() == 12);
        for (std::size_t i = 0; i < 12; ++i) CHECK(runs[0][i] == s.samples[i]);
    }

    SUBCASE("removing middle pairs leaves two disjoint runs") {
        Dataset gap = subset(d, {0, 1, 8, 9});
        const auto runs = covered_runs(gap);
        REQUIRE(runs.size() == 2);
        CHECK(runs[0] == std::vector<double>{0, 1, 2, 3});
        CHECK(runs[1] == std::vector<double>{8, 9, 10, 11});
    }
}

TEST_CASE("covered_stats matches stats over unique samples") {
    Signal s = make_signal({1, 3, 1, 3, 1, 3});
    Dataset d = make_windows(s, 2, 1, 1);
    const NormalizationStats st = covered_stats(d);
    CHECK(st.mean == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(st.std_dev == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("sliding_subwindows walks every covered run") {
    Signal s = make_signal({0, 1, 2, 3, 4, 5, 6, 7});
    Dataset d = make_windows(s, 3, 1, 1);
    const auto windows = sliding_subwindows(d, 4, 2);
    REQUIRE(windows.size() == 3); // origins 0, 2, 4 over one run of 8
    CHECK(windows[0][0] == 0.0);
    CHECK(windows[1][0] == 2.0);
    CHECK(windows[2][3] == 7.0);
}

TEST_CASE("apply_normalization transforms features and targets") {
    Signal s = make_signal({1, 3, 1, 3, 1, 3});
    Dataset d = make_windows(s, 2, 1, 1);
    const Dataset normed = apply_normalization(d, NormalizationStats{2.0, 1.0});
    for (std::size_t i = 0; i < d.pairs.size(); ++i) {
        for (int k = 0; k < 2; ++k)
            CHECK(normed.pairs[i].features[k] == d.pairs[i].features[k] - 2.0);
        CHECK(normed.pairs[i].target[0] == d.pairs[i].target[0] - 2.0);
    }
}
