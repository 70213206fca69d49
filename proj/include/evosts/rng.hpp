#pragma once

#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <numbers>
#include <random>
#include <vector>

namespace evosts {

namespace detail {

inline std::uint64_t splitmix64_next(std::uint64_t& state) {
    state += 0x9E3779B97F4A7C15ull;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

} // namespace detail

/// Salt values that keep independently derived streams disjoint.
/// Streams are keyed by (seed, salt, indices...), so e.g. the stream of
/// child i in generation g never collides with a dictionary-learning stream.
enum class StreamKind : std::uint64_t {
    weight_init = 1,
    child = 2,
    dictionary = 3,
    fold = 4,
    shuffle = 5,
    synth = 6,
    ista_init = 7,
};

/// Deterministic random stream with explicitly specified draw algorithms.
///
/// All distributions are implemented here rather than via <random>'s
/// distribution templates, whose output is not pinned by the standard.
/// Given the same key, a stream reproduces the same sequence on any
/// platform with IEEE doubles.
class RngStream {
public:
    explicit RngStream(std::uint64_t seed) : engine_(mix_key({seed})) {}

    /// Counter-based derivation: mixes (seed, salt, indices...) into one key.
    static RngStream derive(std::uint64_t seed, StreamKind kind,
                            std::initializer_list<std::uint64_t> indices = {}) {
        RngStream s(0);
        s.engine_.seed(derive_seed(seed, kind, indices));
        return s;
    }

    /// Derived sub-seed for APIs that take a plain seed instead of a stream.
    static std::uint64_t derive_seed(std::uint64_t seed, StreamKind kind,
                                     std::initializer_list<std::uint64_t> indices = {}) {
        std::vector<std::uint64_t> material{seed, static_cast<std::uint64_t>(kind)};
        material.insert(material.end(), indices.begin(), indices.end());
        return mix_key(material);
    }

    std::uint64_t next_u64() { return engine_(); }

    /// Uniform double in [0, 1) with 53 random bits.
    double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

    /// Gaussian draw via the Box-Muller transform; consumes exactly two values.
    double normal(double mean, double stddev) {
        double u1 = static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53; // (0, 1]
        double u2 = uniform01();
        double mag = std::sqrt(-2.0 * std::log(u1));
        return mean + stddev * mag * std::cos(2.0 * std::numbers::pi * u2);
    }

    /// Uniform integer in [0, n) without modulo bias (rejection sampling).
    std::uint64_t uniform_below(std::uint64_t n) {
        if (n == 0) return 0;
        const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
        std::uint64_t v = next_u64();
        while (v >= limit) v = next_u64();
        return v % n;
    }

    /// Fisher-Yates shuffle driven by this stream.
    template <typename T>
    void shuffle(std::vector<T>& items) {
        for (std::size_t i = items.size(); i > 1; --i) {
            std::size_t j = static_cast<std::size_t>(uniform_below(i));
            std::swap(items[i - 1], items[j]);
        }
    }

private:
    static std::uint64_t mix_key(const std::vector<std::uint64_t>& material) {
        std::uint64_t state = 0x6A09E667F3BCC908ull; // arbitrary fixed offset
        std::uint64_t key = 0;
        for (std::uint64_t m : material) {
            state ^= m;
            key = detail::splitmix64_next(state) ^ (key * 0x100000001B3ull);
        }
        return key;
    }

    static std::uint64_t mix_key(std::initializer_list<std::uint64_t> material) {
        return mix_key(std::vector<std::uint64_t>(material));
    }

    std::mt19937_64 engine_;
};

} // namespace evosts
