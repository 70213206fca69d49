#pragma once

#include <cstdint>
#include <cstring>
#include <span>
#include <string>
#include <vector>

namespace evosts {

/// FNV-1a 64-bit over raw bytes. Used to fingerprint dictionaries,
/// checkpoints and signals in manifests; not cryptographic.
inline std::uint64_t fnv1a64(const void* data, std::size_t size,
                             std::uint64_t hash = 0xCBF29CE484222325ull) {
    const auto* bytes = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < size; ++i) {
        hash ^= bytes[i];
        hash *= 0x100000001B3ull;
    }
    return hash;
}

inline std::uint64_t fnv1a64(std::span<const double> values) {
    return fnv1a64(values.data(), values.size() * sizeof(double));
}

inline std::string checksum_hex(std::uint64_t hash) {
    static const char* digits = "0123456789abcdef";
    std::string out(16, '0');
    for (int i = 15; i >= 0; --i) {
        out[static_cast<std::size_t>(i)] = digits[hash & 0xF];
        hash >>= 4;
    }
    return out;
}

inline std::string checksum_hex(std::span<const double> values) {
    return checksum_hex(fnv1a64(values));
}

} // namespace evosts
