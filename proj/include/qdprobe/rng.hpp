#pragma once

#include <cmath>
#include <cstdint>
#include <string_view>

namespace qdprobe {

// splitmix64: tiny, fast, and fully specified, so streams are reproducible
// independent of the standard library implementation.
inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// FNV-1a over a tag string, used to derive independent named substreams
// from one wafer seed.
inline std::uint64_t hash_tag(std::string_view tag) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : tag) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

inline std::uint64_t mix_key(std::uint64_t seed, std::string_view tag,
                             std::int64_t a = 0, std::int64_t b = 0, std::int64_t c = 0) {
    std::uint64_t s = seed ^ hash_tag(tag);
    s = splitmix64(s);
    s ^= static_cast<std::uint64_t>(a) * 0x9e3779b97f4a7c15ULL;
    s = splitmix64(s);
    s ^= static_cast<std::uint64_t>(b) * 0xc2b2ae3d27d4eb4fULL;
    s = splitmix64(s);
    s ^= static_cast<std::uint64_t>(c) * 0x165667b19e3779f9ULL;
    return splitmix64(s);
}

// Deterministic random stream. Draw order is part of the artifact contract:
// identical seeds reproduce identical wafers byte for byte.
class Stream {
public:
    explicit Stream(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() { return splitmix64(state_); }

    // uniform in [0, 1)
    double next_double() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    // uniform in (0, 1]
    double next_double_open() {
        return (static_cast<double>(next_u64() >> 11) + 1.0) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) { return lo + (hi - lo) * next_double(); }

    // Box-Muller; two uniforms per call, no cached spare, so the draw count
    // per site is fixed.
    double normal(double mean = 0.0, double sigma = 1.0) {
        double u1 = next_double_open();
        double u2 = next_double();
        double r = std::sqrt(-2.0 * std::log(u1));
        return mean + sigma * r * std::cos(6.283185307179586 * u2);
    }

    bool bernoulli(double p) { return next_double() < p; }

    int uniform_int(int n) {  // 0..n-1
        return static_cast<int>(next_u64() % static_cast<std::uint64_t>(n));
    }

private:
    std::uint64_t state_;
};

// FNV-1a 64 over arbitrary bytes; used for artifact checksums and the
// config provenance hash.
inline std::uint64_t fnv1a64(const void* data, std::size_t n,
                             std::uint64_t h = 0xcbf29ce484222325ULL) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < n; ++i) {
        h ^= p[i];
        h *= 0x100000001b3ULL;
    }
    return h;
}

}  // namespace qdprobe
