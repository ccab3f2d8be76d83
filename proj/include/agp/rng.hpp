#pragma once
// Deterministic random primitives. std::shuffle and the std distributions are
// implementation-defined, so everything that must be byte-identical across
// reruns goes through these instead.

#include <cstdint>
#include <string_view>
#include <utility>
#include <vector>

namespace agp {

inline std::uint64_t fnv1a64(std::string_view s) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

struct SplitMix64 {
    std::uint64_t state;

    explicit SplitMix64(std::uint64_t seed) : state(seed) {}

    std::uint64_t next() {
        std::uint64_t z = (state += 0x9e3779b97f4a7c15ull);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }

    // Uniform in [0, n) via rejection sampling; n == 0 returns 0.
    std::uint64_t below(std::uint64_t n) {
        if (n == 0) return 0;
        const std::uint64_t limit = ~0ull - ~0ull % n;
        std::uint64_t v;
        do {
            v = next();
        } while (v >= limit);
        return v % n;
    }

    double unit() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }
};

// Independent substream for (seed, salt); used so epochs, users, etc. each get
// their own deterministic stream.
inline SplitMix64 substream(std::uint64_t seed, std::uint64_t salt) {
    return SplitMix64(seed ^ (salt * 0x9e3779b97f4a7c15ull + 0x632be59bd9b4e019ull));
}

template <typename T>
void deterministic_shuffle(std::vector<T>& v, SplitMix64& rng) {
    for (std::size_t i = v.size(); i > 1; --i) {
        std::size_t j = static_cast<std::size_t>(rng.below(i));
        std::swap(v[i - 1], v[j]);
    }
}

}  // namespace agp
