#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace criticgate {

// Deterministic, platform-independent hashing. std::hash is not stable across
// implementations, and byte-identical reruns depend on these values.

inline std::uint64_t fnv1a(const std::string& s) {
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline std::uint64_t mix(std::uint64_t a, std::uint64_t b) {
    return splitmix64(a ^ splitmix64(b));
}

// Uniform in [0,1) from the top 53 bits.
inline double to_unit(std::uint64_t h) {
    return static_cast<double>(h >> 11) * (1.0 / 9007199254740992.0);
}

// Tiny seeded generator for fixture generation; all draws are reproducible
// byte-for-byte on any platform (no std::uniform_* distributions).
struct Rng {
    std::uint64_t state;

    explicit Rng(std::uint64_t seed) : state(splitmix64(seed ^ 0x5bf03635d6a54b4dULL)) {}

    std::uint64_t next() {
        state = splitmix64(state);
        return state;
    }

    // Uniform integer in [0, n). n must be positive.
    std::uint64_t below(std::uint64_t n) { return next() % n; }

    std::int64_t range(std::int64_t lo, std::int64_t hi) {  // inclusive bounds
        return lo + static_cast<std::int64_t>(below(static_cast<std::uint64_t>(hi - lo + 1)));
    }

    double unit() { return to_unit(next()); }

    template <typename T>
    const T& pick(const std::vector<T>& v) {
        return v[below(v.size())];
    }
};

}  // namespace criticgate
