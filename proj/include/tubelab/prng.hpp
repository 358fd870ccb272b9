#pragma once

#include <cstdint>
#include <string_view>
#include <vector>

namespace tubelab {

// splitmix64: deterministic across platforms, no libstdc++ distribution
// dependence anywhere in the project.
struct Prng {
    uint64_t state;

    explicit Prng(uint64_t seed) : state(seed) {}

    uint64_t next() {
        uint64_t z = (state += 0x9e3779b97f4a7c15ull);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }

    // uniform in [0, n), rejection-free bias only below 2^-64 * n; exactness
    // recovered by rejection on the top band
    uint64_t below(uint64_t n) {
        if (n == 0) return 0;
        uint64_t limit = UINT64_MAX - UINT64_MAX % n;
        uint64_t v;
        do { v = next(); } while (v >= limit);
        return v % n;
    }

    double unit() { return (next() >> 11) * 0x1.0p-53; }

    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (size_t i = v.size(); i > 1; --i) {
            size_t j = (size_t)below(i);
            std::swap(v[i - 1], v[j]);
        }
    }

    // k distinct values from [0, n), sorted
    std::vector<uint64_t> sample_distinct(uint64_t n, uint64_t k);
};

// Deterministic seed derivation: child streams never collide with the parent.
inline uint64_t derive_seed(uint64_t master, uint64_t tag) {
    uint64_t z = master ^ (0x9e3779b97f4a7c15ull * (tag + 0x2545f4914f6cdd1dull));
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

inline uint64_t derive_seed(uint64_t master, uint64_t tag1, uint64_t tag2) {
    return derive_seed(derive_seed(master, tag1), tag2);
}

inline std::vector<uint64_t> Prng::sample_distinct(uint64_t n, uint64_t k) {
    std::vector<uint64_t> out;
    if (k >= n) {
        out.resize(n);
        for (uint64_t i = 0; i < n; ++i) out[i] = i;
        return out;
    }
    if (k > n / 2) {
        // sample the complement
        std::vector<bool> drop(n, false);
        uint64_t need = n - k;
        while (need) {
            uint64_t v = below(n);
            if (!drop[v]) { drop[v] = true; --need; }
        }
        out.reserve(k);
        for (uint64_t i = 0; i < n; ++i)
            if (!drop[i]) out.push_back(i);
        return out;
    }
    std::vector<bool> taken(n, false);
    out.reserve(k);
    while (out.size() < k) {
        uint64_t v = below(n);
        if (!taken[v]) { taken[v] = true; out.push_back(v); }
    }
    std::sort(out.begin(), out.end());
    return out;
}

}  // namespace tubelab
