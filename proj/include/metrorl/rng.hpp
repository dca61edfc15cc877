#pragma once

#include <cstdint>
#include <random>
#include <string_view>
#include <vector>

namespace metrorl {

// 64-bit FNV-1a. Child seeds are derived from a root seed plus context tags so
// every random stream in a run is a pure function of the root seed.
inline constexpr std::uint64_t kFnvOffset = 1469598103934665603ULL;
inline constexpr std::uint64_t kFnvPrime = 1099511628211ULL;

inline std::uint64_t fnv1a_mix(std::uint64_t h, std::string_view s) {
    for (unsigned char c : s) {
        h ^= c;
        h *= kFnvPrime;
    }
    return h;
}

inline std::uint64_t fnv1a_mix(std::uint64_t h, std::uint64_t v) {
    for (int i = 0; i < 8; ++i) {
        h ^= (v >> (8 * i)) & 0xffu;
        h *= kFnvPrime;
    }
    return h;
}

template <typename... Parts>
std::uint64_t derive_seed(std::uint64_t root, Parts&&... parts) {
    std::uint64_t h = fnv1a_mix(kFnvOffset, root);
    ((h = fnv1a_mix(h, parts)), ...);
    return h;
}

// Deterministic RNG. mt19937_64 is fully specified by the standard; the draws
// below avoid std::uniform_*_distribution, whose output is implementation
// defined and would break cross-platform reproducibility.
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : eng_(seed) {}

    std::uint64_t next() { return eng_(); }

    // Uniform in [0, n). n must be > 0.
    std::uint64_t below(std::uint64_t n) {
        const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
        std::uint64_t v = eng_();
        while (v >= limit) {
            v = eng_();
        }
        return v % n;
    }

    int below_int(int n) { return static_cast<int>(below(static_cast<std::uint64_t>(n))); }

    // Uniform double in [0, 1) with 53 random bits.
    double unit() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    // Fisher-Yates.
    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            std::swap(v[i - 1], v[below(i)]);
        }
    }

    template <typename T>
    const T& pick(const std::vector<T>& v) {
        return v[below(v.size())];
    }

  private:
    std::mt19937_64 eng_;
};

}  // namespace metrorl
