#pragma once

#include <cstdint>
#include <string_view>

namespace evopipe {

// splitmix64 finalizer; the same mixer backs both seed derivation and the
// Rng stream so results are identical across platforms and standard
// libraries (std::shuffle / std::uniform_int_distribution are not).
constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t salt) noexcept {
    return mix64(seed ^ mix64(salt));
}

constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b) noexcept {
    return derive_seed(derive_seed(seed, a), b);
}

constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b,
                                    std::uint64_t c) noexcept {
    return derive_seed(derive_seed(seed, a, b), c);
}

// FNV-1a, used to fold strings (e.g. a serialized subtree) into a seed.
constexpr std::uint64_t hash_bytes(std::string_view s) noexcept {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char ch : s) {
        h ^= ch;
        h *= 0x100000001b3ULL;
    }
    return h;
}

/// Deterministic pseudo-random stream (splitmix64).
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() noexcept { return mix64(state_++); }

    /// Uniform integer in [lo, hi], inclusive. Requires lo <= hi.
    int uniform_int(int lo, int hi) noexcept {
        const std::uint64_t n = static_cast<std::uint64_t>(hi - lo) + 1;
        const auto wide = static_cast<unsigned __int128>(next_u64());
        return lo + static_cast<int>((wide * n) >> 64);
    }

    std::size_t uniform_index(std::size_t n) noexcept {
        const auto wide = static_cast<unsigned __int128>(next_u64());
        return static_cast<std::size_t>((wide * n) >> 64);
    }

    /// Uniform double in [0, 1).
    double uniform01() noexcept {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    double uniform_real(double lo, double hi) noexcept {
        return lo + (hi - lo) * uniform01();
    }

    bool bernoulli(double p) noexcept { return uniform01() < p; }

    /// Independent child stream; deterministic function of current state and salt.
    Rng split(std::uint64_t salt) noexcept { return Rng(derive_seed(next_u64(), salt)); }

private:
    std::uint64_t state_;
};

/// In-place Fisher-Yates shuffle.
template <typename Vec>
void shuffle(Vec& v, Rng& rng) {
    for (std::size_t i = v.size(); i > 1; --i) {
        const std::size_t j = rng.uniform_index(i);
        using std::swap;
        swap(v[i - 1], v[j]);
    }
}

} // namespace evopipe
