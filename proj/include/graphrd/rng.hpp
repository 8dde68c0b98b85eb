#pragma once

#include <cstdint>
#include <vector>

namespace graphrd {

// Counter-based pseudo-random generator. The i-th output is a bijective
// finalizer applied to seed + i*gamma, so a stream is fully determined by its
// 64-bit seed and independent substreams can be derived by hashing the seed
// with a stream tag (see derive_seed below).
class Rng {
public:
    explicit Rng(std::uint64_t seed) noexcept : state_(seed) {}

    std::uint64_t next_u64() noexcept {
        state_ += 0x9E3779B97F4A7C15ull;
        std::uint64_t z = state_;
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
        return z ^ (z >> 31);
    }

    // Unbiased integer in [0, bound). bound must be nonzero.
    std::uint64_t uniform_below(std::uint64_t bound) noexcept {
        // Lemire multiply-shift with rejection.
        unsigned __int128 m = static_cast<unsigned __int128>(next_u64()) * bound;
        auto lo = static_cast<std::uint64_t>(m);
        if (lo < bound) {
            const std::uint64_t threshold = (0 - bound) % bound;
            while (lo < threshold) {
                m = static_cast<unsigned __int128>(next_u64()) * bound;
                lo = static_cast<std::uint64_t>(m);
            }
        }
        return static_cast<std::uint64_t>(m >> 64);
    }

    // Uniform double in [0, 1) with 53 random bits.
    double uniform01() noexcept {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    template <class T>
    void shuffle(std::vector<T>& v) noexcept {
        for (std::size_t i = v.size(); i > 1; --i) {
            const std::size_t j = static_cast<std::size_t>(uniform_below(i));
            std::swap(v[i - 1], v[j]);
        }
    }

private:
    std::uint64_t state_;
};

namespace detail {
inline std::uint64_t mix64(std::uint64_t z) noexcept {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}
}  // namespace detail

// Derives the seed of an independent substream. Chaining calls with distinct
// tags yields distinct streams; the mapping is stable across platforms.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) noexcept {
    std::uint64_t h = detail::mix64(seed ^ 0xA0761D6478BD642Full);
    h = detail::mix64(h + 0x9E3779B97F4A7C15ull * (stream + 1));
    return h;
}

template <class... Rest>
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream, Rest... rest) noexcept {
    return derive_seed(derive_seed(seed, stream), rest...);
}

}  // namespace graphrd
