#pragma once

#include <cstdint>
#include <numeric>
#include <vector>

namespace actex::rng {

/**
 * SplitMix64 (Steele/Lea/Flood), the generator behind every random draw in
 * this library. It is tiny, seedable and produces the same stream on every
 * platform, which is what makes batches byte-reproducible.
 *
 * Substreams for batch element i are derived from (seed, i) alone, so a
 * batch generated across N threads equals the batch generated serially.
 */
class SplitMix64 {
  public:
    explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next() {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ull);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }

    /// Uniform double in [0, 1), 53 random mantissa bits.
    double uniform01() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    /// Uniform integer in [0, n), unbiased via rejection. n >= 1.
    std::uint64_t below(std::uint64_t n) {
        const std::uint64_t threshold = (0 - n) % n;  // 2^64 mod n
        for (;;) {
            const std::uint64_t r = next();
            if (r >= threshold) return r % n;
        }
    }

  private:
    std::uint64_t state_;
};

/// Independent stream for element `index` of a batch rooted at `seed`.
inline SplitMix64 substream(std::uint64_t seed, std::uint64_t index) {
    SplitMix64 mixer(seed ^ (0x9e3779b97f4a7c15ull * (index + 1)));
    return SplitMix64(mixer.next());
}

/// k distinct indices drawn uniformly from {0,...,n-1} (partial Fisher-Yates).
inline std::vector<std::size_t> draw_distinct(std::size_t k, std::size_t n, SplitMix64& g) {
    std::vector<std::size_t> pool(n);
    std::iota(pool.begin(), pool.end(), std::size_t{0});
    for (std::size_t i = 0; i < k && i < n; ++i) {
        const std::size_t j = i + static_cast<std::size_t>(g.below(n - i));
        std::swap(pool[i], pool[j]);
    }
    pool.resize(k < n ? k : n);
    return pool;
}

}  // namespace actex::rng
