#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <vector>

namespace zslkit {

/**
 * Seeded pseudo-random source used for every stochastic step in zslkit.
 *
 * The engine is std::mt19937_64, whose output sequence is fixed by the C++
 * standard. The derived draws below are implemented here rather than via the
 * <random> distributions (whose algorithms are implementation-defined), so a
 * given seed yields the same splits, samples and initialisations on every
 * platform and in any reimplementation:
 *
 *  - uniform01(): top 53 bits of one engine output, scaled by 2^-53.
 *  - below(n):    rejection sampling on one 64-bit output per attempt,
 *                 rejecting values >= floor(2^64 / n) * n, then modulo n.
 *  - normal():    Box-Muller on two uniform01() draws (u1 mapped to (0,1]),
 *                 returning the cosine branch only.
 *  - shuffle():   Fisher-Yates from the back, swapping i with below(i + 1).
 */
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : engine_{ seed } {}

    std::uint64_t next() { return engine_(); }
    double uniform01();
    std::uint64_t below(std::uint64_t n);
    double normal();

    template <typename T>
    void shuffle(std::vector<T> &items) {
        for (std::size_t i = items.size(); i > 1; --i) {
            const auto j = static_cast<std::size_t>(below(i));
            std::swap(items[i - 1], items[j]);
        }
    }

  private:
    std::mt19937_64 engine_;
};

/// SplitMix64 finaliser; derives independent child seeds (e.g. one per split index).
[[nodiscard]] std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) noexcept;

}  // namespace zslkit
