#pragma once

#include <array>
#include <cstdint>
#include <limits>

namespace ssips {

/// Philox4x32-10 block function (Salmon et al., Random123).
///
/// Maps a 128-bit counter and a 64-bit key to 128 pseudo-random bits. There
/// is no hidden state, so any element of any stream can be computed
/// directly, independent of thread count or evaluation order.
std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> counter, std::array<std::uint32_t, 2> key);

/// Sequential view over one Philox stream, keyed by (seed, stream id).
///
/// Satisfies UniformRandomBitGenerator, but the library only consumes it
/// through next_u64 / uniform so results do not depend on the standard
/// library's distribution implementations.
class CounterRng {
public:
    using result_type = std::uint64_t;

    CounterRng(std::uint64_t seed, std::uint64_t stream, std::uint64_t offset = 0) noexcept
        : seed_(seed), stream_(stream), position_(offset) {}

    static constexpr result_type min() noexcept { return 0; }
    static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }
    result_type operator()() noexcept { return next_u64(); }

    std::uint64_t next_u64() noexcept;
    /// Uniform double in [0, 1) with 53 random bits.
    double uniform() noexcept { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }
    /// Index j with probability weights[j]; weights must sum to one.
    template <class Weights>
    int categorical(const Weights& weights) noexcept {
        const double u = uniform();
        double acc = 0.0;
        const int n = static_cast<int>(weights.size());
        for (int j = 0; j < n - 1; ++j) {
            acc += weights[j];
            if (u < acc) return j;
        }
        return n - 1;
    }

    std::uint64_t seed() const noexcept { return seed_; }
    std::uint64_t stream() const noexcept { return stream_; }

private:
    std::uint64_t seed_;
    std::uint64_t stream_;
    std::uint64_t position_;  // counts 64-bit outputs
    std::array<std::uint32_t, 4> block_{};
    std::uint64_t block_index_ = std::numeric_limits<std::uint64_t>::max();
};

}  // namespace ssips
