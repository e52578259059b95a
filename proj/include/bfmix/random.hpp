#pragma once

#include <array>
#include <cstdint>
#include <limits>
#include <optional>

namespace bfmix {

/// Counter-based random stream (Philox4x32-10).
///
/// The key is derived from `seed`; `stream_id` occupies the upper half of
/// the 128-bit counter, so two streams with different ids never share a
/// block. Draw sequences depend only on (seed, stream_id) and the number of
/// draws already taken, never on scheduling.
///
/// A stream is single-consumer. It may be moved or copied to another thread,
/// but one instance must not be shared between threads.
class RandomStream {
public:
    using result_type = std::uint64_t;

    RandomStream(std::uint64_t seed, std::uint64_t stream_id) noexcept;

    std::uint64_t seed() const noexcept { return seed_; }
    std::uint64_t stream_id() const noexcept { return stream_id_; }

    /// Independent child stream with a key derived from (seed, stream_id).
    RandomStream substream(std::uint64_t index) const noexcept;

    std::uint64_t next_u64() noexcept;
    /// Uniform on the open interval (0, 1), 53-bit resolution.
    double uniform() noexcept;
    /// Standard normal (Marsaglia polar method).
    double normal() noexcept;
    double normal(double mean, double sd) noexcept { return mean + sd * normal(); }

    // UniformRandomBitGenerator
    static constexpr result_type min() noexcept { return 0; }
    static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }
    result_type operator()() noexcept { return next_u64(); }

private:
    void refill() noexcept;

    std::uint64_t seed_;
    std::uint64_t stream_id_;
    std::array<std::uint32_t, 2> key_{};
    std::uint64_t block_ = 0;
    std::array<std::uint32_t, 4> buffer_{};
    int used_ = 4;
    std::optional<double> spare_normal_;
};

namespace detail {
/// Philox4x32 with 10 rounds applied to one counter block.
std::array<std::uint32_t, 4> philox4x32_10(std::array<std::uint32_t, 4> ctr,
                                           std::array<std::uint32_t, 2> key) noexcept;
}  // namespace detail

/// SplitMix64 finalizer; a bijective 64-bit mixer.
std::uint64_t mix64(std::uint64_t x) noexcept;

}  // namespace bfmix
