#pragma once

#include <cstdint>
#include <limits>

namespace tolpred {

// xoshiro256** seeded through SplitMix64 from (seed, stream_id). Copying a
// stream copies its position; substream(i) derives an independent child
// stream keyed by i, which is how simulations get one stream per run.
class RngStream {
public:
    using result_type = std::uint64_t;

    explicit RngStream(std::uint64_t seed = 0, std::uint64_t stream_id = 0);

    std::uint64_t seed() const noexcept { return seed_; }
    std::uint64_t stream_id() const noexcept { return stream_id_; }

    std::uint64_t next_u64() noexcept;
    result_type operator()() noexcept { return next_u64(); }
    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

    // Uniform on the open interval (0, 1) with 53 random bits.
    double uniform() noexcept;

    RngStream substream(std::uint64_t index) const;

private:
    std::uint64_t seed_;
    std::uint64_t stream_id_;
    std::uint64_t s_[4];
};

}  // namespace tolpred
