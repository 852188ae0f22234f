#pragma once

#include <cstdint>

namespace ordprobit {

// PCG64 (XSL-RR) stream. A (seed, stream) pair fully determines the draw
// sequence; distinct stream ids select distinct LCG increments and give
// statistically independent streams, so parallel replications can each own
// RngStream(seed, replication_index).
class RngStream {
  public:
    explicit RngStream(std::uint64_t seed, std::uint64_t stream = 0);

    std::uint64_t next_u64();

    // Uniform on the open interval (0, 1); 53-bit resolution.
    double next_double();

    // Standard Gaussian via the inverse CDF (one uniform per draw).
    double next_gaussian();

    std::uint64_t seed() const { return seed_; }
    std::uint64_t stream() const { return stream_; }

    // Fresh stream sharing this object's seed. Convenience for fan-out.
    RngStream substream(std::uint64_t stream) const { return RngStream(seed_, stream); }

  private:
    using u128 = unsigned __int128;
    u128 state_;
    u128 inc_;
    std::uint64_t seed_;
    std::uint64_t stream_;
};

}  // namespace ordprobit
