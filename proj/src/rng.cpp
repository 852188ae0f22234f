#include "ordprobit/rng.hpp"

#include "ordprobit/numkern.hpp"

namespace ordprobit {

namespace {

std::uint64_t splitmix64(std::uint64_t& s) {
    s += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = s;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

}  // namespace

RngStream::RngStream(std::uint64_t seed, std::uint64_t stream)
    : seed_(seed), stream_(stream) {
    std::uint64_t s = stream ^ 0x5851f42d4c957f2dULL;
    inc_ = ((u128(splitmix64(s)) << 64) | splitmix64(s)) | 1;  // must be odd
    std::uint64_t t = seed;
    const u128 init = (u128(splitmix64(t)) << 64) | splitmix64(t);
    state_ = 0;
    next_u64();
    state_ += init;
    next_u64();
}

std::uint64_t RngStream::next_u64() {
    // PCG64 XSL-RR output function.
    static constexpr u128 mult =
        (u128(2549297995355413924ULL) << 64) | 4865540595714422341ULL;
    state_ = state_ * mult + inc_;
    const std::uint64_t xored =
        static_cast<std::uint64_t>(state_ >> 64) ^ static_cast<std::uint64_t>(state_);
    const unsigned rot = static_cast<unsigned>(state_ >> 122);
    return (xored >> rot) | (xored << ((64 - rot) & 63));
}

double RngStream::next_double() {
    // (0, 1) strictly; midpoints of 2^53 equal cells.
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
}

double RngStream::next_gaussian() { return norm_quantile(next_double()); }

}  // namespace ordprobit
