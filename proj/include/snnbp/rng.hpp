#pragma once

#include <cmath>
#include <cstdint>

namespace snnbp {

// splitmix64 finalizer; bijective on 64-bit words
inline std::uint64_t mix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ull;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

// Derives a child stream id; lanes of one stream never collide with the
// stream itself or with other lanes under mix64's bijectivity.
inline std::uint64_t substream(std::uint64_t stream, std::uint64_t lane) {
    return mix64(stream * 0xd1b54a32d192ed03ull + lane);
}

// Counter-based generator: value i = mix64(key ^ i*golden). Stateless per
// draw, so any (seed, stream) pair names a reproducible sequence and streams
// can be split without touching each other.
class CtrRng {
public:
    CtrRng(std::uint64_t seed, std::uint64_t stream)
        : key_(mix64(mix64(seed) ^ (stream * 0x9e3779b97f4a7c15ull + 0x8cb92ba72f3d8dd7ull))) {}

    std::uint64_t next_u64() { return mix64(key_ ^ (ctr_++ * 0x9e3779b97f4a7c15ull)); }

    // uniform on (0,1), never exactly 0 or 1
    double uniform01() { return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

    // standard normal via Box-Muller; the second member of each pair is cached
    double normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u1 = uniform01();
        double u2 = uniform01();
        double rad = std::sqrt(-2.0 * std::log(u1));
        double ang = 6.283185307179586476925286766559 * u2;
        spare_ = rad * std::sin(ang);
        has_spare_ = true;
        return rad * std::cos(ang);
    }

    std::uint64_t uniform_index(std::uint64_t n) {
        // rejection-free modulo is fine here: n is tiny relative to 2^64
        return next_u64() % n;
    }

private:
    std::uint64_t key_;
    std::uint64_t ctr_ = 0;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

}  // namespace snnbp
