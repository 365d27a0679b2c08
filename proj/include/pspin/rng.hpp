#pragma once

#include <cmath>
#include <cstdint>
#include <utility>

namespace pspin {

// Counter-based generator: every variate is a pure function of (key, counter).
// Philox 2x64-10 (Salmon et al. bumped-multiply rounds), so streams can be
// indexed and partitioned arbitrarily without losing reproducibility.
struct Philox2x64 {
    static constexpr std::uint64_t mul  = 0xD2B74407B1CE6E93ULL;
    static constexpr std::uint64_t weyl = 0x9E3779B97F4A7C15ULL;

    static std::pair<std::uint64_t, std::uint64_t>
    run(std::uint64_t c0, std::uint64_t c1, std::uint64_t key) {
        for (int round = 0; round < 10; ++round) {
            const auto prod = static_cast<__uint128_t>(mul) * c0;
            const auto hi = static_cast<std::uint64_t>(prod >> 64);
            const auto lo = static_cast<std::uint64_t>(prod);
            c0 = hi ^ key ^ c1;
            c1 = lo;
            key += weyl;
        }
        return {c0, c1};
    }
};

// Disjoint counter domains so independent streams never alias for one seed.
enum class StreamDomain : std::uint64_t {
    TensorEntry = 0,
    RemTable    = 1,
    GramNoise   = 2,
    SeedDerive  = 3,
    MonteCarlo  = 4,
    Synthetic   = 5,
};

inline std::uint64_t domain_tag(StreamDomain d) {
    return static_cast<std::uint64_t>(d) << 56;
}

// 53-bit mantissa uniform on (0,1); never 0, so log() below is safe.
inline double uniform01(std::uint64_t bits) {
    return static_cast<double>(bits >> 11) * 0x1.0p-53 + 0x1.0p-54;
}

// One N(0,1) variate per 128-bit counter (Box-Muller, cosine branch).
inline double standard_normal(std::uint64_t key, std::uint64_t ctr_lo, std::uint64_t ctr_hi) {
    const auto [a, b] = Philox2x64::run(ctr_lo, ctr_hi, key);
    const double u = uniform01(a);
    const double v = uniform01(b);
    return std::sqrt(-2.0 * std::log(u)) * std::cos(2.0 * M_PI * v);
}

inline double standard_normal(std::uint64_t key, StreamDomain d, std::uint64_t index) {
    return standard_normal(key, index, domain_tag(d));
}

// Deterministic sub-seed derivation (independent tables in the mogp ensemble).
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t slot) {
    return Philox2x64::run(slot, domain_tag(StreamDomain::SeedDerive), seed).first;
}

} // namespace pspin
