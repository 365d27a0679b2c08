#pragma once

#include <bit>
#include <cstdint>
#include <stdexcept>

#include <Eigen/Core>

namespace pspin {

inline constexpr double kSqrt2Ln2 = 1.1774100225154747;  // sqrt(2 ln 2)
inline constexpr int kMaxSites = 28;

// Point of the discrete cube, packed as an n-bit word. Bit i set <=> spin i = +1.
struct SpinConfig {
    std::uint32_t bits = 0;
    int n = 0;

    SpinConfig() = default;
    SpinConfig(std::uint32_t b, int sites) : bits(b), n(sites) {
        if (sites < 1 || sites > kMaxSites) throw std::invalid_argument("SpinConfig: n out of range");
        if (sites < 32 && (b >> sites) != 0) throw std::invalid_argument("SpinConfig: bits beyond n");
    }

    double spin(int i) const { return (bits >> i) & 1u ? 1.0 : -1.0; }

    Eigen::VectorXd to_vector() const {
        Eigen::VectorXd v(n);
        for (int i = 0; i < n; ++i) v[i] = spin(i);
        return v;
    }

    static SpinConfig from_vector(const Eigen::VectorXd& v) {
        SpinConfig c;
        c.n = static_cast<int>(v.size());
        if (c.n < 1 || c.n > kMaxSites) throw std::invalid_argument("SpinConfig: n out of range");
        for (int i = 0; i < c.n; ++i)
            if (v[i] > 0) c.bits |= 1u << i;
        return c;
    }

    SpinConfig flipped_all() const { return {~bits & mask(), n}; }
    std::uint32_t mask() const { return n == 32 ? ~0u : (1u << n) - 1u; }

    friend bool operator==(const SpinConfig& a, const SpinConfig& b) {
        return a.bits == b.bits && a.n == b.n;
    }
};

inline int hamming(const SpinConfig& a, const SpinConfig& b) {
    if (a.n != b.n) throw std::invalid_argument("hamming: dimension mismatch");
    return std::popcount(a.bits ^ b.bits);
}

inline int hamming_bits(std::uint32_t a, std::uint32_t b) { return std::popcount(a ^ b); }

// <s,s'>/n = 1 - 2 d_H/n; always a point of the admissible overlap grid.
inline double overlap(const SpinConfig& a, const SpinConfig& b) {
    return 1.0 - 2.0 * static_cast<double>(hamming(a, b)) / static_cast<double>(a.n);
}

} // namespace pspin
