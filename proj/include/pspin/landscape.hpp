#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "pspin/disorder.hpp"
#include "pspin/spin.hpp"

namespace pspin::landscape {

enum class Unit { Absolute, SqrtTwoLnTwo };

// Configurations of one table with energy in [lower, upper], sorted by bits.
struct LevelSet {
    std::vector<SpinConfig> members;
    double lower = -std::numeric_limits<double>::infinity();
    double upper = std::numeric_limits<double>::infinity();
    Unit unit = Unit::Absolute;
    int n = 0;
    int p = 0;
    disorder::Mode mode = disorder::Mode::RemLimit;
    std::uint64_t seed = 0;

    std::size_t size() const { return members.size(); }
};

// Admissible overlaps {alpha in [-1,1] : n - alpha*n == 0 mod 2}; n+1 values.
struct OverlapGrid {
    int n = 0;
    std::vector<double> values;

    explicit OverlapGrid(int sites) : n(sites) {
        values.reserve(static_cast<std::size_t>(n) + 1);
        for (int d = n; d >= 0; --d) values.push_back(1.0 - 2.0 * d / static_cast<double>(n));
    }

    // overlap after d bit flips
    double at_distance(int d) const { return 1.0 - 2.0 * d / static_cast<double>(n); }
};

inline LevelSet level_set(const disorder::EnergyTable& table, double lower, double upper,
                          Unit unit = Unit::Absolute) {
    if (lower > upper) throw std::invalid_argument("level_set: lower > upper");
    LevelSet s;
    s.lower = lower;
    s.upper = upper;
    s.unit = unit;
    s.n = table.n;
    s.p = table.p;
    s.mode = table.mode;
    s.seed = table.seed;
    const double lo = unit == Unit::SqrtTwoLnTwo ? lower * kSqrt2Ln2 : lower;
    const double hi = unit == Unit::SqrtTwoLnTwo ? upper * kSqrt2Ln2 : upper;
    for (std::size_t i = 0; i < table.size(); ++i) {
        const double e = table.energies[static_cast<Eigen::Index>(i)];
        if (e >= lo && e <= hi) s.members.push_back(table.config(i));
    }
    return s;
}

// S(eps): everything above (1-eps) sqrt(2 ln 2)
inline LevelSet s_eps(const disorder::EnergyTable& table, double epsilon) {
    return level_set(table, (1.0 - epsilon), std::numeric_limits<double>::infinity(), Unit::SqrtTwoLnTwo);
}

// Ordered-pair overlap counts, self-pairs included; total mass = |set|^2.
inline std::map<double, std::uint64_t> overlap_histogram(const LevelSet& set) {
    if (set.members.empty()) throw std::invalid_argument("overlap_histogram: empty set");
    const OverlapGrid grid(set.n);
    std::vector<std::uint64_t> by_distance(static_cast<std::size_t>(set.n) + 1, 0);
    const std::size_t m = set.members.size();
    for (std::size_t i = 0; i < m; ++i) {
        by_distance[0] += 1;  // self pair, alpha = 1
        for (std::size_t j = i + 1; j < m; ++j) {
            const int d = hamming(set.members[i], set.members[j]);
            by_distance[static_cast<std::size_t>(d)] += 2;  // both orders
        }
    }
    std::map<double, std::uint64_t> hist;
    for (int d = 0; d <= set.n; ++d)
        if (by_distance[static_cast<std::size_t>(d)] > 0)
            hist[grid.at_distance(d)] = by_distance[static_cast<std::size_t>(d)];
    return hist;
}

// Ordered pairs with d_H/n strictly inside (nu1, nu2). Empty <=> the set
// exhibits (nu1,nu2)-OGP: the open interval is the exact complement of
// "either <= nu1 n or >= nu2 n".
inline std::vector<std::pair<SpinConfig, SpinConfig>>
forbidden_pairs(const LevelSet& set, double nu1, double nu2) {
    if (!(nu1 > 0.0 && nu1 < nu2 && nu2 < 1.0)) throw std::invalid_argument("forbidden_pairs: need 0 < nu1 < nu2 < 1");
    std::vector<std::pair<SpinConfig, SpinConfig>> out;
    const double n = static_cast<double>(set.n);
    const std::size_t m = set.members.size();
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = i + 1; j < m; ++j) {
            const double d = static_cast<double>(hamming(set.members[i], set.members[j]));
            if (d > nu1 * n && d < nu2 * n) {
                out.emplace_back(set.members[i], set.members[j]);
                out.emplace_back(set.members[j], set.members[i]);
            }
        }
    return out;
}

// argmax and max of the table; ties break toward the lowest bit value.
inline std::pair<SpinConfig, double> ground_state(const disorder::EnergyTable& table) {
    std::size_t best = 0;
    double best_e = table.energies[0];
    for (std::size_t i = 1; i < table.size(); ++i) {
        const double e = table.energies[static_cast<Eigen::Index>(i)];
        if (e > best_e) {
            best_e = e;
            best = i;
        }
    }
    return {table.config(best), best_e};
}

inline std::string level_set_csv(const LevelSet& s) {
    std::string out = "bits\n";
    char line[32];
    for (const auto& c : s.members) {
        std::snprintf(line, sizeof line, "%u\n", c.bits);
        out += line;
    }
    return out;
}

} // namespace pspin::landscape
