#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "pspin/spin.hpp"

namespace pspin::clustering {

struct UnionFind {
    std::vector<std::uint32_t> parent;

    explicit UnionFind(std::size_t n) : parent(n) {
        std::iota(parent.begin(), parent.end(), 0u);
    }

    std::uint32_t find(std::uint32_t x) {
        std::uint32_t root = x;
        while (parent[root] != root) root = parent[root];
        while (parent[x] != root) {
            const std::uint32_t next = parent[x];
            parent[x] = root;
            x = next;
        }
        return root;
    }

    void unite(std::uint32_t a, std::uint32_t b) {
        a = find(a);
        b = find(b);
        if (a == b) return;
        if (a < b) parent[b] = a;  // smallest index wins: canonical labels
        else parent[a] = b;
    }
};

struct OgpVerdict {
    bool holds = true;
    std::vector<std::pair<SpinConfig, SpinConfig>> witnesses;  // up to 16 violating pairs
};

inline OgpVerdict check_ogp(const std::vector<SpinConfig>& set, double nu1, double nu2) {
    if (!(nu1 > 0.0 && nu1 < nu2 && nu2 < 1.0)) throw std::invalid_argument("check_ogp: need 0 < nu1 < nu2 < 1");
    OgpVerdict v;
    if (set.empty()) return v;
    const double n = static_cast<double>(set.front().n);
    for (std::size_t i = 0; i < set.size(); ++i)
        for (std::size_t j = i + 1; j < set.size(); ++j) {
            const double d = static_cast<double>(hamming(set[i], set[j]));
            if (d > nu1 * n && d < nu2 * n) {
                v.holds = false;
                if (v.witnesses.size() < 16) v.witnesses.emplace_back(set[i], set[j]);
                else return v;
            }
        }
    return v;
}

struct ClusterReport {
    std::vector<std::vector<SpinConfig>> clusters;
    double nu1 = 0.0;
    double nu2 = 0.0;
    std::vector<std::size_t> sizes;
    double max_diameter = 0.0;        // fraction of n
    double min_interdistance = 1.0;   // fraction of n; 1 when L <= 1
    bool ogp_holds = true;
    std::vector<std::pair<SpinConfig, SpinConfig>> witnesses;

    std::size_t cluster_count() const { return clusters.size(); }
};

// Connected components of the graph {d_H <= nu1 n}. This is the partition of
// the equivalence-relation construction whenever the OGP pre-check holds; it
// is computed unconditionally so diagnostics can still be reported when the
// pre-check fails (the OGP flag travels with the report).
inline ClusterReport connected_components(const std::vector<SpinConfig>& set, double nu1, double nu2) {
    ClusterReport rep;
    rep.nu1 = nu1;
    rep.nu2 = nu2;
    if (set.empty()) return rep;

    // canonical order: by bit value
    std::vector<SpinConfig> sorted = set;
    std::sort(sorted.begin(), sorted.end(),
              [](const SpinConfig& a, const SpinConfig& b) { return a.bits < b.bits; });
    sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());

    const std::size_t m = sorted.size();
    const double n = static_cast<double>(sorted.front().n);
    UnionFind uf(m);
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = i + 1; j < m; ++j)
            if (hamming(sorted[i], sorted[j]) <= nu1 * n)
                uf.unite(static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(j));

    std::vector<std::int64_t> label(m, -1);
    for (std::size_t i = 0; i < m; ++i) {
        const std::uint32_t root = uf.find(static_cast<std::uint32_t>(i));
        if (label[root] < 0) {
            label[root] = static_cast<std::int64_t>(rep.clusters.size());
            rep.clusters.emplace_back();
        }
        rep.clusters[static_cast<std::size_t>(label[root])].push_back(sorted[i]);
    }
    for (const auto& c : rep.clusters) rep.sizes.push_back(c.size());

    int max_diam = 0;
    int min_inter = sorted.front().n;
    bool any_inter = false;
    for (std::size_t a = 0; a < rep.clusters.size(); ++a) {
        for (std::size_t i = 0; i < rep.clusters[a].size(); ++i)
            for (std::size_t j = i + 1; j < rep.clusters[a].size(); ++j)
                max_diam = std::max(max_diam, hamming(rep.clusters[a][i], rep.clusters[a][j]));
        for (std::size_t b = a + 1; b < rep.clusters.size(); ++b)
            for (const auto& x : rep.clusters[a])
                for (const auto& y : rep.clusters[b]) {
                    min_inter = std::min(min_inter, hamming(x, y));
                    any_inter = true;
                }
    }
    rep.max_diameter = max_diam / n;
    rep.min_interdistance = any_inter ? min_inter / n : 1.0;
    return rep;
}

struct ogp_violation : std::invalid_argument {
    std::vector<std::pair<SpinConfig, SpinConfig>> witnesses;
    explicit ogp_violation(std::vector<std::pair<SpinConfig, SpinConfig>> w)
        : std::invalid_argument("cluster: set violates (nu1,nu2)-OGP; no clustering emitted"),
          witnesses(std::move(w)) {}
};

// Unique (nu1,nu2)-clustering under the OGP with 2 nu1 < nu2. Refuses when
// the pre-check fails: uniqueness only holds in the proposition's regime.
inline ClusterReport cluster(const std::vector<SpinConfig>& set, double nu1, double nu2) {
    if (!(nu1 > 0.0 && nu1 < nu2 && nu2 < 1.0)) throw std::invalid_argument("cluster: need 0 < nu1 < nu2 < 1");
    if (!(2.0 * nu1 < nu2)) throw std::invalid_argument("cluster: need 2 nu1 < nu2");
    OgpVerdict ogp = check_ogp(set, nu1, nu2);
    if (!ogp.holds) throw ogp_violation(std::move(ogp.witnesses));
    ClusterReport rep = connected_components(set, nu1, nu2);
    rep.ogp_holds = true;
    return rep;
}

struct ShatteringVerdict {
    bool exp_many = false;      // (a) log2(L)/n >= c_exp
    bool separated = false;     // (b) diameters <= a n and inter-distances >= b n
    bool subdominant = false;   // (c) max cluster mass <= exp(-cprime n)
    bool carries_mass = false;  // (d) total cluster mass >= 1 - 2^{-n/8}
    double log2_L_over_n = 0.0;
    double max_diameter = 0.0;
    double min_interdistance = 0.0;
    double max_mass = 0.0;
    double total_mass = 0.0;

    bool all() const { return exp_many && separated && subdominant && carries_mass; }
};

inline ShatteringVerdict shattering_verdict(const ClusterReport& report, const std::vector<double>& masses,
                                            double a, double b, double c_exp, double cprime_exp, int n) {
    if (masses.size() != report.clusters.size())
        throw std::invalid_argument("shattering_verdict: mass/cluster length mismatch");
    if (!(a > 0.0 && a < 1.0 && b > 0.0 && b < 1.0))
        throw std::invalid_argument("shattering_verdict: need 0 < a, b < 1");
    ShatteringVerdict v;
    const std::size_t L = report.clusters.size();
    v.log2_L_over_n = L > 0 ? std::log2(static_cast<double>(L)) / n : -std::numeric_limits<double>::infinity();
    v.exp_many = v.log2_L_over_n >= c_exp;
    v.max_diameter = report.max_diameter;
    v.min_interdistance = report.min_interdistance;
    v.separated = report.max_diameter <= a && report.min_interdistance >= b;
    v.max_mass = masses.empty() ? 0.0 : *std::max_element(masses.begin(), masses.end());
    v.subdominant = v.max_mass <= std::exp(-cprime_exp * n);
    v.total_mass = std::accumulate(masses.begin(), masses.end(), 0.0);
    v.carries_mass = v.total_mass >= 1.0 - std::exp2(-n / 8.0);
    return v;
}

} // namespace pspin::clustering
