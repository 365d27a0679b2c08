#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <random>
#include <set>
#include <vector>

#include "oracles.hpp"
#include "pspin/clustering.hpp"

using namespace pspin;
using namespace pspin::clustering;

namespace {

std::vector<SpinConfig> configs(int n, std::initializer_list<std::uint32_t> bits) {
    std::vector<SpinConfig> out;
    for (const auto b : bits) out.emplace_back(b, n);
    return out;
}

std::vector<std::set<std::uint32_t>> as_sets(const ClusterReport& rep) {
    std::vector<std::set<std::uint32_t>> out;
    for (const auto& c : rep.clusters) {
        std::set<std::uint32_t> s;
        for (const auto& m : c) s.insert(m.bits);
        out.push_back(s);
    }
    std::sort(out.begin(), out.end());
    return out;
}

// planted instance: centers pairwise far apart, members within radius of one center
struct Planted {
    std::vector<SpinConfig> members;
    std::vector<std::set<std::uint32_t>> partition;
};

Planted plant(std::mt19937_64& rng, int n, double nu1, double nu2, int n_clusters, int per_cluster) {
    Planted out;
    const int radius = static_cast<int>(nu1 * n / 2.0);
    const int min_center_dist = static_cast<int>((nu2 + nu1) * n) + 1;
    std::vector<std::uint32_t> centers;
    std::uniform_int_distribution<std::uint32_t> word(0, (1u << n) - 1);
    while (static_cast<int>(centers.size()) < n_clusters) {
        const std::uint32_t c = word(rng);
        bool ok = true;
        for (const auto prev : centers) ok = ok && hamming_bits(prev, c) >= min_center_dist;
        if (ok) centers.push_back(c);
    }
    std::uniform_int_distribution<int> flip_count(0, radius);
    std::uniform_int_distribution<int> site(0, n - 1);
    for (const auto c : centers) {
        std::set<std::uint32_t> cluster;
        cluster.insert(c);
        while (static_cast<int>(cluster.size()) < per_cluster) {
            std::uint32_t w = c;
            const int flips = flip_count(rng);
            for (int f = 0; f < flips; ++f) w ^= 1u << site(rng);
            cluster.insert(w);
        }
        for (const auto w : cluster) out.members.emplace_back(w, n);
        out.partition.push_back(cluster);
    }
    std::shuffle(out.members.begin(), out.members.end(), rng);
    std::sort(out.partition.begin(), out.partition.end());
    return out;
}

} // namespace

TEST_CASE("check_ogp basics") {
    CHECK(check_ogp(configs(4, {0b0101}), 0.25, 0.75).holds);

    // whole cube at n=8: distances 3..5 violate (0.25, 0.75)
    std::vector<SpinConfig> cube;
    for (std::uint32_t b = 0; b < 256; ++b) cube.emplace_back(b, 8);
    const OgpVerdict v = check_ogp(cube, 0.25, 0.75);
    CHECK_FALSE(v.holds);
    REQUIRE(!v.witnesses.empty());
    CHECK(v.witnesses.size() <= 16);
    for (const auto& [a, b] : v.witnesses) {
        const int d = hamming(a, b);
        CHECK(d > 2);
        CHECK(d < 6);
    }

    CHECK(check_ogp(configs(4, {0b0000, 0b0001, 0b1110, 0b1111}), 0.3, 0.7).holds);
}

TEST_CASE("cluster recovers the two-pair example") {
    const auto rep = cluster(configs(4, {0b0000, 0b0001, 0b1110, 0b1111}), 0.3, 0.7);
    CHECK(rep.ogp_holds);
    REQUIRE(rep.cluster_count() == 2);
    CHECK(rep.sizes == std::vector<std::size_t>{2, 2});
    CHECK(rep.max_diameter == doctest::Approx(0.25));
    CHECK(rep.min_interdistance == doctest::Approx(0.75));
    const auto sets = as_sets(rep);
    CHECK(sets[0] == std::set<std::uint32_t>{0b0000, 0b0001});
    CHECK(sets[1] == std::set<std::uint32_t>{0b1110, 0b1111});
}

TEST_CASE("far-apart members become singletons; empty set has L = 0") {
    const auto rep = cluster(configs(8, {0b00000000, 0b00011111, 0b11111000}), 0.2, 0.6);
    CHECK(rep.cluster_count() == 3);
    for (const auto s : rep.sizes) CHECK(s == 1);

    const auto empty = cluster({}, 0.2, 0.6);
    CHECK(empty.cluster_count() == 0);
}

TEST_CASE("cluster refuses when the OGP pre-check fails") {
    // distances 2 and 4 with nu = (0.2, 0.7): 2/8 = 0.25 lands inside
    const auto bad = configs(8, {0b00000000, 0b00000011, 0b00001111});
    CHECK_THROWS_AS(cluster(bad, 0.2, 0.7), ogp_violation);
    try {
        cluster(bad, 0.2, 0.7);
    } catch (const ogp_violation& v) {
        CHECK(!v.witnesses.empty());
    }
    CHECK_THROWS_AS(cluster(bad, 0.4, 0.7), std::invalid_argument);  // 2 nu1 >= nu2
}

TEST_CASE("cluster output is invariant under member permutations") {
    std::mt19937_64 rng(42);
    for (int trial = 0; trial < 30; ++trial) {
        Planted inst = plant(rng, 20, 0.2, 0.45, 3, 5);
        const auto rep1 = cluster(inst.members, 0.2, 0.45);
        std::shuffle(inst.members.begin(), inst.members.end(), rng);
        const auto rep2 = cluster(inst.members, 0.2, 0.45);
        CHECK(as_sets(rep1) == as_sets(rep2));
    }
}

TEST_CASE("planted partitions are recovered exactly") {
    std::mt19937_64 rng(7);
    for (int trial = 0; trial < 50; ++trial) {
        const Planted inst = plant(rng, 24, 0.1, 0.25, 4, 6);
        const auto rep = cluster(inst.members, 0.1, 0.25);
        CHECK(as_sets(rep) == inst.partition);
    }
}

TEST_CASE("components agree with the brute-force equivalence closure") {
    std::mt19937_64 rng(11);
    std::uniform_int_distribution<std::uint32_t> word(0, (1u << 10) - 1);
    for (int trial = 0; trial < 40; ++trial) {
        std::set<std::uint32_t> bits;
        while (bits.size() < 60) bits.insert(word(rng));
        std::vector<SpinConfig> members;
        for (const auto b : bits) members.emplace_back(b, 10);
        const double nu1 = 0.3;
        const auto rep = connected_components(members, nu1, 0.7);
        CHECK(as_sets(rep) == oracle::brute_closure(members, nu1));
    }
}

TEST_CASE("within one cluster every pair is chain-connected") {
    std::mt19937_64 rng(3);
    const Planted inst = plant(rng, 20, 0.2, 0.45, 3, 6);
    const double nu1 = 0.2;
    const auto rep = cluster(inst.members, nu1, 0.45);
    for (const auto& cl : rep.clusters) {
        // BFS from each member through the nu1-graph restricted to the cluster
        for (std::size_t src = 0; src < cl.size(); ++src) {
            std::vector<bool> seen(cl.size(), false);
            std::vector<std::size_t> queue{src};
            seen[src] = true;
            while (!queue.empty()) {
                const std::size_t cur = queue.back();
                queue.pop_back();
                for (std::size_t j = 0; j < cl.size(); ++j)
                    if (!seen[j] && hamming(cl[cur], cl[j]) <= nu1 * 20) {
                        seen[j] = true;
                        queue.push_back(j);
                    }
            }
            for (const bool s : seen) CHECK(s);
        }
    }
}

TEST_CASE("shattering verdict conditions") {
    // L = 1 can never be exponentially many when c_exp > 0
    ClusterReport single;
    single.clusters = {{SpinConfig{0, 8}}};
    single.sizes = {1};
    const auto v1 = shattering_verdict(single, {0.5}, 0.5, 0.5, 0.01, 0.1, 8);
    CHECK_FALSE(v1.exp_many);

    // equal masses 1/L with L = 2^{0.2 n} pass the subdominance bar c' = 0.1 ln 2
    const int n = 20;
    const std::size_t L = 16;  // 2^{0.2 * 20}
    ClusterReport many;
    for (std::size_t i = 0; i < L; ++i) {
        many.clusters.push_back({SpinConfig{static_cast<std::uint32_t>(i), n}});
        many.sizes.push_back(1);
    }
    many.max_diameter = 0.0;
    many.min_interdistance = 0.5;
    const std::vector<double> masses(L, 1.0 / L);
    const auto v2 = shattering_verdict(many, masses, 0.4, 0.45, 0.2, 0.1 * std::log(2.0), n);
    CHECK(v2.exp_many);
    CHECK(v2.subdominant);
    CHECK(v2.separated);
    CHECK(v2.carries_mass);
    CHECK(v2.all());

    CHECK_THROWS_AS(shattering_verdict(many, {0.1}, 0.4, 0.45, 0.2, 0.1, n), std::invalid_argument);
}
