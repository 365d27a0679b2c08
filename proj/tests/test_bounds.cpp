#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "oracles.hpp"
#include "pspin/bounds.hpp"
#include "pspin/disorder.hpp"
#include "pspin/landscape.hpp"

using namespace pspin;
using namespace pspin::bounds;

namespace {

// independent long-double route: natural logs, rescaled at the end
long double h_ld(long double q) {
    if (q <= 0.0L || q >= 1.0L) return 0.0L;
    return (-q * std::log(q) - (1.0L - q) * std::log(1.0L - q)) / std::log(2.0L);
}

} // namespace

TEST_CASE("binary entropy values") {
    CHECK(binary_entropy(0.5) == 1.0);
    CHECK(binary_entropy(0.0) == 0.0);
    CHECK(binary_entropy(1.0) == 0.0);
    CHECK(binary_entropy(1.0 / 6.0) == doctest::Approx(0.650022421648354).epsilon(1e-9));
    CHECK(binary_entropy(1.0 / 6.0) == doctest::Approx(static_cast<double>(h_ld(1.0L / 6.0L))).epsilon(1e-12));
    CHECK_THROWS_AS(binary_entropy(-0.1), std::invalid_argument);
    CHECK_THROWS_AS(binary_entropy(1.1), std::invalid_argument);
}

TEST_CASE("entropy taylor truncation upper-bounds the entropy") {
    CHECK(entropy_taylor_upper(0.0) == 1.0);
    CHECK(entropy_taylor_upper(1.0) == doctest::Approx(1.0 - 7.0 / (12.0 * std::numbers::ln2)).epsilon(1e-12));
    CHECK(entropy_taylor_upper(1.0) >= 0.0);
    for (int k = -100; k <= 100; ++k) {
        const double alpha = 0.01 * k;
        CHECK(entropy_taylor_upper(alpha) >= binary_entropy((1.0 - alpha) / 2.0));
    }
}

TEST_CASE("pair OGP exponent") {
    // large p: the interaction term dies and the limit is 1 + h(nu2) - 2(1-eps)^2
    const double eps = 0.2, nu2 = 0.3;
    const double limit = 1.0 + binary_entropy(nu2) - 2.0 * 0.8 * 0.8;
    CHECK(pair_ogp_exponent(eps, nu2, 1 << 20) == doctest::Approx(limit).epsilon(1e-12));

    // near the (eps -> 0, nu2 -> 1/2) corner the exponent approaches (2/3)^p
    const double corner = pair_ogp_exponent(1e-12, 0.5 - 1e-12, 3);
    CHECK(corner == doctest::Approx(std::pow(2.0 / 3.0, 3)).epsilon(1e-6));
    CHECK(corner > 0.0);

    const long double want = 1.0L + h_ld(0.4L) - 2.0L * 0.75L * 0.75L +
                             std::pow(1.0L - 2.0L * 0.4L / 3.0L, 40);
    CHECK(pair_ogp_exponent(0.25, 0.4, 40) == doctest::Approx(static_cast<double>(want)).epsilon(1e-12));

    // strictly decreasing in p, strictly increasing in nu2
    for (int p = 2; p < 30; ++p)
        CHECK(pair_ogp_exponent(0.2, 0.3, p + 1) < pair_ogp_exponent(0.2, 0.3, p));
    for (int k = 1; k < 49; ++k)
        CHECK(pair_ogp_exponent(0.2, 0.01 * (k + 1), 10) > pair_ogp_exponent(0.2, 0.01 * k, 10));
}

TEST_CASE("cluster size exponent") {
    // delta -> nu1, p -> infinity: the close branch dominates by (1-eps)^2
    const double eps = 0.2, nu1 = 0.15;
    const auto near = cluster_size_exponent(eps, nu1, nu1 - 1e-9, 1 << 20);
    CHECK(near.active_branch == 0);
    CHECK(near.value == doctest::Approx(1.0 + binary_entropy(nu1) - 0.64).epsilon(1e-6));

    const long double b1 = 1.0L + h_ld(0.05L) - 0.8L * 0.8L;
    const long double b2 = 1.0L + h_ld(0.15L) - 2.0L * 0.8L * 0.8L + std::pow(0.9L, 50);
    const auto got = cluster_size_exponent(0.2, 0.15, 0.05, 50);
    CHECK(got.value == doctest::Approx(static_cast<double>(std::max(b1, b2))).epsilon(1e-12));

    for (int p = 2; p < 40; ++p)
        CHECK(cluster_size_exponent(0.2, 0.15, 0.05, p + 1).branch_mid <=
              cluster_size_exponent(0.2, 0.15, 0.05, p).branch_mid);

    CHECK_THROWS_AS(cluster_size_exponent(0.2, 0.1, 0.2, 5), std::invalid_argument);
}

TEST_CASE("clustering constants recipe") {
    CHECK(xi_of_eps(0.2) == doctest::Approx(1.024e-9).epsilon(1e-12));

    const double eps = 0.2;
    const double nu2 = search_nu2(eps);
    const ClusteringConstants k = clustering_constants(eps, nu2 / 3.0, nu2);

    // gamma is the min of its two branches, recomputable from returned fields
    const double g1 = (1.0 - binary_entropy(k.nu1) - 2.0 * k.xi_eps) / 5.0;
    const double g2 = (1.0 - (1.0 - eps) * (1.0 - eps) - 2.0 * k.xi_eps) / 5.0;
    CHECK(k.gamma_margin == std::min(g1, g2));

    CHECK(k.c1 - k.c2 > k.xi_eps);
    CHECK(binary_entropy(k.delta) <
          1.0 - (1.0 - eps) * (1.0 - eps) - 2.0 * k.xi_eps - 4.0 * k.gamma_margin);
    CHECK(k.delta < k.nu1);
    CHECK(2.0 * k.nu1 < k.nu2);

    // p_hat is the smallest p passing both display checks
    CHECK(pair_ogp_exponent(eps, k.nu2, k.p_hat) < 0.0);
    CHECK(std::pow(1.0 - 2.0 * k.delta, k.p_hat) < (1.0 - binary_entropy(k.nu1)) / 5.0);
    const bool prev_ok = pair_ogp_exponent(eps, k.nu2, k.p_hat - 1) < 0.0 &&
                         std::pow(1.0 - 2.0 * k.delta, k.p_hat - 1) < (1.0 - binary_entropy(k.nu1)) / 5.0;
    CHECK_FALSE(prev_ok);

    CHECK_THROWS_AS(clustering_constants(0.5, 0.01, 0.03), std::invalid_argument);   // eps out of range
    CHECK_THROWS_AS(clustering_constants(0.2, 0.02, 0.03), std::invalid_argument);   // nu1 != nu2/3
}

TEST_CASE("second moment regime conditions") {
    // alpha* = 0.5: lemma-neg threshold is ln(24 ln2 * 16)/ln 2
    const MomentRegimeConfig cfg{0.5, 0.25};
    const auto at9 = second_moment_regime(0.2, cfg, 9);
    CHECK(at9.p_threshold_lemma_neg == doctest::Approx(8.0565).epsilon(1e-3));
    CHECK(at9.p_ok_lemma_neg);
    CHECK_FALSE(second_moment_regime(0.2, cfg, 8).p_ok_lemma_neg);

    CHECK(second_moment_regime(0.2, cfg, 5).p_ok_iota);       // 1/iota = 4
    CHECK_FALSE(second_moment_regime(0.2, cfg, 4).p_ok_iota);

    const auto v = second_moment_regime(0.3, {0.9, 0.25}, 9);
    const double direct = -1.0 + binary_entropy((1.0 - 0.9) / 2.0) + 0.7 * 0.7;
    CHECK(v.alpha_star_ok == (direct < 0.0));

    // the condition only improves toward alpha* = 1, so the scan tops out
    const double astar = default_alpha_star(0.3);
    CHECK((-1.0 + binary_entropy((1.0 - astar) / 2.0) + 0.49) < 0.0);
    CHECK(astar == doctest::Approx(0.99));
}

TEST_CASE("band quadratic and its optimizers") {
    CHECK(gamma_star(kSqrt2Ln2) == doctest::Approx(1.0).epsilon(1e-15));
    for (const double beta : {0.3, 0.9, 1.1})
        CHECK(band_quadratic(0.0, beta) == doctest::Approx(std::numbers::ln2).epsilon(1e-15));
    CHECK(kappa_star(std::sqrt(std::numbers::ln2)) == doctest::Approx(0.8408964152537145).epsilon(1e-12));

    // phi(g*) - phi(g) = ln2 (g* - g)^2
    for (const double beta : {0.5, 0.9, 1.1}) {
        const double gs = gamma_star(beta);
        for (int i = 0; i <= 20; ++i) {
            const double g = 0.05 * i;
            const double lhs = band_quadratic(gs, beta) - band_quadratic(g, beta);
            CHECK(lhs == doctest::Approx(std::numbers::ln2 * (gs - g) * (gs - g)).epsilon(1e-12));
        }
    }

    // kappa* stays above 1/sqrt2 on the whole subcritical range
    for (int i = 1; i <= 100; ++i) {
        const double beta = kSqrt2Ln2 * i / 101.0;
        CHECK(kappa_star(beta) > 1.0 / std::numbers::sqrt2);
    }
}

TEST_CASE("first moment count") {
    const double eps_half = 1.0 - 1.0 / std::numbers::sqrt2;
    const int n = 64;
    CHECK(n * (1.0 - (1.0 - eps_half) * (1.0 - eps_half)) == doctest::Approx(n / 2.0).epsilon(1e-12));

    const long double want = 100.0L * (1.0L - 0.9L * 0.9L) -
                             std::log2(0.9L * std::sqrt(4.0L * static_cast<long double>(M_PI) * 100.0L *
                                                        std::log(2.0L)));
    CHECK(first_moment_count(0.1, 100) == doctest::Approx(static_cast<double>(want)).epsilon(1e-9));
}

TEST_CASE("first moment count predicts the REM level-set size") {
    const int n = 18, seeds = 500;
    const double eps = 0.3;
    std::vector<double> sizes;
    sizes.reserve(seeds);
    for (int s = 0; s < seeds; ++s) {
        const auto t = disorder::build_energy_table(n, 8, static_cast<std::uint64_t>(s),
                                                    disorder::Mode::RemLimit);
        sizes.push_back(static_cast<double>(landscape::s_eps(t, eps).size()));
    }
    const auto [mean, se] = oracle::mean_stderr(sizes);
    const double predicted = std::exp2(first_moment_count(eps, n));
    CHECK(std::abs(mean / predicted - 1.0) <= 0.2);
}
