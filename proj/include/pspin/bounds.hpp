#pragma once

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "pspin/spin.hpp"

// Closed-form exponents and threshold constants behind the clustering and
// shattering counts. Everything is reported in bits (base 2) unless the name
// says otherwise.
namespace pspin::bounds {

inline constexpr double kLn2 = std::numbers::ln2;

// h(q) = -q log2 q - (1-q) log2(1-q); endpoints 0 by continuity.
inline double binary_entropy(double q) {
    if (!(q >= 0.0 && q <= 1.0)) throw std::invalid_argument("binary_entropy: q outside [0,1]");
    if (q == 0.0 || q == 1.0) return 0.0;
    return -q * std::log2(q) - (1.0 - q) * std::log2(1.0 - q);
}

// Two-term truncation of the entropy series around 1/2; an upper bound on
// h((1-alpha)/2) since the dropped terms are all nonnegative.
inline double entropy_taylor_upper(double alpha) {
    if (!(alpha >= -1.0 && alpha <= 1.0)) throw std::invalid_argument("entropy_taylor_upper: |alpha| > 1");
    const double a2 = alpha * alpha;
    return 1.0 - a2 / (2.0 * kLn2) - a2 * a2 / (12.0 * kLn2);
}

// First-moment exponent of the pair set S(nu1,nu2,eps) with nu1 = nu2/3:
// 1 + h(nu2) - 2(1-eps)^2 + (1-2 nu2/3)^p. Negative => pairs at middle
// distance vanish, i.e. the pair OGP.
inline double pair_ogp_exponent(double epsilon, double nu2, int p) {
    if (!(epsilon > 0.0 && epsilon < 1.0)) throw std::invalid_argument("pair_ogp_exponent: epsilon outside (0,1)");
    if (!(nu2 > 0.0 && nu2 < 0.5)) throw std::invalid_argument("pair_ogp_exponent: nu2 outside (0,1/2)");
    const double one_eps = 1.0 - epsilon;
    return 1.0 + binary_entropy(nu2) - 2.0 * one_eps * one_eps + std::pow(1.0 - 2.0 * nu2 / 3.0, p);
}

struct ClusterSizeExponent {
    double value = 0.0;
    double branch_close = 0.0;  // 1 + h(delta) - (1-eps)^2
    double branch_mid = 0.0;    // 1 + h(nu1) - 2(1-eps)^2 + (1-2 delta)^p
    int active_branch = 0;      // 0 = close, 1 = mid
};

// Exponent c with E|S(0,nu1,eps)| <= 2^{cn + O(log n)}.
inline ClusterSizeExponent cluster_size_exponent(double epsilon, double nu1, double delta, int p) {
    if (!(delta > 0.0 && delta < nu1 && nu1 < 0.5))
        throw std::invalid_argument("cluster_size_exponent: need 0 < delta < nu1 < 1/2");
    const double one_eps = 1.0 - epsilon;
    ClusterSizeExponent e;
    e.branch_close = 1.0 + binary_entropy(delta) - one_eps * one_eps;
    e.branch_mid = 1.0 + binary_entropy(nu1) - 2.0 * one_eps * one_eps + std::pow(1.0 - 2.0 * delta, p);
    e.active_branch = e.branch_close >= e.branch_mid ? 0 : 1;
    e.value = std::max(e.branch_close, e.branch_mid);
    return e;
}

struct ClusteringConstants {
    double epsilon = 0.0;
    double nu1 = 0.0;
    double nu2 = 0.0;
    double delta = 0.0;
    double xi_eps = 0.0;        // margin Xi(eps)
    double gamma_margin = 0.0;  // slack gamma in the exponent bookkeeping
    double c1 = 0.0;            // log2|S(eps)|/n lower bound
    double c2 = 0.0;            // log2 max cluster size /n upper bound
    double cluster_exponent = 0.0;
    int p_hat = 0;              // smallest p making both display checks hold
};

inline double xi_of_eps(double epsilon) {
    const double a = std::pow(epsilon, 10), b = std::pow(1.0 - epsilon, 10);
    return std::min(a, b) / 100.0;
}

// smallest grid value nu2 in {0.01k} whose pair exponent goes negative for
// some finite p (equivalently: negative in the p -> infinity limit)
inline double search_nu2(double epsilon) {
    const double target = 2.0 * (1.0 - epsilon) * (1.0 - epsilon) - 1.0;
    for (int k = 1; k <= 49; ++k) {
        const double nu2 = 0.01 * k;
        if (binary_entropy(nu2) < target) return nu2;
    }
    throw std::invalid_argument("search_nu2: no feasible nu2 on the grid for this epsilon");
}

// The constant recipe behind the exponentially-many-clusters theorem.
inline ClusteringConstants clustering_constants(double epsilon, double nu1, double nu2) {
    if (!(epsilon > 0.0 && epsilon < 1.0 - 1.0 / std::numbers::sqrt2))
        throw std::invalid_argument("clustering_constants: epsilon outside (0, 1 - 1/sqrt 2)");
    if (std::abs(nu1 - nu2 / 3.0) > 1e-12)
        throw std::invalid_argument("clustering_constants: need nu1 = nu2/3");
    ClusteringConstants k;
    k.epsilon = epsilon;
    k.nu1 = nu1;
    k.nu2 = nu2;
    k.xi_eps = xi_of_eps(epsilon);
    const double one_eps2 = (1.0 - epsilon) * (1.0 - epsilon);
    k.gamma_margin = std::min((1.0 - binary_entropy(nu1) - 2.0 * k.xi_eps) / 5.0,
                              (1.0 - one_eps2 - 2.0 * k.xi_eps) / 5.0);

    // largest delta on the 0.001 grid below nu1 with h(delta) under the cap
    const double cap = 1.0 - one_eps2 - 2.0 * k.xi_eps - 4.0 * k.gamma_margin;
    k.delta = 0.0;
    for (int j = 1; 0.001 * j < nu1 && 0.001 * j < 0.5; ++j) {
        const double d = 0.001 * j;
        if (binary_entropy(d) < cap) k.delta = d;
        else break;  // h is increasing on (0, 1/2)
    }
    if (k.delta == 0.0) throw std::invalid_argument("clustering_constants: no feasible delta on the search grid");

    // smallest p with (i) negative pair exponent and (ii) (1-2 delta)^p below
    // (1 - h(nu1))/5; both sides are monotone in p
    const double mid_cap = (1.0 - binary_entropy(nu1)) / 5.0;
    if (!(pair_ogp_exponent(epsilon, nu2, 1 << 24) < 0.0))
        throw std::invalid_argument("clustering_constants: pair exponent never negative for this (epsilon, nu2)");
    int p = 2;
    while (pair_ogp_exponent(epsilon, nu2, p) >= 0.0 || std::pow(1.0 - 2.0 * k.delta, p) >= mid_cap) {
        if (++p > (1 << 24)) throw std::runtime_error("clustering_constants: p search did not terminate");
    }
    k.p_hat = p;

    k.cluster_exponent = cluster_size_exponent(epsilon, nu1, k.delta, k.p_hat).value;
    k.c1 = epsilon * (2.0 - epsilon) - k.gamma_margin;
    k.c2 = k.cluster_exponent / 2.0 + k.gamma_margin;
    if (!(k.c1 - k.c2 > k.xi_eps))
        throw std::runtime_error("clustering_constants: c1 - c2 > Xi(eps) failed; recipe inconsistent");
    return k;
}

struct MomentRegimeConfig {
    double alpha_star = 0.0;  // in (0,1)
    double iota = 0.25;       // in (0, 1/2)
};

struct MomentRegimeVerdict {
    bool alpha_star_ok = false;
    bool p_ok_lemma_neg = false;
    bool p_ok_iota = false;
    double p_threshold_lemma_neg = 0.0;

    bool overall() const { return alpha_star_ok && p_ok_lemma_neg && p_ok_iota; }
};

// Conditions under which the second-moment sum is controlled: the large-alpha
// cut at alpha*, the polynomial-vs-entropy trade-off at p, and p > 1/iota.
inline MomentRegimeVerdict second_moment_regime(double epsilon, const MomentRegimeConfig& cfg, int p) {
    if (!(cfg.alpha_star > 0.0 && cfg.alpha_star < 1.0)) throw std::invalid_argument("second_moment_regime: alpha* outside (0,1)");
    if (!(cfg.iota > 0.0 && cfg.iota < 0.5)) throw std::invalid_argument("second_moment_regime: iota outside (0,1/2)");
    MomentRegimeVerdict v;
    const double one_eps2 = (1.0 - epsilon) * (1.0 - epsilon);
    v.alpha_star_ok = -1.0 + binary_entropy((1.0 - cfg.alpha_star) / 2.0) + one_eps2 < 0.0;
    v.p_threshold_lemma_neg =
        std::log(24.0 * kLn2 / std::pow(cfg.alpha_star, 4)) / std::log(1.0 / cfg.alpha_star);
    v.p_ok_lemma_neg = p >= v.p_threshold_lemma_neg;
    v.p_ok_iota = p > 1.0 / cfg.iota;
    return v;
}

// largest grid alpha* that satisfies the large-alpha condition for this eps
inline double default_alpha_star(double epsilon) {
    const double one_eps2 = (1.0 - epsilon) * (1.0 - epsilon);
    for (int k = 99; k >= 1; --k) {
        const double a = 0.01 * k;
        if (-1.0 + binary_entropy((1.0 - a) / 2.0) + one_eps2 < 0.0) return a;
    }
    throw std::invalid_argument("default_alpha_star: no feasible alpha* on the grid");
}

// phi(gamma) = (1-gamma^2) ln 2 + beta gamma sqrt(2 ln 2); natural-log units.
inline double band_quadratic(double gamma, double beta) {
    if (!(beta > 0.0)) throw std::invalid_argument("band_quadratic: beta must be positive");
    return (1.0 - gamma * gamma) * kLn2 + beta * gamma * kSqrt2Ln2;
}

inline double gamma_star(double beta) {
    if (!(beta > 0.0)) throw std::invalid_argument("gamma_star: beta must be positive");
    return beta / kSqrt2Ln2;
}

inline double kappa_star(double beta) {
    if (!(beta > 0.0)) throw std::invalid_argument("kappa_star: beta must be positive");
    return std::pow(kLn2 / (2.0 * beta * beta), 0.25);
}

// log2 E|S(eps)| with the polynomial correction kept:
// n(1-(1-eps)^2) - log2((1-eps) sqrt(4 pi n ln 2)).
inline double first_moment_count(double epsilon, int n) {
    if (!(epsilon > 0.0 && epsilon < 1.0)) throw std::invalid_argument("first_moment_count: epsilon outside (0,1)");
    if (n < 1) throw std::invalid_argument("first_moment_count: n < 1");
    const double one_eps = 1.0 - epsilon;
    return n * (1.0 - one_eps * one_eps) - std::log2(one_eps * std::sqrt(4.0 * M_PI * n * kLn2));
}

} // namespace pspin::bounds
