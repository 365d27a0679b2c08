#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <random>
#include <vector>

#include "oracles.hpp"
#include "pspin/landscape.hpp"
#include "pspin/mogp.hpp"
#include "pspin/tails.hpp"

using namespace pspin;
using namespace pspin::mogp;

TEST_CASE("base covariance closed forms") {
    const CovarianceModel one = base_covariance(1, 0.5, 4);
    CHECK(one.sigma(0, 0) == 1.0);
    CHECK(one.det == 1.0);
    CHECK(one.inverse(0, 0) == doctest::Approx(1.0).epsilon(1e-15));

    const double rho = std::pow(0.8, 6);
    const CovarianceModel two = base_covariance(2, 0.8, 6);
    CHECK(two.det == doctest::Approx(1.0 - rho * rho).epsilon(1e-14));

    const CovarianceModel five = base_covariance(5, 0.9, 8);
    CHECK((five.sigma * five.inverse - Eigen::MatrixXd::Identity(5, 5)).norm() < 1e-12);
    const double lu_det = Eigen::FullPivLU<Eigen::MatrixXd>(five.sigma).determinant();
    CHECK(five.det == doctest::Approx(lu_det).epsilon(1e-12));
    CHECK(five.one_inv_one ==
          doctest::Approx((Eigen::VectorXd::Ones(5).transpose() * five.inverse * Eigen::VectorXd::Ones(5))(0))
              .epsilon(1e-12));
}

TEST_CASE("sherman-morrison inverse matches dense inversion on random parameters") {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u01(0.05, 0.95);
    std::uniform_int_distribution<int> mdist(1, 8), pdist(2, 40);
    for (int trial = 0; trial < 100; ++trial) {
        const int m = mdist(rng), p = pdist(rng);
        const double xi = u01(rng);
        const CovarianceModel cm = base_covariance(m, xi, p);
        const Eigen::MatrixXd dense_inv = cm.sigma.fullPivLu().inverse();
        CHECK((cm.inverse - dense_inv).norm() < 1e-10);
    }
}

TEST_CASE("perturbation bounds bracket the spectrum") {
    // eta = 0: the exact eigenvalues are 1 - xi^p and 1 + (m-1) xi^p
    const int m = 4, p = 7;
    const double xi = 0.7, rho = std::pow(xi, p);
    const PerturbationBounds b0 = perturbation_bounds(m, xi, 0.0, p);
    CHECK(b0.lambda_min_lb <= 1.0 - rho);
    CHECK(b0.lambda_max_ub >= 1.0 + (m - 1) * rho);
    CHECK(b0.pd_flag);

    // the reported pd condition is the sharp lemma form
    const PerturbationBounds b1 = perturbation_bounds(3, 0.8, 0.1, 20);
    const double sharp = (1.0 - std::pow(0.8, 20)) / (3 * 20 * std::pow(0.8, 19));
    CHECK(b1.pd_flag == (0.1 < sharp));
    CHECK(b1.lambda_min_lb == doctest::Approx(1.0 - 2.0 * 3 * 20 * std::pow(0.8, 20)).epsilon(1e-14));

    // random perturbed matrices stay inside [lb, ub]
    std::mt19937_64 rng(17);
    const int mm = 3, pp = 10;
    const double xxi = 0.6, eta = 0.1;
    const PerturbationBounds b = perturbation_bounds(mm, xxi, eta, pp);
    std::uniform_real_distribution<double> ue(0.0, eta);
    const MogpParams params{mm, 1.0, xxi, eta, 0.0, pp};
    for (int trial = 0; trial < 100; ++trial) {
        std::vector<double> etas(3);
        for (auto& e : etas) e = ue(rng);
        const Eigen::MatrixXd sigma = perturbed_covariance(params, etas);
        const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sigma);
        CHECK(es.eigenvalues().minCoeff() >= b.lambda_min_lb - 1e-12);
        CHECK(es.eigenvalues().maxCoeff() <= b.lambda_max_ub + 1e-12);
    }
}

TEST_CASE("psi exponent closed form") {
    // large p with xi fixed < 1 kills the correction; eta, 1-xi small kill the entropy
    const MogpParams tail{3, 0.7, 0.01, 1e-9, 0.0, 4000};
    const double psi_tail = psi_exponent(tail);
    CHECK(psi_tail == doctest::Approx(1.0 + 3 * bounds::binary_entropy((1.0 - 0.01 + 1e-9) / 2.0) -
                                      3 * 0.49).epsilon(1e-9));

    const MogpParams pt{1, 1.5, 0.9, 0.05, 0.0, 30};
    const long double h = [] {
        const long double q = (1.0L - 0.9L + 0.05L) / 2.0L;
        return (-q * std::log(q) - (1.0L - q) * std::log(1.0L - q)) / std::log(2.0L);
    }();
    const long double direct = 1.0L + h - 1.5L * 1.5L / (1.0L + 2.0L * 30.0L * std::pow(0.9L, 30));
    CHECK(psi_exponent(pt) == doctest::Approx(static_cast<double>(direct)).epsilon(1e-12));

    // linear in c with slope m
    const MogpParams base{4, 0.6, 0.99, 0.001, 0.0, 100};
    MogpParams bumped = base;
    bumped.c_rate = 0.03;
    CHECK(psi_exponent(bumped) - psi_exponent(base) == doctest::Approx(4 * 0.03).epsilon(1e-12));
}

TEST_CASE("tuner output makes psi negative with the promised margin") {
    const TuneResult r = tune_mogp(4, 0.6);
    const double delta = 4 * 0.36 - 1.0;
    CHECK(r.psi <= -delta / 8.0);
    CHECK(psi_exponent({4, 0.6, r.xi, r.eta, r.c_rate, r.p_star}) == r.psi);
    CHECK(r.eta < r.xi);
    CHECK(perturbation_bounds(4, r.xi, r.eta, r.p_star).pd_flag);

    CHECK_THROWS_AS(tune_mogp(4, 0.5), std::invalid_argument);  // gamma = 1/sqrt(m) boundary
}

TEST_CASE("probability upper bound reduces and dominates") {
    // m = 1: the display contracts to x phi(x) = x^2 * (scalar gaussian upper tail)
    const int n = 12;
    const MogpParams p1{1, 0.8, 0.9, 0.0, 0.0, 10};
    const double x = 0.8 * std::sqrt(2.0 * n * std::numbers::ln2);
    const double scalar_upper = tails::gauss_tail_bounds(x).upper;
    CHECK(probability_upper_bound(p1, {}, n) ==
          doctest::Approx(std::log2(scalar_upper) + 2.0 * std::log2(x)).epsilon(1e-12));

    // etas = 0: the quadratic term uses 1'Sigma^{-1}1 = m/(1-xi^p+m xi^p) exactly
    const MogpParams p3{3, 0.7, 0.85, 0.05, 0.0, 9};
    const CovarianceModel cm = base_covariance(3, 0.85, 9);
    const double got = probability_upper_bound(p3, {0.0, 0.0, 0.0}, 10);
    double log2_det = std::log2(cm.det);
    double expect = 0.5 * 3 * std::log2(10.0) + 3 * std::log2(0.7 * std::sqrt(std::numbers::ln2 / M_PI)) -
                    0.5 * log2_det - 0.7 * 0.7 * 10 * cm.one_inv_one;
    for (int i = 0; i < 3; ++i) expect += std::log2(cm.one_inv_one / 3.0);
    CHECK(got == doctest::Approx(expect).epsilon(1e-10));

    // the bound dominates a Monte-Carlo orthant estimate
    std::mt19937_64 rng(23);
    std::uniform_real_distribution<double> ue(0.0, 0.05);
    const int nn = 8, m = 2;
    const MogpParams pm{m, 0.5, 0.85, 0.05, 0.0, 9};
    for (int trial = 0; trial < 5; ++trial) {
        std::vector<double> etas{ue(rng)};
        const Eigen::MatrixXd sigma = perturbed_covariance(pm, etas);
        const double t = 0.5 * std::sqrt(2.0 * nn * std::numbers::ln2);
        const auto mc = tails::mc_orthant(sigma, Eigen::VectorXd::Constant(m, t), 1'000'000,
                                          static_cast<std::uint64_t>(trial));
        const double bound = std::exp2(probability_upper_bound(pm, etas, nn));
        CHECK(bound >= mc.estimate - 4.0 * mc.stderr_est);
    }
}

TEST_CASE("one' Sigma(eta)^{-1} one is bounded below by m/(1+2mp xi^p)") {
    std::mt19937_64 rng(31);
    const MogpParams pm{4, 1.0, 0.8, 0.05, 0.0, 12};
    std::uniform_real_distribution<double> ue(0.0, 0.05);
    const double floor_val = 4.0 / (1.0 + 2.0 * 4 * 12 * std::pow(0.8, 12));
    for (int trial = 0; trial < 1000; ++trial) {
        std::vector<double> etas(6);
        for (auto& e : etas) e = ue(rng);
        const Eigen::MatrixXd sigma = perturbed_covariance(pm, etas);
        const Eigen::VectorXd w = sigma.llt().solve(Eigen::VectorXd::Ones(4));
        CHECK(w.sum() >= floor_val - 1e-12);
    }
}

TEST_CASE("empirical search corner cases") {
    // unreachable energy level: no tuples at all
    const SearchResult none = empirical_mogp_search(8, 6, 2, 10.0, 0.5, 0.25, {0.0, 0.5}, 3);
    CHECK(none.count == 0);
    CHECK(none.coverage == 1.0);

    // m = 1 with the vacuous overlap window counts exactly the level set S(gamma)
    const double gamma = 0.6;
    const SearchResult solo = empirical_mogp_search(10, 8, 1, gamma, 1.0, 1.0, {0.0}, 7);
    const auto base = disorder::build_energy_table(10, 8, derive_seed(7, 0), disorder::Mode::RemLimit);
    const auto s = landscape::level_set(base, gamma, std::numeric_limits<double>::infinity(),
                                        landscape::Unit::SqrtTwoLnTwo);
    CHECK(solo.count == s.size());

    // sampled mode reports its coverage
    const SearchResult sampled =
        empirical_mogp_search(14, 8, 2, 0.9, 0.9, 0.05, {0.0}, 5, disorder::Mode::RemLimit, 100000);
    CHECK(sampled.tuples_examined == 100000.0);
    CHECK(sampled.coverage == doctest::Approx(100000.0 / std::pow(2.0, 28)));
}

TEST_CASE("slepian direction: correlated angles never beat the zero-angle tail") {
    // joint law of the interpolated energies for a nonnegative-overlap tuple
    const int n = 8, p = 3;
    std::mt19937_64 rng(13);
    std::uniform_int_distribution<std::uint32_t> word(0, 255);
    std::uniform_real_distribution<double> angle(0.0, M_PI / 2);
    int checked = 0;
    while (checked < 10) {
        const SpinConfig a{word(rng), n}, b{word(rng), n};
        if (overlap(a, b) < 0.0) continue;
        ++checked;
        const std::vector<SpinConfig> tuple{a, b};
        const std::vector<double> taus{angle(rng), angle(rng)};
        const Eigen::MatrixXd at_tau = ensemble_covariance(tuple, taus, p);
        const Eigen::MatrixXd at_zero = ensemble_covariance(tuple, {0.0, 0.0}, p);
        const double t = 1.2;
        const auto mc_tau = tails::mc_orthant(at_tau, Eigen::VectorXd::Constant(2, t), 400000, 1);
        const auto mc_zero = tails::mc_orthant(at_zero, Eigen::VectorXd::Constant(2, t), 400000, 2);
        CHECK(mc_tau.estimate <= mc_zero.estimate + 4.0 * (mc_tau.stderr_est + mc_zero.stderr_est));
    }
}
