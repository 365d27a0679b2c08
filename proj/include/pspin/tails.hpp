#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Core>

#include "pspin/parallel.hpp"
#include "pspin/rng.hpp"

// Numeric forms of the probabilistic bounds the proofs lean on, plus the
// Monte-Carlo oracle that sandwich-tests them.
namespace pspin::tails {

struct TailSandwich {
    double lower = 0.0;
    double upper = 1.0;
    std::optional<double> estimate;
    std::string at;
};

inline double normal_density(double x) { return std::exp(-0.5 * x * x) / std::sqrt(2.0 * M_PI); }

// phi(x)(1/x - 1/x^3) <= P[N(0,1) >= x] <= phi(x)/x; lower clamped at 0.
inline TailSandwich gauss_tail_bounds(double x) {
    if (!(x > 0.0)) throw std::invalid_argument("gauss_tail_bounds: x must be positive");
    TailSandwich s;
    const double phi = normal_density(x);
    s.upper = phi / x;
    s.lower = std::max(0.0, phi * (1.0 / x - 1.0 / (x * x * x)));
    s.at = "x=" + std::to_string(x);
    return s;
}

// P[Z > t, Z_rho > t] <= (1+rho)^2 / (2 pi t^2 sqrt(1-rho^2)) exp(-t^2/(1+rho))
inline double bivariate_tail_bound(double t, double rho) {
    if (!(t > 0.0)) throw std::invalid_argument("bivariate_tail_bound: t must be positive");
    if (!(rho > -1.0 && rho < 1.0)) throw std::invalid_argument("bivariate_tail_bound: |rho| >= 1");
    const double one_rho = 1.0 + rho;
    return one_rho * one_rho / (2.0 * M_PI * t * t * std::sqrt(1.0 - rho * rho)) *
           std::exp(-t * t / one_rho);
}

// Two-sided closed-form bracket on P[X >= t] for X ~ N(0, Sigma), valid when
// Sigma^{-1} t > 0 entrywise:
//   upper = phi_X(t) prod_i 1/(Sigma^{-1}t)_i
//   lower = upper * (1 - <1/(Sigma^{-1}t), Sigma^{-1}(1/(Sigma^{-1}t))>), clamped at 0.
inline TailSandwich savage_bounds(const Eigen::MatrixXd& sigma, const Eigen::VectorXd& t) {
    const int d = static_cast<int>(sigma.rows());
    if (sigma.cols() != d || t.size() != d) throw std::invalid_argument("savage_bounds: shape mismatch");
    const Eigen::LLT<Eigen::MatrixXd> llt(sigma);
    if (llt.info() != Eigen::Success) throw std::invalid_argument("savage_bounds: Sigma not positive definite");
    const Eigen::VectorXd w = llt.solve(t);
    if ((w.array() <= 0.0).any())
        throw std::invalid_argument("savage_bounds: Sigma^{-1} t not entrywise positive");

    double log_det = 0.0;
    for (int i = 0; i < d; ++i) log_det += 2.0 * std::log(llt.matrixLLT()(i, i));
    const double log_phi = -0.5 * d * std::log(2.0 * M_PI) - 0.5 * log_det - 0.5 * t.dot(w);

    TailSandwich s;
    double log_upper = log_phi;
    for (int i = 0; i < d; ++i) log_upper -= std::log(w[i]);
    s.upper = std::exp(log_upper);
    const Eigen::VectorXd u = w.cwiseInverse();
    s.lower = std::max(0.0, s.upper * (1.0 - u.dot(llt.solve(u))));
    s.at = "d=" + std::to_string(d);
    return s;
}

// (1-theta)^2 mean^2 / second_moment <= P[Z > theta E Z]
inline double paley_zygmund(double mean, double second_moment, double theta) {
    if (!(mean >= 0.0)) throw std::invalid_argument("paley_zygmund: mean < 0");
    if (!(second_moment > 0.0)) throw std::invalid_argument("paley_zygmund: second moment <= 0");
    if (!(theta >= 0.0 && theta <= 1.0)) throw std::invalid_argument("paley_zygmund: theta outside [0,1]");
    if (second_moment < mean * mean * (1.0 - 1e-12))
        throw std::invalid_argument("paley_zygmund: second moment below mean^2 (corrupted inputs)");
    return (1.0 - theta) * (1.0 - theta) * mean * mean / second_moment;
}

struct McResult {
    double estimate = 0.0;
    double stderr_est = 0.0;
};

// Plain Monte-Carlo orthant estimate of P[X >= t entrywise], X ~ N(0, Sigma),
// with antithetic pairs. Every variate is a pure function of (seed, sample
// index), so the estimate is independent of the worker partition.
inline McResult mc_orthant(const Eigen::MatrixXd& sigma, const Eigen::VectorXd& t,
                           std::uint64_t samples, std::uint64_t seed) {
    const int d = static_cast<int>(sigma.rows());
    if (sigma.cols() != d || t.size() != d) throw std::invalid_argument("mc_orthant: shape mismatch");
    if (d > 32) throw std::invalid_argument("mc_orthant: dimension cap is 32");
    if (samples < 10'000) throw std::invalid_argument("mc_orthant: need at least 1e4 samples");
    const Eigen::LLT<Eigen::MatrixXd> llt(sigma);
    if (llt.info() != Eigen::Success) throw std::runtime_error("mc_orthant: factorization failure");
    const Eigen::MatrixXd lower = llt.matrixL();

    const std::uint64_t pairs = (samples + 1) / 2;
    constexpr std::uint64_t block = 8192;
    const std::uint64_t nblocks = (pairs + block - 1) / block;
    std::vector<std::uint64_t> hit(nblocks, 0), hit_sq(nblocks, 0);

    parallel::for_range(0, nblocks, [&](std::size_t b) {
        Eigen::VectorXd z(d), x(d);
        std::uint64_t h = 0, h2 = 0;
        const std::uint64_t lo = static_cast<std::uint64_t>(b) * block;
        const std::uint64_t hi = std::min(pairs, lo + block);
        for (std::uint64_t s = lo; s < hi; ++s) {
            for (int j = 0; j < d; ++j)
                z[j] = standard_normal(seed, StreamDomain::MonteCarlo, s * 32 + static_cast<std::uint64_t>(j));
            x.noalias() = lower * z;
            std::uint64_t a = 0;
            if ((x.array() >= t.array()).all()) ++a;
            if (((-x).array() >= t.array()).all()) ++a;
            h += a;
            h2 += a * a;
        }
        hit[b] = h;
        hit_sq[b] = h2;
    });

    std::uint64_t sum = 0, sum_sq = 0;
    for (std::uint64_t b = 0; b < nblocks; ++b) {
        sum += hit[b];
        sum_sq += hit_sq[b];
    }
    McResult r;
    const double s1 = static_cast<double>(sum) / 2.0;
    const double np = static_cast<double>(pairs);
    r.estimate = s1 / np;
    const double mean_pair = s1 / np;                                    // mean of a/2
    const double mean_sq = static_cast<double>(sum_sq) / (4.0 * np);     // mean of (a/2)^2
    const double var = std::max(0.0, mean_sq - mean_pair * mean_pair);
    r.stderr_est = std::sqrt(var / np);
    return r;
}

} // namespace pspin::tails
