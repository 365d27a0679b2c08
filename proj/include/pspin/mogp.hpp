#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Core>

#include "pspin/bounds.hpp"
#include "pspin/disorder.hpp"
#include "pspin/rng.hpp"
#include "pspin/spin.hpp"

// Machinery for the symmetric ensemble m-OGP: the equicorrelated covariance
// algebra, the Psi exponent bounding the expected number of admissible
// m-tuples, its parameter tuner, and a desk-scale empirical tuple search.
namespace pspin::mogp {

struct MogpParams {
    int m = 2;             // tuple size
    double gamma = 1.0;    // optimality level, > 1/sqrt(m)
    double xi = 0.9;       // overlap target, in (0,1)
    double eta = 0.0;      // overlap window width, in [0, xi)
    double c_rate = 0.0;   // log2|I|/n budget for the angle set
    int p = 2;

    void validate() const {
        if (m < 1) throw std::invalid_argument("MogpParams: m < 1");
        if (!(xi > 0.0 && xi < 1.0)) throw std::invalid_argument("MogpParams: xi outside (0,1)");
        if (!(eta >= 0.0 && eta < xi)) throw std::invalid_argument("MogpParams: need 0 <= eta < xi");
        if (!(c_rate >= 0.0)) throw std::invalid_argument("MogpParams: c_rate < 0");
        if (p < 2) throw std::invalid_argument("MogpParams: p < 2");
    }
};

struct CovarianceModel {
    Eigen::MatrixXd sigma;
    Eigen::MatrixXd inverse;
    double det = 1.0;
    double lambda_min_lb = 1.0;
    double lambda_max_ub = 1.0;
    double one_inv_one = 1.0;  // 1' Sigma^{-1} 1 = m/(1 - xi^p + m xi^p)
};

// Sigma = (1-xi^p) I + xi^p 11'; determinant and inverse in closed form via
// the rank-one update formula.
inline CovarianceModel base_covariance(int m, double xi, int p) {
    if (m < 1 || p < 2 || !(xi > 0.0 && xi < 1.0)) throw std::invalid_argument("base_covariance: bad arguments");
    const double rho = std::pow(xi, p);
    if (1.0 - rho == 0.0) throw std::invalid_argument("base_covariance: xi^p numerically 1 (degenerate)");
    CovarianceModel cm;
    cm.sigma = (1.0 - rho) * Eigen::MatrixXd::Identity(m, m) + rho * Eigen::MatrixXd::Ones(m, m);
    cm.det = std::pow(1.0 - rho, m - 1) * (1.0 + (m - 1) * rho);
    const double off = rho / ((1.0 - rho) * (1.0 + (m - 1) * rho));
    cm.inverse = Eigen::MatrixXd::Identity(m, m) / (1.0 - rho) - off * Eigen::MatrixXd::Ones(m, m);
    const double spread = 2.0 * m * p * rho;
    cm.lambda_min_lb = 1.0 - spread;
    cm.lambda_max_ub = 1.0 + spread;
    cm.one_inv_one = m / (1.0 - rho + m * rho);
    return cm;
}

struct PerturbationBounds {
    double lambda_min_lb = 0.0;  // >= 1 - 2 m p xi^p for any |eta| <= eta < xi
    double lambda_max_ub = 0.0;  // <= 1 + 2 m p xi^p
    bool pd_flag = false;        // eta < (1 - xi^p) / (m p xi^{p-1})
};

inline PerturbationBounds perturbation_bounds(int m, double xi, double eta, int p) {
    if (!(eta >= 0.0 && eta < xi && xi < 1.0)) throw std::invalid_argument("perturbation_bounds: need 0 <= eta < xi < 1");
    PerturbationBounds b;
    const double rho = std::pow(xi, p);
    b.lambda_min_lb = 1.0 - 2.0 * m * p * rho;
    b.lambda_max_ub = 1.0 + 2.0 * m * p * rho;
    b.pd_flag = eta < (1.0 - rho) / (m * p * std::pow(xi, p - 1));
    return b;
}

// Psi = 1 + m h((1-xi+eta)/2) - m gamma^2/(1 + 2 m p xi^p) + c m, in bits.
// E[#admissible m-tuples] <= 2^{n Psi + O(log n)}; negative Psi certifies the
// m-OGP by the first moment method.
inline double psi_exponent(const MogpParams& params) {
    params.validate();
    const double rho = std::pow(params.xi, params.p);
    return 1.0 + params.m * bounds::binary_entropy((1.0 - params.xi + params.eta) / 2.0) -
           params.m * params.gamma * params.gamma / (1.0 + 2.0 * params.m * params.p * rho) +
           params.c_rate * params.m;
}

struct TuneResult {
    double xi = 0.0;
    double eta = 0.0;
    double c_rate = 0.0;
    int p_star = 0;
    double psi = 0.0;
};

// Deterministic instantiation of the "make Psi negative" recipe: with
// delta = m gamma^2 - 1 > 0, pick (xi, eta) so the entropy term is <= delta/4,
// c = delta/(8m), and the smallest p on the decreasing tail of p xi^p with
// m gamma^2/(1+2mp xi^p) >= 1 + delta/2; then Psi <= -delta/8.
inline TuneResult tune_mogp(int m, double gamma) {
    if (m < 1) throw std::invalid_argument("tune_mogp: m < 1");
    const double delta = m * gamma * gamma - 1.0;
    if (!(delta > 0.0)) throw std::invalid_argument("tune_mogp: need gamma > 1/sqrt(m)");

    double xi = 0.0, eta = 0.0;
    bool found = false;
    for (int j = 0; j < 40 && !found; ++j) {
        const double cand_xi = 1.0 - 0.01 * std::pow(0.5, j);
        for (int k = 1; k <= 60; ++k) {
            const double cand_eta = cand_xi * std::pow(0.5, k);
            if (m * bounds::binary_entropy((1.0 - cand_xi + cand_eta) / 2.0) <= delta / 4.0) {
                xi = cand_xi;
                eta = cand_eta;
                found = true;
                break;
            }
        }
    }
    if (!found) throw std::runtime_error("tune_mogp: entropy condition unreachable on the grid");

    const double c = delta / (8.0 * m);
    const double theta = m * gamma * gamma / (1.0 + delta / 2.0) - 1.0;  // need 2 m p xi^p <= theta
    const auto cond = [&](long p) { return 2.0 * m * p * std::pow(xi, static_cast<double>(p)) <= theta; };

    const long peak = std::max<long>(2, static_cast<long>(std::ceil(-1.0 / std::log(xi))));
    long p_star;
    if (cond(peak)) {
        p_star = 2;  // p xi^p is below its peak everywhere, so every p works
    } else {
        long hi = peak;
        while (!cond(hi)) {
            hi *= 2;
            if (hi > (1L << 40)) throw std::runtime_error("tune_mogp: p search did not terminate");
        }
        long lo = peak;  // cond false at lo, true at hi; monotone on the tail
        while (hi - lo > 1) {
            const long mid = lo + (hi - lo) / 2;
            (cond(mid) ? hi : lo) = mid;
        }
        p_star = hi;
    }

    // shrink eta until the perturbed covariance is certifiably PD at p_star
    // (only makes the entropy condition easier)
    while (!perturbation_bounds(m, xi, eta, static_cast<int>(p_star)).pd_flag) eta /= 2.0;

    TuneResult r;
    r.xi = xi;
    r.eta = eta;
    r.c_rate = c;
    r.p_star = static_cast<int>(p_star);
    r.psi = psi_exponent({m, gamma, xi, eta, c, r.p_star});
    return r;
}

// Covariance of the m energies at pairwise overlap shortfalls etas
// (row-major upper triangle, length m(m-1)/2): off-diagonal (xi - eta_kl)^p.
inline Eigen::MatrixXd perturbed_covariance(const MogpParams& params, const std::vector<double>& etas) {
    const int m = params.m;
    if (etas.size() != static_cast<std::size_t>(m) * (m - 1) / 2)
        throw std::invalid_argument("perturbed_covariance: etas length != m(m-1)/2");
    Eigen::MatrixXd sigma = Eigen::MatrixXd::Identity(m, m);
    std::size_t idx = 0;
    for (int k = 0; k < m; ++k)
        for (int l = k + 1; l < m; ++l, ++idx) {
            if (!(etas[idx] >= 0.0 && etas[idx] <= params.eta + 1e-15))
                throw std::invalid_argument("perturbed_covariance: eta_kl outside [0, eta]");
            sigma(k, l) = sigma(l, k) = std::pow(params.xi - etas[idx], params.p);
        }
    return sigma;
}

// log2 of the first-moment probability bound for one tuple:
// n^{m/2} (gamma sqrt(ln2/pi))^m prod_i (Sigma(eta)^{-1} 1)_i
// |Sigma(eta)|^{-1/2} 2^{-gamma^2 n 1'Sigma(eta)^{-1} 1}.
inline double probability_upper_bound(const MogpParams& params, const std::vector<double>& etas, int n) {
    params.validate();
    if (n < 1) throw std::invalid_argument("probability_upper_bound: n < 1");
    const Eigen::MatrixXd sigma = perturbed_covariance(params, etas);
    const Eigen::LLT<Eigen::MatrixXd> llt(sigma);
    if (llt.info() != Eigen::Success)
        throw std::invalid_argument("probability_upper_bound: Sigma(eta) not positive definite");
    const Eigen::VectorXd w = llt.solve(Eigen::VectorXd::Ones(params.m));
    if ((w.array() <= 0.0).any())
        throw std::invalid_argument("probability_upper_bound: Sigma(eta)^{-1} 1 not entrywise positive");

    double log2_det = 0.0;
    const auto& lmat = llt.matrixLLT();
    for (int i = 0; i < params.m; ++i) log2_det += 2.0 * std::log2(lmat(i, i));

    const double m = params.m;
    double log2_bound = 0.5 * m * std::log2(static_cast<double>(n)) +
                        m * std::log2(params.gamma * std::sqrt(bounds::kLn2 / M_PI)) - 0.5 * log2_det -
                        params.gamma * params.gamma * n * w.sum();
    for (int i = 0; i < params.m; ++i) log2_bound += std::log2(w[i]);
    return log2_bound;
}

// Covariance of (sqrt(n) H(sigma^(t), Jhat^(t)(tau_t)))_t for a config tuple:
// diag 1, off-diagonal cos(tau_k) cos(tau_l) (overlap_kl)^p.
inline Eigen::MatrixXd ensemble_covariance(const std::vector<SpinConfig>& configs,
                                           const std::vector<double>& taus, int p) {
    const int m = static_cast<int>(configs.size());
    if (taus.size() != configs.size()) throw std::invalid_argument("ensemble_covariance: tau/config mismatch");
    Eigen::MatrixXd sigma = Eigen::MatrixXd::Identity(m, m);
    for (int k = 0; k < m; ++k)
        for (int l = k + 1; l < m; ++l)
            sigma(k, l) = sigma(l, k) =
                std::cos(taus[static_cast<std::size_t>(k)]) * std::cos(taus[static_cast<std::size_t>(l)]) *
                std::pow(overlap(configs[static_cast<std::size_t>(k)], configs[static_cast<std::size_t>(l)]), p);
    return sigma;
}

struct SearchResult {
    std::uint64_t count = 0;
    double tuples_examined = 0.0;
    double coverage = 1.0;
};

// Desk-scale search for admissible m-tuples: per-slot interpolated instances
// Jhat^(t)(tau) = cos(tau) J^(0) + sin(tau) J^(t); by linearity the
// interpolated energies equal cos(tau) H_0(sigma) + sin(tau) H_t(sigma), so
// the m+1 tables carry the whole ensemble. A tuple is admissible when every
// slot clears gamma sqrt(2 ln 2) at some angle and all pairwise overlaps lie
// in [xi - eta, xi]. Count 0 is the OGP-consistent outcome.
inline SearchResult empirical_mogp_search(int n, int p, int m, double gamma, double xi, double eta,
                                          const std::vector<double>& angles, std::uint64_t seed,
                                          disorder::Mode mode = disorder::Mode::RemLimit,
                                          std::uint64_t sample_budget = 1u << 22) {
    if (m < 1) throw std::invalid_argument("empirical_mogp_search: m < 1");
    if (angles.empty()) throw std::invalid_argument("empirical_mogp_search: empty angle set");
    if (angles.size() > 64) throw std::invalid_argument("empirical_mogp_search: |I| > 64 (desk-scale cap)");

    std::vector<disorder::EnergyTable> fresh;
    const disorder::EnergyTable base = disorder::build_energy_table(n, p, derive_seed(seed, 0), mode);
    fresh.reserve(static_cast<std::size_t>(m));
    for (int t = 1; t <= m; ++t)
        fresh.push_back(disorder::build_energy_table(n, p, derive_seed(seed, static_cast<std::uint64_t>(t)), mode));

    const std::size_t space = std::size_t{1} << n;
    const double threshold = gamma * kSqrt2Ln2;
    // best interpolated energy per (slot, config) over the angle set
    std::vector<std::vector<std::uint32_t>> qualify(static_cast<std::size_t>(m));
    for (int t = 0; t < m; ++t) {
        for (std::size_t c = 0; c < space; ++c) {
            double best = -std::numeric_limits<double>::infinity();
            for (const double tau : angles) {
                const double e = std::cos(tau) * base.energies[static_cast<Eigen::Index>(c)] +
                                 std::sin(tau) * fresh[static_cast<std::size_t>(t)].energies[static_cast<Eigen::Index>(c)];
                best = std::max(best, e);
            }
            if (best >= threshold) qualify[static_cast<std::size_t>(t)].push_back(static_cast<std::uint32_t>(c));
        }
    }

    const auto overlap_ok = [&](std::uint32_t a, std::uint32_t b) {
        const double ov = 1.0 - 2.0 * static_cast<double>(hamming_bits(a, b)) / n;
        return ov >= xi - eta && ov <= xi;
    };

    SearchResult res;
    if (static_cast<std::uint64_t>(m) * static_cast<std::uint64_t>(n) <= 24) {
        // exhaustive over the full tuple space, pruned through qualify lists
        res.tuples_examined = std::pow(2.0, m * n);
        res.coverage = 1.0;
        std::vector<std::uint32_t> pick(static_cast<std::size_t>(m));
        const auto dfs = [&](auto&& self, int slot) -> std::uint64_t {
            if (slot == m) return 1;
            std::uint64_t total = 0;
            for (const std::uint32_t c : qualify[static_cast<std::size_t>(slot)]) {
                bool ok = true;
                for (int s = 0; s < slot && ok; ++s) ok = overlap_ok(pick[static_cast<std::size_t>(s)], c);
                if (!ok) continue;
                pick[static_cast<std::size_t>(slot)] = c;
                total += self(self, slot + 1);
            }
            return total;
        };
        res.count = dfs(dfs, 0);
    } else {
        const double total_space = std::pow(2.0, m * n);
        res.tuples_examined = static_cast<double>(sample_budget);
        res.coverage = static_cast<double>(sample_budget) / total_space;
        std::vector<std::vector<bool>> is_qual(static_cast<std::size_t>(m), std::vector<bool>(space, false));
        for (int t = 0; t < m; ++t)
            for (const std::uint32_t c : qualify[static_cast<std::size_t>(t)]) is_qual[static_cast<std::size_t>(t)][c] = true;
        std::uint64_t found = 0;
        for (std::uint64_t s = 0; s < sample_budget; ++s) {
            bool ok = true;
            std::vector<std::uint32_t> tup(static_cast<std::size_t>(m));
            for (int t = 0; t < m && ok; ++t) {
                const auto [r0, r1] = Philox2x64::run(s * 64 + static_cast<std::uint64_t>(t),
                                                      domain_tag(StreamDomain::MonteCarlo) | 1u, seed);
                (void)r1;
                const std::uint32_t c = static_cast<std::uint32_t>(r0 & (space - 1));
                if (!is_qual[static_cast<std::size_t>(t)][c]) ok = false;
                tup[static_cast<std::size_t>(t)] = c;
                for (int q = 0; q < t && ok; ++q) ok = overlap_ok(tup[static_cast<std::size_t>(q)], c);
            }
            if (ok) ++found;
        }
        res.count = found;
    }
    return res;
}

} // namespace pspin::mogp
