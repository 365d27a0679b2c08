#pragma once

#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "pspin/disorder.hpp"
#include "pspin/landscape.hpp"
#include "pspin/parallel.hpp"
#include "pspin/spin.hpp"

namespace pspin::gibbs {

inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// log sum over selected indices of exp(beta n H_i), max-shifted. All
// summation goes through the fixed pairwise tree, so the value is bit-stable
// across worker counts.
template <class Pred>
double log_sum_exp_over(const disorder::EnergyTable& table, double beta, const Pred& in) {
    const double bn = beta * table.n;
    double shift = kNegInf;
    for (std::size_t i = 0; i < table.size(); ++i)
        if (in(i)) shift = std::max(shift, bn * table.energies[static_cast<Eigen::Index>(i)]);
    if (shift == kNegInf) return kNegInf;
    const double sum = parallel::pairwise_sum_parallel(0, table.size(), [&](std::size_t i) {
        return in(i) ? std::exp(bn * table.energies[static_cast<Eigen::Index>(i)] - shift) : 0.0;
    });
    return shift + std::log(sum);
}

inline double log_partition(const disorder::EnergyTable& table, double beta) {
    if (beta < 0.0) throw std::invalid_argument("log_partition: beta < 0");
    if (beta == 0.0) return table.n * std::numbers::ln2;
    return log_sum_exp_over(table, beta, [](std::size_t) { return true; });
}

// Z_beta[k1, k2]: band bounds in units of sqrt(2 ln 2), both ends closed.
inline double restricted_log_partition(const disorder::EnergyTable& table, double beta,
                                       double kappa1, double kappa2) {
    if (kappa1 > kappa2) throw std::invalid_argument("restricted_log_partition: kappa1 > kappa2");
    const double lo = kappa1 * kSqrt2Ln2;
    const double hi = kappa2 * kSqrt2Ln2;
    return log_sum_exp_over(table, beta, [&](std::size_t i) {
        const double e = table.energies[static_cast<Eigen::Index>(i)];
        return e >= lo && e <= hi;
    });
}

struct GibbsContext {
    const disorder::EnergyTable* table = nullptr;
    double beta = 0.0;
    double log_z = 0.0;
};

inline GibbsContext make_context(const disorder::EnergyTable& table, double beta) {
    return {&table, beta, log_partition(table, beta)};
}

inline double gibbs_mass(const GibbsContext& ctx, const std::vector<SpinConfig>& members) {
    const disorder::EnergyTable& t = *ctx.table;
    const double bn = ctx.beta * t.n;
    if (members.empty()) return 0.0;
    double shift = kNegInf;
    for (const auto& c : members) {
        if (c.n != t.n) throw std::invalid_argument("gibbs_mass: member dimension mismatch");
        shift = std::max(shift, bn * t.energies[c.bits]);
    }
    const double sum = parallel::pairwise_sum(0, members.size(), [&](std::size_t i) {
        return std::exp(bn * t.energies[members[i].bits] - shift);
    });
    return std::exp(shift + std::log(sum) - ctx.log_z);
}

// Gibbs mass of D = {|H/sqrt(2 ln 2) - gamma*| <= kappa} and its complement,
// gamma* = beta/sqrt(2 ln 2).
inline std::pair<double, double> band_dominance(const disorder::EnergyTable& table, double beta, double kappa) {
    if (!(beta >= 0.0)) throw std::invalid_argument("band_dominance: beta must be nonnegative");
    if (!(kappa > 0.0 && kappa < 1.0 / std::numbers::sqrt2))
        throw std::invalid_argument("band_dominance: kappa outside (0, 1/sqrt 2)");
    const double gamma_star = beta / kSqrt2Ln2;
    const double lo = (gamma_star - kappa) * kSqrt2Ln2;
    const double hi = (gamma_star + kappa) * kSqrt2Ln2;
    const double log_z = log_partition(table, beta);
    const auto in_band = [&](std::size_t i) {
        const double e = table.energies[static_cast<Eigen::Index>(i)];
        return e >= lo && e <= hi;
    };
    const double lz_in = log_sum_exp_over(table, beta, in_band);
    const double lz_out = log_sum_exp_over(table, beta, [&](std::size_t i) { return !in_band(i); });
    const double mass_in = lz_in == kNegInf ? 0.0 : std::exp(lz_in - log_z);
    const double mass_out = lz_out == kNegInf ? 0.0 : std::exp(lz_out - log_z);
    return {mass_in, mass_out};
}

// <H>_mu, for the free-energy derivative identity d(log Z)/d(beta n) = <H>
inline double mean_energy(const disorder::EnergyTable& table, double beta) {
    const double bn = beta * table.n;
    double shift = kNegInf;
    for (std::size_t i = 0; i < table.size(); ++i)
        shift = std::max(shift, bn * table.energies[static_cast<Eigen::Index>(i)]);
    const double z = parallel::pairwise_sum(0, table.size(), [&](std::size_t i) {
        return std::exp(bn * table.energies[static_cast<Eigen::Index>(i)] - shift);
    });
    const double hz = parallel::pairwise_sum(0, table.size(), [&](std::size_t i) {
        const double e = table.energies[static_cast<Eigen::Index>(i)];
        return e * std::exp(bn * e - shift);
    });
    return hz / z;
}

} // namespace pspin::gibbs
