#pragma once

#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Core>

#include "pspin/parallel.hpp"
#include "pspin/rng.hpp"
#include "pspin/spin.hpp"

namespace pspin::disorder {

struct budget_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

inline std::uint64_t env_u64(const char* name, std::uint64_t fallback) {
    const char* v = std::getenv(name);
    if (!v || !*v) return fallback;
    return std::strtoull(v, nullptr, 10);
}

// bytes allowed for a materialized tensor
inline std::uint64_t memory_budget() { return env_u64("PSPIN_MEM_BUDGET", 1ull << 32); }
// scalar operations allowed for an exhaustive exact-tensor table
inline std::uint64_t work_budget() { return env_u64("PSPIN_WORK_BUDGET", 10'000'000'000ull); }

inline std::uint64_t pow_u64(std::uint64_t base, int exp) {
    std::uint64_t r = 1;
    for (int i = 0; i < exp; ++i) {
        if (base != 0 && r > std::numeric_limits<std::uint64_t>::max() / base)
            return std::numeric_limits<std::uint64_t>::max();
        r *= base;
    }
    return r;
}

// Order-p Gaussian disorder. Entries are indexed by the flattened ordered
// tuple (i_1,...,i_p), flat = sum_k i_k n^{k-1}, and are pure functions of
// (seed, flat) so Virtual and Materialized storage agree bitwise.
struct CouplingTensor {
    int n = 0;
    int p = 2;
    std::uint64_t seed = 0;
    bool materialized = false;
    Eigen::VectorXd data;  // n^p entries when materialized

    std::uint64_t entry_count() const { return pow_u64(static_cast<std::uint64_t>(n), p); }

    double entry_at_flat(std::uint64_t flat) const {
        if (materialized) return data[static_cast<Eigen::Index>(flat)];
        return standard_normal(seed, StreamDomain::TensorEntry, flat);
    }

    // indices are 0-based, length p
    double entry(const std::vector<int>& idx) const {
        std::uint64_t flat = 0, stride = 1;
        for (int k = 0; k < p; ++k) {
            flat += static_cast<std::uint64_t>(idx[static_cast<std::size_t>(k)]) * stride;
            stride *= static_cast<std::uint64_t>(n);
        }
        return entry_at_flat(flat);
    }
};

inline CouplingTensor generate_tensor(int n, int p, std::uint64_t seed, bool materialize) {
    if (n < 1 || p < 2) throw std::invalid_argument("generate_tensor: need n >= 1, p >= 2");
    CouplingTensor t;
    t.n = n;
    t.p = p;
    t.seed = seed;
    if (materialize) {
        const std::uint64_t count = t.entry_count();
        if (count > memory_budget() / sizeof(double))
            throw budget_error("generate_tensor: materialized tensor exceeds memory budget");
        t.data.resize(static_cast<Eigen::Index>(count));
        double* out = t.data.data();
        parallel::for_range(0, count, [&](std::size_t flat) {
            out[flat] = standard_normal(seed, StreamDomain::TensorEntry, flat);
        });
        t.materialized = true;
    }
    return t;
}

// Contraction <J, sigma^{(x) p}> by repeated mode-folding: view the flat
// tensor as an (n^{k-1} x n) matrix and multiply by sigma, p-1 times.
inline double contract_all_modes(const Eigen::VectorXd& flat, int n, int p, const Eigen::VectorXd& sigma) {
    Eigen::VectorXd cur;
    Eigen::Index rows = flat.size() / n;
    cur.noalias() = Eigen::Map<const Eigen::MatrixXd>(flat.data(), rows, n) * sigma;
    for (int k = p - 1; k >= 2; --k) {
        rows = cur.size() / n;
        Eigen::VectorXd next;
        next.noalias() = Eigen::Map<const Eigen::MatrixXd>(cur.data(), rows, n) * sigma;
        cur.swap(next);
    }
    return cur.dot(sigma);
}

// H(sigma) = n^{-(p+1)/2} sum over all ordered tuples J_{i1..ip} s_{i1}..s_{ip}
inline double energy(const CouplingTensor& t, const SpinConfig& config) {
    if (t.n != config.n) throw std::invalid_argument("energy: dimension mismatch");
    const double scale = std::pow(static_cast<double>(t.n), -0.5 * (t.p + 1));
    const Eigen::VectorXd sigma = config.to_vector();
    if (t.materialized) return scale * contract_all_modes(t.data, t.n, t.p, sigma);

    const std::uint64_t count = t.entry_count();
    if (count == std::numeric_limits<std::uint64_t>::max() || count > work_budget())
        throw budget_error("energy: virtual contraction exceeds work budget");
    std::vector<int> idx(static_cast<std::size_t>(t.p), 0);
    double sum = 0.0;
    for (std::uint64_t flat = 0; flat < count; ++flat) {
        double prod = 1.0;
        for (int k = 0; k < t.p; ++k) prod *= config.spin(idx[static_cast<std::size_t>(k)]);
        sum += t.entry_at_flat(flat) * prod;
        for (int k = 0; k < t.p; ++k) {
            if (++idx[static_cast<std::size_t>(k)] < t.n) break;
            idx[static_cast<std::size_t>(k)] = 0;
        }
    }
    return scale * sum;
}

struct EnsembleAngle {
    double tau = 0.0;
    explicit EnsembleAngle(double t) : tau(t) {
        if (!(t >= 0.0 && t <= M_PI / 2 + 1e-12)) throw std::invalid_argument("EnsembleAngle: tau outside [0, pi/2]");
    }
};

// cos(tau) * base + sin(tau) * fresh, entrywise; marginal variance stays 1.
inline CouplingTensor correlated_tensor(const CouplingTensor& base, const CouplingTensor& fresh,
                                        const EnsembleAngle& angle) {
    if (base.n != fresh.n || base.p != fresh.p) throw std::invalid_argument("correlated_tensor: shape mismatch");
    if (base.seed == fresh.seed) throw std::invalid_argument("correlated_tensor: identical seeds (miswired ensemble)");
    const std::uint64_t count = base.entry_count();
    if (count > memory_budget() / sizeof(double))
        throw budget_error("correlated_tensor: result exceeds memory budget");
    CouplingTensor out;
    out.n = base.n;
    out.p = base.p;
    out.seed = base.seed;
    out.materialized = true;
    out.data.resize(static_cast<Eigen::Index>(count));
    const double c = std::cos(angle.tau), s = std::sin(angle.tau);
    for (std::uint64_t f = 0; f < count; ++f)
        out.data[static_cast<Eigen::Index>(f)] = c * base.entry_at_flat(f) + s * fresh.entry_at_flat(f);
    return out;
}

enum class Mode : std::uint8_t { ExactTensor = 0, GramCholesky = 1, RemLimit = 2 };

inline const char* mode_name(Mode m) {
    switch (m) {
        case Mode::ExactTensor: return "exact";
        case Mode::GramCholesky: return "gram";
        case Mode::RemLimit: return "rem";
    }
    return "?";
}

inline Mode mode_from_name(const std::string& s) {
    if (s == "exact") return Mode::ExactTensor;
    if (s == "gram") return Mode::GramCholesky;
    if (s == "rem") return Mode::RemLimit;
    throw std::invalid_argument("unknown mode: " + s);
}

inline constexpr int kGramCap = 12;

inline Mode select_mode(int n, int p) {
    const std::uint64_t work = pow_u64(2, n);
    if (pow_u64(static_cast<std::uint64_t>(n), p) <= work_budget() / work &&
        work * pow_u64(static_cast<std::uint64_t>(n), p) <= work_budget())
        return Mode::ExactTensor;
    if (n <= kGramCap) return Mode::GramCholesky;
    return Mode::RemLimit;
}

// Exhaustive map config -> H(sigma) for one disorder realization. In every
// mode the marginal law of each entry is N(0, 1/n).
struct EnergyTable {
    int n = 0;
    int p = 2;
    Mode mode = Mode::RemLimit;
    std::uint64_t seed = 0;
    Eigen::VectorXd energies;  // 2^n, indexed by SpinConfig bits

    std::size_t size() const { return static_cast<std::size_t>(energies.size()); }
    SpinConfig config(std::size_t i) const { return {static_cast<std::uint32_t>(i), n}; }
};

inline EnergyTable build_energy_table(int n, int p, std::uint64_t seed, Mode mode) {
    if (n < 1 || n > kMaxSites || p < 2) throw std::invalid_argument("build_energy_table: bad n or p");
    EnergyTable tab;
    tab.n = n;
    tab.p = p;
    tab.mode = mode;
    tab.seed = seed;
    const std::size_t count = std::size_t{1} << n;
    tab.energies.resize(static_cast<Eigen::Index>(count));
    double* out = tab.energies.data();

    switch (mode) {
        case Mode::ExactTensor: {
            const std::uint64_t np = pow_u64(static_cast<std::uint64_t>(n), p);
            if (np == std::numeric_limits<std::uint64_t>::max() || np > work_budget() / count)
                throw budget_error("build_energy_table: exact mode exceeds work budget");
            const CouplingTensor tensor = generate_tensor(n, p, seed, true);
            const double scale = std::pow(static_cast<double>(n), -0.5 * (p + 1));
            parallel::for_range(0, count, [&](std::size_t i) {
                const SpinConfig c{static_cast<std::uint32_t>(i), n};
                out[i] = scale * contract_all_modes(tensor.data, n, p, c.to_vector());
            });
            break;
        }
        case Mode::GramCholesky: {
            if (n > kGramCap) throw budget_error("build_energy_table: gram mode capped at n <= 12");
            const Eigen::Index dim = static_cast<Eigen::Index>(count);
            Eigen::MatrixXd cov(dim, dim);
            parallel::for_range(0, count, [&](std::size_t a) {
                for (std::size_t b = 0; b < count; ++b) {
                    const int d = hamming_bits(static_cast<std::uint32_t>(a), static_cast<std::uint32_t>(b));
                    const double ov = 1.0 - 2.0 * d / static_cast<double>(n);
                    cov(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) =
                        std::pow(ov, p) / static_cast<double>(n);
                }
            });
            // Gram matrix is PSD in exact arithmetic; jitter absorbs rounding.
            cov.diagonal().array() += 1e-10;
            Eigen::LLT<Eigen::MatrixXd> llt(cov);
            if (llt.info() != Eigen::Success)
                throw std::runtime_error("build_energy_table: covariance factorization failed (p too small for jitter policy)");
            const Eigen::MatrixXd lower = llt.matrixL();
            Eigen::VectorXd z(dim);
            for (Eigen::Index i = 0; i < dim; ++i)
                z[i] = standard_normal(seed, StreamDomain::GramNoise, static_cast<std::uint64_t>(i));
            parallel::for_range(0, count, [&](std::size_t i) {
                const Eigen::Index r = static_cast<Eigen::Index>(i);
                out[i] = lower.row(r).head(r + 1).dot(z.head(r + 1));
            });
            break;
        }
        case Mode::RemLimit: {
            const double inv_sqrt_n = 1.0 / std::sqrt(static_cast<double>(n));
            parallel::for_range(0, count, [&](std::size_t i) {
                out[i] = inv_sqrt_n * standard_normal(seed, StreamDomain::RemTable, i);
            });
            break;
        }
    }
    return tab;
}

// --- serialization ------------------------------------------------------
// 16-byte header (magic "PSPN", u16 version, u8 mode, u8 n, u16 p, zero pad),
// u64 seed, then 2^n little-endian f64 energies.

inline void put_u16(std::string& b, std::uint16_t v) {
    b.push_back(static_cast<char>(v & 0xff));
    b.push_back(static_cast<char>(v >> 8));
}

inline void put_u64(std::string& b, std::uint64_t v) {
    for (int i = 0; i < 8; ++i) b.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

inline std::string serialize(const EnergyTable& t) {
    std::string b;
    b.reserve(24 + t.size() * 8);
    b += "PSPN";
    put_u16(b, 1);
    b.push_back(static_cast<char>(static_cast<std::uint8_t>(t.mode)));
    b.push_back(static_cast<char>(static_cast<std::uint8_t>(t.n)));
    put_u16(b, static_cast<std::uint16_t>(t.p));
    for (int i = 0; i < 6; ++i) b.push_back('\0');
    put_u64(b, t.seed);
    for (std::size_t i = 0; i < t.size(); ++i) {
        std::uint64_t bits;
        const double e = t.energies[static_cast<Eigen::Index>(i)];
        std::memcpy(&bits, &e, 8);
        put_u64(b, bits);
    }
    return b;
}

inline EnergyTable deserialize(const std::string& b) {
    if (b.size() < 24 || b.compare(0, 4, "PSPN") != 0) throw std::invalid_argument("deserialize: bad magic");
    auto u16 = [&](std::size_t off) {
        return static_cast<std::uint16_t>(static_cast<std::uint8_t>(b[off]) |
                                          (static_cast<std::uint16_t>(static_cast<std::uint8_t>(b[off + 1])) << 8));
    };
    auto u64 = [&](std::size_t off) {
        std::uint64_t v = 0;
        for (int i = 7; i >= 0; --i) v = (v << 8) | static_cast<std::uint8_t>(b[off + static_cast<std::size_t>(i)]);
        return v;
    };
    if (u16(4) != 1) throw std::invalid_argument("deserialize: unsupported version");
    EnergyTable t;
    t.mode = static_cast<Mode>(static_cast<std::uint8_t>(b[6]));
    t.n = static_cast<std::uint8_t>(b[7]);
    t.p = u16(8);
    t.seed = u64(16);
    const std::size_t count = std::size_t{1} << t.n;
    if (b.size() != 24 + count * 8) throw std::invalid_argument("deserialize: truncated table");
    t.energies.resize(static_cast<Eigen::Index>(count));
    for (std::size_t i = 0; i < count; ++i) {
        const std::uint64_t bits = u64(24 + 8 * i);
        double e;
        std::memcpy(&e, &bits, 8);
        t.energies[static_cast<Eigen::Index>(i)] = e;
    }
    return t;
}

inline void save_table(const EnergyTable& t, const std::string& path) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("save_table: cannot open " + path);
    const std::string b = serialize(t);
    f.write(b.data(), static_cast<std::streamsize>(b.size()));
}

inline EnergyTable load_table(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("load_table: cannot open " + path);
    std::string b((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
    return deserialize(b);
}

inline std::string table_csv(const EnergyTable& t) {
    std::string out = "bits,energy\n";
    char line[64];
    for (std::size_t i = 0; i < t.size(); ++i) {
        std::snprintf(line, sizeof line, "%zu,%.17g\n", i, t.energies[static_cast<Eigen::Index>(i)]);
        out += line;
    }
    return out;
}

} // namespace pspin::disorder
