#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "pspin/clustering.hpp"
#include "pspin/disorder.hpp"

// Batch front door: experiment configs, the per-(seed, beta) shattering
// pipeline, report emission, and tidy plot data.
namespace pspin::scan {

inline constexpr const char* kVersion = "0.1.0";

struct ExperimentConfig {
    int n = 10;
    int p = 8;
    disorder::Mode mode = disorder::Mode::RemLimit;
    std::vector<std::uint64_t> seeds;
    std::vector<double> betas;
    double kappa = 0.12;
    double epsilon = 0.3;
    double nu1 = 0.2;
    double nu2 = 0.45;
    double c_exp = -1.0;       // default 4/n when negative
    double cprime_exp = -1.0;  // default ln(50)/n when negative
    int workers = 1;

    double c_exp_or_default() const;
    double cprime_exp_or_default() const;
};

// flat key-value text with [sections]; round-trips losslessly
ExperimentConfig parse_config(const std::string& text);
std::string serialize_config(const ExperimentConfig& cfg);
ExperimentConfig load_config(const std::string& path);

std::uint64_t fnv1a64(const std::string& bytes);

// Full shattering diagnostic for one (table, beta) cell. Components of the
// nu1-graph are reported even when the OGP pre-check fails, together with the
// flag, so the diagnostics stay measurable outside the proposition's regime.
struct ShatterReport {
    double beta = 0.0;
    double kappa = 0.0;
    double nu1 = 0.0;
    double nu2 = 0.0;
    bool ogp = false;
    clustering::ClusterReport components;
    std::vector<double> cluster_masses;
    double mass_in = 0.0;
    double mass_out = 0.0;
    double log_z = 0.0;
    double max_cluster_mass = 0.0;
    double total_cluster_mass = 0.0;
    clustering::ShatteringVerdict verdict;
};

ShatterReport run_shatter(const disorder::EnergyTable& table, double beta, double kappa, double nu1,
                          double nu2, double a, double b, double c_exp, double cprime_exp);

std::string shatter_json(const ShatterReport& r);
std::string cluster_report_json(const clustering::ClusterReport& r, bool ogp);

// One artifact per (seed, beta) cell plus a manifest with config hash and
// content hashes. Reruns with the same config are byte-identical.
void run_scan(const ExperimentConfig& cfg, const std::string& out_dir);

// Long-format CSV (x = beta, metric, value, seed) from a scan directory.
void emit_plot_data(const std::string& reports_dir, const std::string& out_csv);

} // namespace pspin::scan
