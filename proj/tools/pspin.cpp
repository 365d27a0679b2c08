// Batch front door for the p-spin landscape laboratory.
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "pspin/bounds.hpp"
#include "pspin/clustering.hpp"
#include "pspin/disorder.hpp"
#include "pspin/gibbs.hpp"
#include "pspin/landscape.hpp"
#include "pspin/mogp.hpp"
#include "pspin/parallel.hpp"
#include "pspin/scan.hpp"
#include "pspin/tails.hpp"

using nlohmann::json;
using namespace pspin;

namespace {

struct TableArgs {
    std::string table_path;
    int n = 10;
    int p = 8;
    std::string mode = "auto";
    std::uint64_t seed = 0;

    void attach(CLI::App* cmd) {
        cmd->add_option("--table", table_path, "read an energy table from file instead of building one");
        cmd->add_option("--n", n, "system size");
        cmd->add_option("--p", p, "interaction order");
        cmd->add_option("--mode", mode, "exact | gram | rem | auto");
        cmd->add_option("--seed", seed, "disorder seed");
    }

    disorder::EnergyTable resolve() const {
        if (!table_path.empty()) return disorder::load_table(table_path);
        const disorder::Mode m =
            mode == "auto" ? disorder::select_mode(n, p) : disorder::mode_from_name(mode);
        return disorder::build_energy_table(n, p, seed, m);
    }
};

void emit(const std::string& text, const std::string& out_path) {
    if (out_path.empty()) {
        std::cout << text;
        return;
    }
    std::ofstream f(out_path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot write " + out_path);
    f << text;
}

json config_pair_json(const std::pair<SpinConfig, SpinConfig>& pr) {
    return json::array({pr.first.bits, pr.second.bits});
}

std::string exponent_report(double epsilon, std::optional<int> n, std::optional<double> beta) {
    json consts = json::array();
    const auto put = [&](const std::string& name, const std::string& formula, double value) {
        consts.push_back({{"name", name}, {"formula", formula}, {"value", value}});
    };

    put("xi_eps", "min(eps^10,(1-eps)^10)/100", bounds::xi_of_eps(epsilon));
    const double nu2 = bounds::search_nu2(epsilon);
    const double nu1 = nu2 / 3.0;
    put("nu2", "smallest grid nu2 with eventually-negative pair exponent", nu2);
    put("nu1", "nu2/3", nu1);
    const bounds::ClusteringConstants k = bounds::clustering_constants(epsilon, nu1, nu2);
    put("gamma_margin", "min((1-h(nu1)-2Xi)/5,(1-(1-eps)^2-2Xi)/5)", k.gamma_margin);
    put("delta", "largest grid delta with h(delta) under the cap", k.delta);
    put("p_hat", "smallest p passing both display checks", k.p_hat);
    put("cluster_exponent", "max(1+h(delta)-(1-eps)^2, 1+h(nu1)-2(1-eps)^2+(1-2delta)^p)", k.cluster_exponent);
    put("c1", "eps(2-eps)-gamma", k.c1);
    put("c2", "cluster_exponent/2+gamma", k.c2);
    put("pair_ogp_exponent", "1+h(nu2)-2(1-eps)^2+(1-2nu2/3)^p at p_hat",
        bounds::pair_ogp_exponent(epsilon, nu2, k.p_hat));
    const double astar = bounds::default_alpha_star(epsilon);
    put("alpha_star", "largest grid alpha* with -1+h((1-a)/2)+(1-eps)^2 < 0", astar);
    put("iota", "default 1/4", 0.25);
    const bounds::MomentRegimeVerdict mv = bounds::second_moment_regime(epsilon, {astar, 0.25}, 2);
    put("p_threshold_lemma_neg", "ln(24 ln2/alpha*^4)/ln(1/alpha*)", mv.p_threshold_lemma_neg);
    put("C1", "(1-eps) sqrt(4 pi ln 2)", (1.0 - epsilon) * std::sqrt(4.0 * M_PI * bounds::kLn2));
    if (n) put("first_moment_count", "n(1-(1-eps)^2)-log2((1-eps)sqrt(4 pi n ln2))",
               bounds::first_moment_count(epsilon, *n));
    if (beta) {
        put("gamma_star", "beta/sqrt(2 ln 2)", bounds::gamma_star(*beta));
        put("kappa_star", "(ln2/(2 beta^2))^(1/4)", bounds::kappa_star(*beta));
        put("phi_at_gamma_star", "(1-g^2)ln2+beta g sqrt(2 ln2) at g*",
            bounds::band_quadratic(bounds::gamma_star(*beta), *beta));
    }
    json j;
    j["epsilon"] = epsilon;
    j["constants"] = consts;
    return j.dump(2) + "\n";
}

std::string tails_check_csv(std::uint64_t samples, std::uint64_t seed) {
    std::string out = "bound,point,lower,estimate,upper,verdict\n";
    char line[256];
    const auto row = [&](const char* bound, const std::string& point, double lo, double est, double se,
                         double hi) {
        const bool ok = lo <= est + 4.0 * se && est - 4.0 * se <= hi;
        std::snprintf(line, sizeof line, "%s,%s,%.12g,%.12g,%.12g,%s\n", bound, point.c_str(), lo, est, hi,
                      ok ? "pass" : "FAIL");
        out += line;
    };

    for (const double x : {1.0, 1.5, 2.0, 3.0}) {
        const tails::TailSandwich s = tails::gauss_tail_bounds(x);
        const double truth = 0.5 * std::erfc(x / std::numbers::sqrt2);
        row("gauss", "x=" + std::to_string(x), s.lower, truth, 0.0, s.upper);
    }
    for (const double t : {1.0, 1.5, 2.0}) {
        for (const double rho : {-0.5, 0.0, 0.5}) {
            Eigen::MatrixXd sigma(2, 2);
            sigma << 1.0, rho, rho, 1.0;
            const Eigen::VectorXd tv = Eigen::VectorXd::Constant(2, t);
            const auto mc = tails::mc_orthant(sigma, tv, samples, seed);
            row("bivariate", "t=" + std::to_string(t) + ";rho=" + std::to_string(rho), 0.0, mc.estimate,
                mc.stderr_est, tails::bivariate_tail_bound(t, rho));
        }
    }
    {
        Eigen::MatrixXd sigma = Eigen::MatrixXd::Identity(1, 1);
        Eigen::VectorXd t(1);
        t << 3.0;
        const auto s = tails::savage_bounds(sigma, t);
        row("savage", "m=1;t=3", s.lower, 0.5 * std::erfc(3.0 / std::numbers::sqrt2), 0.0, s.upper);
    }
    {
        const Eigen::MatrixXd sigma = Eigen::MatrixXd::Identity(2, 2);
        const Eigen::VectorXd t = Eigen::VectorXd::Constant(2, 3.0);
        const auto s = tails::savage_bounds(sigma, t);
        const double tail3 = 0.5 * std::erfc(3.0 / std::numbers::sqrt2);
        row("savage", "m=2;t=(3,3)", s.lower, tail3 * tail3, 0.0, s.upper);
    }
    {
        const mogp::CovarianceModel cm = mogp::base_covariance(3, 0.9, 12);
        const double t = 0.7 * std::sqrt(2.0 * 10.0 * bounds::kLn2);
        const Eigen::VectorXd tv = Eigen::VectorXd::Constant(3, t);
        const auto s = tails::savage_bounds(cm.sigma, tv);
        const auto mc = tails::mc_orthant(cm.sigma, tv, samples, seed);
        row("savage", "m=3;base_covariance(3,0.9,12)", s.lower, mc.estimate, mc.stderr_est, s.upper);
    }
    return out;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"desk-scale laboratory for the Ising pure p-spin landscape"};
    app.require_subcommand(1);
    int workers = 1;
    app.add_option("--workers", workers, "worker pool size")->capture_default_str();

    // energy-table
    auto* cmd_table = app.add_subcommand("energy-table", "build and serialize an energy table");
    TableArgs ta_table;
    ta_table.attach(cmd_table);
    std::string out_path, csv_path;
    cmd_table->add_option("--out", out_path, "binary output path")->required();
    cmd_table->add_option("--csv", csv_path, "also export CSV here");

    // level-set
    auto* cmd_level = app.add_subcommand("level-set", "extract configurations in an energy window");
    TableArgs ta_level;
    ta_level.attach(cmd_level);
    double lower = -1e300, upper = 1e300;
    std::string unit = "s2l2";
    double eps_level = -1.0;
    std::string level_out;
    cmd_level->add_option("--lower", lower, "lower energy bound");
    cmd_level->add_option("--upper", upper, "upper energy bound");
    cmd_level->add_option("--unit", unit, "abs | s2l2 (multiples of sqrt(2 ln 2))");
    cmd_level->add_option("--epsilon", eps_level, "shorthand for the S(eps) window");
    cmd_level->add_option("--out", level_out, "output CSV (stdout when absent)");

    // cluster
    auto* cmd_cluster = app.add_subcommand("cluster", "cluster S(eps) under the OGP");
    TableArgs ta_cluster;
    ta_cluster.attach(cmd_cluster);
    double eps_cluster = 0.3, nu1 = 0.2, nu2 = 0.45;
    std::string cluster_out;
    cmd_cluster->add_option("--epsilon", eps_cluster, "level-set threshold")->capture_default_str();
    cmd_cluster->add_option("--nu1", nu1, "intra-cluster distance fraction")->capture_default_str();
    cmd_cluster->add_option("--nu2", nu2, "inter-cluster distance fraction")->capture_default_str();
    cmd_cluster->add_option("--out", cluster_out, "output JSON path");

    // shatter
    auto* cmd_shatter = app.add_subcommand("shatter", "shattering diagnostics for one (beta, kappa) cell");
    TableArgs ta_shatter;
    ta_shatter.attach(cmd_shatter);
    double beta = 1.1, kappa = 0.12, sh_nu1 = 0.2, sh_nu2 = 0.45;
    double sh_a = -1.0, sh_b = -1.0, sh_c = -1.0, sh_cprime = -1.0;
    std::string shatter_out;
    cmd_shatter->add_option("--beta", beta, "inverse temperature")->capture_default_str();
    cmd_shatter->add_option("--kappa", kappa, "band half-width in sqrt(2 ln 2) units")->capture_default_str();
    cmd_shatter->add_option("--nu1", sh_nu1, "")->capture_default_str();
    cmd_shatter->add_option("--nu2", sh_nu2, "")->capture_default_str();
    cmd_shatter->add_option("--a", sh_a, "diameter threshold (default 2 nu1)");
    cmd_shatter->add_option("--b", sh_b, "separation threshold (default nu2)");
    cmd_shatter->add_option("--c-exp", sh_c, "cluster-count exponent (default 4/n)");
    cmd_shatter->add_option("--cprime-exp", sh_cprime, "mass exponent (default ln(50)/n)");
    cmd_shatter->add_option("--out", shatter_out, "output JSON path");

    // exponents
    auto* cmd_exp = app.add_subcommand("exponents", "closed-form constants at a parameter point");
    double eps_exp = 0.2;
    int exp_n = 0;
    double exp_beta = 0.0;
    std::string exp_out;
    cmd_exp->add_option("--epsilon", eps_exp, "")->required();
    cmd_exp->add_option("--n", exp_n, "include the finite-n first-moment count");
    cmd_exp->add_option("--beta", exp_beta, "include the band quadratic constants");
    cmd_exp->add_option("--out", exp_out, "output JSON path");

    // mogp
    auto* cmd_mogp = app.add_subcommand("mogp", "m-OGP tuner and empirical search");
    cmd_mogp->require_subcommand(1);
    auto* cmd_tune = cmd_mogp->add_subcommand("tune", "parameters making Psi negative");
    int tune_m = 4;
    double tune_gamma = 0.6;
    std::string tune_out;
    cmd_tune->add_option("--m", tune_m, "")->required();
    cmd_tune->add_option("--gamma", tune_gamma, "")->required();
    cmd_tune->add_option("--out", tune_out, "");
    auto* cmd_search = cmd_mogp->add_subcommand("search", "count admissible m-tuples at desk scale");
    int se_n = 10, se_p = 10, se_m = 2;
    double se_gamma = 0.85, se_xi = 0.9, se_eta = 0.05;
    std::string se_angles = "0", se_mode = "rem", se_out;
    std::uint64_t se_seed = 0, se_budget = 1u << 22;
    cmd_search->add_option("--n", se_n, "")->required();
    cmd_search->add_option("--p", se_p, "")->required();
    cmd_search->add_option("--m", se_m, "")->required();
    cmd_search->add_option("--gamma", se_gamma, "")->required();
    cmd_search->add_option("--xi", se_xi, "")->required();
    cmd_search->add_option("--eta", se_eta, "")->required();
    cmd_search->add_option("--angles", se_angles, "comma-separated angle list in [0, pi/2]");
    cmd_search->add_option("--seed", se_seed, "");
    cmd_search->add_option("--mode", se_mode, "rem | exact | gram");
    cmd_search->add_option("--budget", se_budget, "sample budget when the tuple space is too large");
    cmd_search->add_option("--out", se_out, "");

    // tails check
    auto* cmd_tails = app.add_subcommand("tails", "probabilistic bound checks");
    cmd_tails->require_subcommand(1);
    auto* cmd_check = cmd_tails->add_subcommand("check", "emit a pass/fail table for every bound");
    std::uint64_t tails_samples = 2'000'000, tails_seed = 12345;
    std::string tails_out;
    cmd_check->add_option("--samples", tails_samples, "")->capture_default_str();
    cmd_check->add_option("--seed", tails_seed, "")->capture_default_str();
    cmd_check->add_option("--out", tails_out, "");

    // scan / plot-data
    auto* cmd_scan = app.add_subcommand("scan", "run a full experiment config");
    std::string scan_config, scan_out;
    cmd_scan->add_option("--config", scan_config, "experiment config file")->required();
    cmd_scan->add_option("--out", scan_out, "output directory")->required();
    auto* cmd_plot = app.add_subcommand("plot-data", "tidy long-format CSV from scan reports");
    std::string plot_reports, plot_out;
    cmd_plot->add_option("--reports", plot_reports, "scan output directory")->required();
    cmd_plot->add_option("--out", plot_out, "output CSV path")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        parallel::set_workers(workers);

        if (*cmd_table) {
            const disorder::EnergyTable t = ta_table.resolve();
            disorder::save_table(t, out_path);
            if (!csv_path.empty()) emit(disorder::table_csv(t), csv_path);
        } else if (*cmd_level) {
            const disorder::EnergyTable t = ta_level.resolve();
            landscape::LevelSet s;
            if (eps_level >= 0.0) s = landscape::s_eps(t, eps_level);
            else
                s = landscape::level_set(t, lower, upper,
                                         unit == "abs" ? landscape::Unit::Absolute
                                                       : landscape::Unit::SqrtTwoLnTwo);
            emit(landscape::level_set_csv(s), level_out);
        } else if (*cmd_cluster) {
            const disorder::EnergyTable t = ta_cluster.resolve();
            const landscape::LevelSet s = landscape::s_eps(t, eps_cluster);
            try {
                const clustering::ClusterReport rep = clustering::cluster(s.members, nu1, nu2);
                emit(scan::cluster_report_json(rep, true), cluster_out);
            } catch (const clustering::ogp_violation& v) {
                json j;
                j["ogp"] = false;
                j["error"] = v.what();
                json w = json::array();
                for (const auto& pr : v.witnesses) w.push_back(config_pair_json(pr));
                j["witnesses"] = w;
                emit(j.dump(2) + "\n", cluster_out);
                return 2;
            }
        } else if (*cmd_shatter) {
            const disorder::EnergyTable t = ta_shatter.resolve();
            const double a = sh_a > 0.0 ? sh_a : 2.0 * sh_nu1;
            const double b = sh_b > 0.0 ? sh_b : sh_nu2;
            const double ce = sh_c >= 0.0 ? sh_c : 4.0 / t.n;
            const double cp = sh_cprime >= 0.0 ? sh_cprime : std::log(50.0) / t.n;
            emit(scan::shatter_json(scan::run_shatter(t, beta, kappa, sh_nu1, sh_nu2, a, b, ce, cp)),
                 shatter_out);
        } else if (*cmd_exp) {
            emit(exponent_report(eps_exp, exp_n > 0 ? std::optional<int>(exp_n) : std::nullopt,
                                 exp_beta > 0.0 ? std::optional<double>(exp_beta) : std::nullopt),
                 exp_out);
        } else if (*cmd_tune) {
            const mogp::TuneResult r = mogp::tune_mogp(tune_m, tune_gamma);
            json j{{"xi", r.xi}, {"eta", r.eta}, {"c", r.c_rate}, {"p_star", r.p_star}, {"psi", r.psi}};
            emit(j.dump(2) + "\n", tune_out);
        } else if (*cmd_search) {
            std::vector<double> angles;
            std::stringstream ss(se_angles);
            std::string tok;
            while (std::getline(ss, tok, ',')) angles.push_back(std::stod(tok));
            const mogp::SearchResult r =
                mogp::empirical_mogp_search(se_n, se_p, se_m, se_gamma, se_xi, se_eta, angles, se_seed,
                                            disorder::mode_from_name(se_mode), se_budget);
            json j{{"count", r.count}, {"tuples_examined", r.tuples_examined}, {"coverage", r.coverage}};
            emit(j.dump(2) + "\n", se_out);
        } else if (*cmd_check) {
            emit(tails_check_csv(tails_samples, tails_seed), tails_out);
        } else if (*cmd_scan) {
            scan::ExperimentConfig cfg = scan::load_config(scan_config);
            if (workers != 1) cfg.workers = workers;
            scan::run_scan(cfg, scan_out);
        } else if (*cmd_plot) {
            scan::emit_plot_data(plot_reports, plot_out);
        }
    } catch (const disorder::budget_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
