#include "pspin/scan.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "pspin/gibbs.hpp"
#include "pspin/landscape.hpp"
#include "pspin/parallel.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace pspin::scan {

double ExperimentConfig::c_exp_or_default() const { return c_exp >= 0.0 ? c_exp : 4.0 / n; }
double ExperimentConfig::cprime_exp_or_default() const {
    return cprime_exp >= 0.0 ? cprime_exp : std::log(50.0) / n;
}

namespace {

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    const auto b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, sep)) out.push_back(trim(item));
    return out;
}

std::vector<std::uint64_t> parse_seeds(const std::string& v) {
    std::vector<std::uint64_t> out;
    const auto dots = v.find("..");
    if (dots != std::string::npos) {
        const std::uint64_t lo = std::stoull(trim(v.substr(0, dots)));
        const std::uint64_t hi = std::stoull(trim(v.substr(dots + 2)));
        if (hi < lo) throw std::invalid_argument("config: seeds range is inverted");
        for (std::uint64_t s = lo; s <= hi; ++s) out.push_back(s);
        return out;
    }
    for (const auto& tok : split(v, ','))
        if (!tok.empty()) out.push_back(std::stoull(tok));
    return out;
}

} // namespace

ExperimentConfig parse_config(const std::string& text) {
    ExperimentConfig cfg;
    cfg.seeds.clear();
    cfg.betas.clear();
    std::stringstream ss(text);
    std::string line, section;
    int lineno = 0;
    while (std::getline(ss, line)) {
        ++lineno;
        line = trim(line);
        if (line.empty() || line[0] == '#') continue;
        if (line.front() == '[' && line.back() == ']') {
            section = line.substr(1, line.size() - 2);
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument("config line " + std::to_string(lineno) + ": expected key = value");
        const std::string key = section + "." + trim(line.substr(0, eq));
        const std::string val = trim(line.substr(eq + 1));
        if (key == "disorder.n") cfg.n = std::stoi(val);
        else if (key == "disorder.p") cfg.p = std::stoi(val);
        else if (key == "disorder.mode") cfg.mode = disorder::mode_from_name(val);
        else if (key == "disorder.seeds") cfg.seeds = parse_seeds(val);
        else if (key == "gibbs.beta") {
            for (const auto& tok : split(val, ','))
                if (!tok.empty()) cfg.betas.push_back(std::stod(tok));
        } else if (key == "gibbs.kappa") cfg.kappa = std::stod(val);
        else if (key == "landscape.epsilon") cfg.epsilon = std::stod(val);
        else if (key == "clustering.nu1") cfg.nu1 = std::stod(val);
        else if (key == "clustering.nu2") cfg.nu2 = std::stod(val);
        else if (key == "clustering.c_exp") cfg.c_exp = std::stod(val);
        else if (key == "clustering.cprime_exp") cfg.cprime_exp = std::stod(val);
        else if (key == "run.workers") cfg.workers = std::stoi(val);
        else throw std::invalid_argument("config: unknown field '" + key + "'");
    }
    if (cfg.betas.empty()) throw std::invalid_argument("config: gibbs.beta missing");
    if (cfg.n < 1 || cfg.n > kMaxSites) throw std::invalid_argument("config: disorder.n out of range");
    if (!(cfg.nu1 > 0.0 && cfg.nu1 < cfg.nu2 && cfg.nu2 < 1.0))
        throw std::invalid_argument("config: clustering.nu1/nu2 invalid");
    return cfg;
}

std::string serialize_config(const ExperimentConfig& cfg) {
    std::string out;
    out += "[disorder]\n";
    out += "n = " + std::to_string(cfg.n) + "\n";
    out += "p = " + std::to_string(cfg.p) + "\n";
    out += std::string("mode = ") + disorder::mode_name(cfg.mode) + "\n";
    out += "seeds = ";
    for (std::size_t i = 0; i < cfg.seeds.size(); ++i)
        out += (i ? "," : "") + std::to_string(cfg.seeds[i]);
    out += "\n[gibbs]\n";
    out += "beta = ";
    for (std::size_t i = 0; i < cfg.betas.size(); ++i) out += (i ? "," : "") + fmt(cfg.betas[i]);
    out += "\nkappa = " + fmt(cfg.kappa) + "\n";
    out += "[landscape]\n";
    out += "epsilon = " + fmt(cfg.epsilon) + "\n";
    out += "[clustering]\n";
    out += "nu1 = " + fmt(cfg.nu1) + "\n";
    out += "nu2 = " + fmt(cfg.nu2) + "\n";
    if (cfg.c_exp >= 0.0) out += "c_exp = " + fmt(cfg.c_exp) + "\n";
    if (cfg.cprime_exp >= 0.0) out += "cprime_exp = " + fmt(cfg.cprime_exp) + "\n";
    out += "[run]\n";
    out += "workers = " + std::to_string(cfg.workers) + "\n";
    return out;
}

ExperimentConfig load_config(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("load_config: cannot open " + path);
    std::string text((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
    return parse_config(text);
}

std::uint64_t fnv1a64(const std::string& bytes) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (const unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

ShatterReport run_shatter(const disorder::EnergyTable& table, double beta, double kappa, double nu1,
                          double nu2, double a, double b, double c_exp, double cprime_exp) {
    ShatterReport r;
    r.beta = beta;
    r.kappa = kappa;
    r.nu1 = nu1;
    r.nu2 = nu2;

    const double gstar = beta / kSqrt2Ln2;
    const landscape::LevelSet band =
        landscape::level_set(table, gstar - kappa, gstar + kappa, landscape::Unit::SqrtTwoLnTwo);

    r.ogp = clustering::check_ogp(band.members, nu1, nu2).holds;
    r.components = clustering::connected_components(band.members, nu1, nu2);
    r.components.ogp_holds = r.ogp;

    const gibbs::GibbsContext ctx = gibbs::make_context(table, beta);
    r.log_z = ctx.log_z;
    for (const auto& c : r.components.clusters) r.cluster_masses.push_back(gibbs::gibbs_mass(ctx, c));
    const auto [mass_in, mass_out] = gibbs::band_dominance(table, beta, kappa);
    r.mass_in = mass_in;
    r.mass_out = mass_out;
    for (const double m : r.cluster_masses) {
        r.max_cluster_mass = std::max(r.max_cluster_mass, m);
        r.total_cluster_mass += m;
    }
    r.verdict = clustering::shattering_verdict(r.components, r.cluster_masses, a, b, c_exp, cprime_exp, table.n);
    return r;
}

std::string cluster_report_json(const clustering::ClusterReport& r, bool ogp) {
    json j;
    j["nu1"] = r.nu1;
    j["nu2"] = r.nu2;
    j["ogp"] = ogp;
    j["L"] = r.clusters.size();
    j["sizes"] = r.sizes;
    j["max_diameter"] = r.max_diameter;
    j["min_interdistance"] = r.min_interdistance;
    json clusters = json::array();
    for (const auto& c : r.clusters) {
        json members = json::array();
        for (const auto& m : c) members.push_back(m.bits);
        clusters.push_back(members);
    }
    j["clusters"] = clusters;
    return j.dump(2) + "\n";
}

std::string shatter_json(const ShatterReport& r) {
    json j;
    j["beta"] = r.beta;
    j["kappa"] = r.kappa;
    j["nu1"] = r.nu1;
    j["nu2"] = r.nu2;
    j["ogp"] = r.ogp;
    j["L"] = r.components.clusters.size();
    j["log_z"] = r.log_z;
    j["mass_in"] = r.mass_in;
    j["mass_out"] = r.mass_out;
    j["max_cluster_mass"] = r.max_cluster_mass;
    j["total_cluster_mass"] = r.total_cluster_mass;
    j["cluster_masses"] = r.cluster_masses;
    j["verdict"] = {{"exp_many", r.verdict.exp_many},
                    {"separated", r.verdict.separated},
                    {"subdominant", r.verdict.subdominant},
                    {"carries_mass", r.verdict.carries_mass}};
    return j.dump(2) + "\n";
}

namespace {

void write_file(const fs::path& p, const std::string& bytes) {
    std::ofstream f(p, std::ios::binary);
    if (!f) throw std::runtime_error("run_scan: cannot write " + p.string());
    f.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

char hexdigit(unsigned v) { return v < 10 ? static_cast<char>('0' + v) : static_cast<char>('a' + v - 10); }

std::string hex64(std::uint64_t v) {
    std::string s(16, '0');
    for (int i = 15; i >= 0; --i, v >>= 4) s[static_cast<std::size_t>(i)] = hexdigit(v & 0xf);
    return s;
}

} // namespace

void run_scan(const ExperimentConfig& cfg, const std::string& out_dir) {
    fs::create_directories(out_dir);
    parallel::set_workers(cfg.workers);
    const fs::path root(out_dir);
    std::vector<std::pair<std::string, std::string>> files;  // name -> bytes

    std::string summary = "n,p,mode,seed,beta,kappa,log_z,band_mass\n";
    std::string levels = "seed,epsilon,level_set_size,ground_bits,ground_energy\n";

    for (const std::uint64_t seed : cfg.seeds) {
        const disorder::EnergyTable table = disorder::build_energy_table(cfg.n, cfg.p, seed, cfg.mode);

        const landscape::LevelSet s = landscape::s_eps(table, cfg.epsilon);
        const auto [gs_config, gs_energy] = landscape::ground_state(table);
        levels += std::to_string(seed) + "," + fmt(cfg.epsilon) + "," + std::to_string(s.size()) + "," +
                  std::to_string(gs_config.bits) + "," + fmt(gs_energy) + "\n";

        for (std::size_t bi = 0; bi < cfg.betas.size(); ++bi) {
            const double beta = cfg.betas[bi];
            const ShatterReport rep =
                run_shatter(table, beta, cfg.kappa, cfg.nu1, cfg.nu2, 2.0 * cfg.nu1, cfg.nu2,
                            cfg.c_exp_or_default(), cfg.cprime_exp_or_default());
            summary += std::to_string(cfg.n) + "," + std::to_string(cfg.p) + "," +
                       disorder::mode_name(cfg.mode) + "," + std::to_string(seed) + "," + fmt(beta) + "," +
                       fmt(cfg.kappa) + "," + fmt(rep.log_z) + "," + fmt(rep.mass_in) + "\n";
            const std::string tag = "s" + std::to_string(seed) + "_b" + std::to_string(bi);
            files.emplace_back("cluster_" + tag + ".json", cluster_report_json(rep.components, rep.ogp));
            files.emplace_back("shatter_" + tag + ".json", shatter_json(rep));
        }
    }
    files.emplace_back("summary.csv", std::move(summary));
    files.emplace_back("levelsets.csv", std::move(levels));

    std::string manifest;
    manifest += "pspin-version " + std::string(kVersion) + "\n";
    manifest += "config-hash " + hex64(fnv1a64(serialize_config(cfg))) + "\n";
    std::sort(files.begin(), files.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
    for (const auto& [name, bytes] : files) {
        write_file(root / name, bytes);
        manifest += "file " + name + " " + hex64(fnv1a64(bytes)) + "\n";
    }
    const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    manifest += "generated " + std::to_string(now) + "\n";
    write_file(root / "manifest.txt", manifest);
}

void emit_plot_data(const std::string& reports_dir, const std::string& out_csv) {
    const fs::path root(reports_dir);
    if (!fs::is_directory(root)) throw std::runtime_error("emit_plot_data: not a directory: " + reports_dir);

    std::vector<fs::path> shatters;
    for (const auto& e : fs::directory_iterator(root)) {
        const std::string name = e.path().filename().string();
        if (name.rfind("shatter_", 0) == 0 && name.size() > 5 && name.substr(name.size() - 5) == ".json")
            shatters.push_back(e.path());
    }
    std::sort(shatters.begin(), shatters.end());

    std::string out = "x,metric,value,seed\n";
    for (const auto& path : shatters) {
        std::ifstream f(path);
        if (!f) throw std::runtime_error("emit_plot_data: cannot open " + path.string());
        json j;
        try {
            f >> j;
        } catch (const json::exception&) {
            throw std::runtime_error("emit_plot_data: corrupt report file " + path.string());
        }
        const std::string name = path.filename().string();  // shatter_s<seed>_b<i>.json
        const auto spos = name.find("_s"), bpos = name.find("_b");
        if (spos == std::string::npos || bpos == std::string::npos)
            throw std::runtime_error("emit_plot_data: unrecognized report name " + name);
        const std::string seed = name.substr(spos + 2, bpos - spos - 2);
        const std::string x = fmt(j.at("beta").get<double>());
        const auto row = [&](const char* metric, double v) {
            out += x + "," + metric + "," + fmt(v) + "," + seed + "\n";
        };
        row("log_z", j.at("log_z").get<double>());
        row("mass_in", j.at("mass_in").get<double>());
        row("mass_out", j.at("mass_out").get<double>());
        row("L", j.at("L").get<double>());
        row("max_cluster_mass", j.at("max_cluster_mass").get<double>());
    }
    write_file(out_csv, out);
}

} // namespace pspin::scan
