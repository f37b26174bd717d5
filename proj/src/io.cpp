#include "mfg/io.hpp"

#include <ctime>
#include <fstream>
#include <iomanip>

#include "json.hpp"

namespace mfg {

namespace {

using nlohmann::json;

Coefficient read_coefficient(const json& j, const std::string& name, int steps, double horizon) {
    if (!j.contains(name)) throw ParseError("config: missing game coefficient '" + name + "'");
    const json& v = j.at(name);
    if (v.is_number()) return Coefficient::constant(v.get<double>());
    if (v.is_array()) {
        auto vals = v.get<std::vector<double>>();
        if (static_cast<int>(vals.size()) != steps + 1)
            throw ParseError("config: tabulated coefficient '" + name + "' must have steps+1 = " +
                             std::to_string(steps + 1) + " entries, got " +
                             std::to_string(vals.size()));
        return Coefficient::table(std::move(vals), horizon);
    }
    throw ParseError("config: coefficient '" + name + "' must be a number or an array");
}

std::ofstream open_out(const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open for writing: " + path.string());
    out << std::setprecision(17);
    return out;
}

}  // namespace

RunConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open config file: " + path.string());
    json j;
    try {
        j = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ParseError(std::string("config parse error: ") + e.what());
    }

    RunConfig cfg;
    try {
        if (!j.contains("game")) throw ParseError("config: missing 'game' section");
        const json& g = j.at("game");
        cfg.spec.horizon = g.at("horizon").get<double>();
        if (!(cfg.spec.horizon > 0.0)) throw ParseError("config: horizon must be positive");
        cfg.spec.x0 = g.at("x0").get<double>();
        if (j.contains("grid")) cfg.steps = j.at("grid").value("steps", cfg.steps);
        if (cfg.steps < 1) throw ParseError("config: grid.steps must be >= 1");

        const double T = cfg.spec.horizon;
        cfg.spec.a = read_coefficient(g, "a", cfg.steps, T);
        cfg.spec.abar = read_coefficient(g, "abar", cfg.steps, T);
        cfg.spec.b1 = read_coefficient(g, "b1", cfg.steps, T);
        cfg.spec.b2 = read_coefficient(g, "b2", cfg.steps, T);
        cfg.spec.c1 = read_coefficient(g, "c1", cfg.steps, T);
        cfg.spec.c2 = read_coefficient(g, "c2", cfg.steps, T);
        cfg.spec.g1 = read_coefficient(g, "g1", cfg.steps, T);
        cfg.spec.g2 = read_coefficient(g, "g2", cfg.steps, T);
        cfg.spec.gbar1 = read_coefficient(g, "gbar1", cfg.steps, T);
        cfg.spec.gbar2 = read_coefficient(g, "gbar2", cfg.steps, T);
        cfg.spec.m1 = read_coefficient(g, "m1", cfg.steps, T);
        cfg.spec.m2 = read_coefficient(g, "m2", cfg.steps, T);
        cfg.spec.h1 = g.at("h1").get<double>();
        cfg.spec.h2 = g.at("h2").get<double>();
        cfg.spec.hbar1 = g.at("hbar1").get<double>();
        cfg.spec.hbar2 = g.at("hbar2").get<double>();

        if (j.contains("mc")) {
            cfg.paths = j.at("mc").value("paths", cfg.paths);
            cfg.seed = j.at("mc").value("seed", cfg.seed);
        }
    } catch (const json::exception& e) {
        throw ParseError(std::string("config: ") + e.what());
    }
    return cfg;
}

uint64_t config_hash(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("cannot open config file: " + path.string());
    uint64_t h = 0xcbf29ce484222325ull;
    char c;
    while (in.get(c)) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001b3ull;
    }
    return h;
}

void write_riccati_csv(const std::filesystem::path& path, const RiccatiTables& t) {
    auto out = open_out(path);
    out << "t,alpha1,alpha2,tau1,tau2,delta1,delta2,ex_mean\n";
    for (int k = 0; k < t.grid.n_nodes(); ++k)
        out << t.grid.node(k) << ',' << t.alpha1.y[k] << ',' << t.alpha2.y[k] << ',' << t.tau1.y[k]
            << ',' << t.tau2.y[k] << ',' << t.delta1.y[k] << ',' << t.delta2.y[k] << ','
            << t.ex_mean[k] << '\n';
}

void write_gains_csv(const std::filesystem::path& path, const GainTables& g) {
    auto out = open_out(path);
    out << "t,k_hat1,k_hat2,k_mean1,k_mean2\n";
    for (int k = 0; k < g.grid.n_nodes(); ++k)
        out << g.grid.node(k) << ',' << g.k_hat1[k] << ',' << g.k_hat2[k] << ',' << g.k_mean1[k]
            << ',' << g.k_mean2[k] << '\n';
}

void write_paths_csv(const std::filesystem::path& path, const StatePathSet& s, int stride) {
    auto out = open_out(path);
    out << "path_id,t,x,x_hat,v1,v2\n";
    const int n = s.grid.n_steps;
    for (int p = 0; p < s.n_paths; p += std::max(1, stride)) {
        for (int k = 0; k <= n; ++k) {
            const int kc = k < n ? k : n - 1;
            out << p << ',' << s.grid.node(k) << ',' << s.state(p, k) << ',' << s.filt(p, k) << ','
                << s.u1(p, kc) << ',' << s.u2(p, kc) << '\n';
        }
    }
}

void write_cost_summary(const std::filesystem::path& path, const CostEstimate& cost, int steps,
                        uint64_t seed) {
    json j = {{"j1", cost.j1},         {"j2", cost.j2},       {"se1", cost.se1},
              {"se2", cost.se2},       {"n_paths", cost.n_paths}, {"steps", steps},
              {"seed", seed},          {"quadrature", cost.quadrature}};
    auto out = open_out(path);
    out << j.dump(2) << '\n';
}

void write_manifest(const std::filesystem::path& path, const std::string& command_line,
                    uint64_t cfg_hash, uint64_t seed, int steps, int n_paths) {
    std::time_t now = std::time(nullptr);
    char buf[64];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
    json j = {{"config_hash", cfg_hash}, {"master_seed", seed},   {"steps", steps},
              {"n_paths", n_paths},      {"version", "0.1.0"},    {"timestamp", buf},
              {"command_line", command_line}};
    auto out = open_out(path);
    out << j.dump(2) << '\n';
}

}  // namespace mfg
