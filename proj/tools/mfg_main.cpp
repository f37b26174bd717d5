// Command-line driver: validate a game config, solve the Riccati systems,
// simulate the equilibrium, run the Nash verification battery, or cross-check
// the FBSDE regression solver against the Riccati route.
//
// Exit codes: 0 ok, 1 verification failure, 2 usage/config error, 3 solver fault.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"

#include "mfg/cost.hpp"
#include "mfg/fbsde.hpp"
#include "mfg/io.hpp"
#include "mfg/nash_verify.hpp"
#include "mfg/noise.hpp"
#include "mfg/riccati.hpp"
#include "mfg/sde.hpp"

namespace fs = std::filesystem;

namespace {

struct CommonOpts {
    std::string config_path;
    std::string out_dir;
    int paths = 0;   // 0 = take from config
    int steps = 0;   // 0 = take from config
    long long seed = -1;
    int threads = 1;
};

std::string join_args(int argc, char** argv) {
    std::ostringstream os;
    for (int i = 0; i < argc; ++i) os << (i ? " " : "") << argv[i];
    return os.str();
}

fs::path resolve_out_dir(const CommonOpts& opts, uint64_t cfg_hash, uint64_t seed) {
    if (!opts.out_dir.empty()) return opts.out_dir;
    const char* root = std::getenv("MFG_OUT_ROOT");
    std::ostringstream name;
    name << std::hex << std::setfill('0') << std::setw(16) << cfg_hash << "-" << std::dec << seed;
    return fs::path(root ? root : "runs") / name.str();
}

mfg::RunConfig load_and_apply(const CommonOpts& opts) {
    mfg::RunConfig cfg = mfg::load_config(opts.config_path);
    if (opts.steps > 0) cfg.steps = opts.steps;
    if (opts.paths > 0) cfg.paths = opts.paths;
    if (opts.seed >= 0) cfg.seed = static_cast<uint64_t>(opts.seed);
    return cfg;
}

void print_report(const mfg::ValidationReport& report) {
    if (report.pass) {
        std::cout << "validation: pass\n";
        return;
    }
    std::cout << "validation: FAIL (" << report.violations.size() << " violations)\n";
    for (const auto& v : report.violations)
        std::cout << "  violated: " << v.constraint << " at t=" << v.t
                  << " (value " << v.magnitude << ")\n";
}

int cmd_validate(const CommonOpts& opts) {
    mfg::RunConfig cfg = load_and_apply(opts);
    mfg::TimeGrid grid(cfg.spec.horizon, cfg.steps);
    auto report = mfg::validate_lq(cfg.spec, grid);
    print_report(report);
    return report.pass ? 0 : 1;
}

int cmd_solve(const CommonOpts& opts, const std::string& cmdline) {
    mfg::RunConfig cfg = load_and_apply(opts);
    mfg::TimeGrid grid(cfg.spec.horizon, cfg.steps);
    auto report = mfg::validate_lq(cfg.spec, grid);
    if (!report.pass) {
        print_report(report);
        return 2;
    }
    auto tables = mfg::solve_riccati(cfg.spec, grid);
    auto gains = mfg::feedback_gains(cfg.spec, tables);

    uint64_t hash = mfg::config_hash(opts.config_path);
    fs::path dir = resolve_out_dir(opts, hash, cfg.seed);
    fs::create_directories(dir);
    mfg::write_riccati_csv(dir / "riccati.csv", tables);
    mfg::write_gains_csv(dir / "gains.csv", gains);
    mfg::write_manifest(dir / "manifest.json", cmdline, hash, cfg.seed, cfg.steps, cfg.paths);
    std::cout << "wrote " << (dir / "riccati.csv").string() << " and gains.csv ("
              << grid.n_nodes() << " rows)\n";
    return 0;
}

int cmd_simulate(const CommonOpts& opts, const std::string& cmdline) {
    mfg::RunConfig cfg = load_and_apply(opts);
    mfg::TimeGrid grid(cfg.spec.horizon, cfg.steps);
    auto report = mfg::validate_lq(cfg.spec, grid);
    if (!report.pass) {
        print_report(report);
        return 2;
    }
    auto tables = mfg::solve_riccati(cfg.spec, grid);
    auto gains = mfg::feedback_gains(cfg.spec, tables);

    mfg::NoisePlan plan{cfg.seed, cfg.paths, grid};
    auto noise = mfg::generate_noise(plan, opts.threads);
    auto paths = mfg::simulate_state(cfg.spec, mfg::equilibrium_policy(gains), tables.ex_mean,
                                     noise, opts.threads);
    auto cost = mfg::estimate_cost_mc(cfg.spec, paths, tables.ex_mean);

    uint64_t hash = mfg::config_hash(opts.config_path);
    fs::path dir = resolve_out_dir(opts, hash, cfg.seed);
    fs::create_directories(dir);
    int stride = std::max(1, cfg.paths / 100);  // keep paths.csv reviewable
    mfg::write_paths_csv(dir / "paths.csv", paths, stride);
    mfg::write_cost_summary(dir / "cost.json", cost, cfg.steps, cfg.seed);
    mfg::write_manifest(dir / "manifest.json", cmdline, hash, cfg.seed, cfg.steps, cfg.paths);
    std::cout << "j1=" << cost.j1 << " (se " << cost.se1 << "), j2=" << cost.j2 << " (se "
              << cost.se2 << "), paths=" << cfg.paths << "\n";
    return 0;
}

int cmd_verify_nash(const CommonOpts& opts, double scale_gains, const std::string& cmdline) {
    mfg::RunConfig cfg = load_and_apply(opts);
    mfg::TimeGrid grid(cfg.spec.horizon, cfg.steps);
    auto report = mfg::validate_lq(cfg.spec, grid);
    if (!report.pass) {
        print_report(report);
        return 2;
    }

    bool all_pass = true;
    auto convexity = mfg::convexity_check(cfg.spec, grid);
    std::cout << "convexity check: " << (convexity.pass ? "pass" : "FAIL") << "\n";
    for (const auto& v : convexity.violations)
        std::cout << "  violated: " << v.constraint << " at t=" << v.t << "\n";
    all_pass = all_pass && convexity.pass;

    auto tables = mfg::solve_riccati(cfg.spec, grid);
    auto gains = mfg::feedback_gains(cfg.spec, tables);
    if (scale_gains != 1.0) {
        for (auto* g : {&gains.k_hat1, &gains.k_hat2, &gains.k_mean1, &gains.k_mean2})
            for (double& v : *g) v *= scale_gains;
        std::cout << "note: candidate gains scaled by " << scale_gains << "\n";
    }

    mfg::NoisePlan plan{cfg.seed, cfg.paths, grid};
    mfg::NashVerifier verifier(cfg.spec, gains, plan);
    auto battery = mfg::deviation_battery(cfg.spec, grid, gains);
    auto nash = verifier.run_battery(battery);

    uint64_t hash = mfg::config_hash(opts.config_path);
    fs::path dir = resolve_out_dir(opts, hash, cfg.seed);
    fs::create_directories(dir);
    {
        std::ofstream csv(dir / "nash_report.csv");
        csv << std::setprecision(17)
            << "player,deviation,dj,dj_se,gateaux,gateaux_se,vi_value,vi_se,tol_grad,verdict\n";
        for (const auto& r : nash.records)
            csv << r.player << ',' << r.id << ',' << r.dj << ',' << r.dj_se << ',' << r.gateaux
                << ',' << r.gateaux_se << ',' << r.vi_value << ',' << r.vi_se << ','
                << r.tol_grad << ',' << (r.pass ? "pass" : "fail") << '\n';
    }
    for (const auto& r : nash.records)
        std::cout << (r.pass ? "  pass  " : "  FAIL  ") << r.id << "  dJ=" << r.dj << " (se "
                  << r.dj_se << ")  grad=" << r.gateaux << " (tol " << r.tol_grad << ")\n";
    all_pass = all_pass && nash.all_pass;

    auto resid = mfg::hamiltonian_residual(cfg.spec, tables, verifier.baseline().paths);
    const double rtol = 0.05;
    bool h_ok = resid.rms1 <= rtol * std::max(resid.rms_scale1, 1e-12) &&
                resid.rms2 <= rtol * std::max(resid.rms_scale2, 1e-12);
    std::cout << "hamiltonian residual: rms1=" << resid.rms1 << " rms2=" << resid.rms2 << " ("
              << (h_ok ? "pass" : "FAIL") << ")\n";
    all_pass = all_pass && h_ok;

    mfg::write_manifest(dir / "manifest.json", cmdline, hash, cfg.seed, cfg.steps, cfg.paths);
    std::cout << "verify-nash: " << (all_pass ? "PASS" : "FAIL") << "\n";
    return all_pass ? 0 : 1;
}

int cmd_fbsde_check(const CommonOpts& opts, int picard, const std::string& cmdline) {
    mfg::RunConfig cfg = load_and_apply(opts);
    if (opts.steps == 0) cfg.steps = 256;  // regression solver default
    mfg::TimeGrid grid(cfg.spec.horizon, cfg.steps);
    auto report = mfg::validate_lq(cfg.spec, grid);
    if (!report.pass) {
        print_report(report);
        return 2;
    }
    auto tables = mfg::solve_riccati(cfg.spec, grid);

    mfg::SolverConfig sc;
    if (picard > 0) sc.max_picard = picard;
    mfg::NoisePlan plan{cfg.seed, cfg.paths, grid};
    auto sol = mfg::solve_lq_fbsde(cfg.spec, sc, plan);
    auto resid = mfg::check_against_riccati(sol, tables);

    std::cout << "picard iterations: " << sol.iterations << "\n"
              << "q_hat rel RMSE:   " << resid.q_hat_rel_rmse1 << "  " << resid.q_hat_rel_rmse2
              << "\n"
              << "mean-q rel max:   " << resid.mean_q_rel_max1 << "  " << resid.mean_q_rel_max2
              << "\n";

    uint64_t hash = mfg::config_hash(opts.config_path);
    fs::path dir = resolve_out_dir(opts, hash, cfg.seed);
    fs::create_directories(dir);
    {
        std::ofstream csv(dir / "fbsde_qhat.csv");
        csv << std::setprecision(17) << "t,qhat1_c0,qhat1_c1,qhat2_c0,qhat2_c1,tau1,delta1,tau2,"
                                        "delta2,ex_mean\n";
        for (int k = 0; k < grid.n_nodes(); ++k)
            csv << grid.node(k) << ',' << sol.q_hat_c0[0][k] << ',' << sol.q_hat_c1[0][k] << ','
                << sol.q_hat_c0[1][k] << ',' << sol.q_hat_c1[1][k] << ',' << tables.tau1.y[k]
                << ',' << tables.delta1.y[k] << ',' << tables.tau2.y[k] << ','
                << tables.delta2.y[k] << ',' << tables.ex_mean[k] << '\n';
    }
    mfg::write_manifest(dir / "manifest.json", cmdline, hash, cfg.seed, cfg.steps, cfg.paths);

    bool ok = resid.q_hat_rel_rmse1 <= 0.05 && resid.q_hat_rel_rmse2 <= 0.05 &&
              resid.mean_q_rel_max1 <= 0.02 && resid.mean_q_rel_max2 <= 0.02;
    std::cout << "fbsde-check: " << (ok ? "PASS" : "FAIL") << "\n";
    return ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Solver and verification toolkit for two-player LQ mean-field games "
                 "with partial information"};
    app.require_subcommand(1);

    CommonOpts opts;
    double scale_gains = 1.0;
    int picard = 0;

    auto add_common = [&](CLI::App* sub, bool with_mc) {
        sub->add_option("config", opts.config_path, "game configuration file (JSON)")
            ->required();
        sub->add_option("--out", opts.out_dir, "output directory (default: run directory "
                                               "under $MFG_OUT_ROOT or ./runs)");
        sub->add_option("--steps", opts.steps, "time steps (overrides config)")
            ->check(CLI::PositiveNumber);
        if (with_mc) {
            sub->add_option("--paths", opts.paths, "Monte Carlo paths (overrides config)")
                ->check(CLI::PositiveNumber);
            sub->add_option("--seed", opts.seed, "master seed (overrides config)")
                ->check(CLI::NonNegativeNumber);
            sub->add_option("--threads", opts.threads, "worker threads (does not affect results)")
                ->check(CLI::PositiveNumber);
        }
    };

    CLI::App* validate = app.add_subcommand("validate", "check a config against the model "
                                                        "invariants");
    add_common(validate, false);
    CLI::App* solve = app.add_subcommand("solve", "solve the Riccati systems and export "
                                                  "tables and gains");
    add_common(solve, true);
    CLI::App* simulate = app.add_subcommand("simulate", "simulate equilibrium dynamics and "
                                                        "estimate costs");
    add_common(simulate, true);
    CLI::App* verify = app.add_subcommand("verify-nash", "certify the equilibrium via the "
                                                         "deviation battery");
    add_common(verify, true);
    verify->add_option("--scale-gains", scale_gains,
                       "scale candidate gains (diagnostic; 1.0 = the computed equilibrium)");
    CLI::App* fbsde = app.add_subcommand("fbsde-check", "regression FBSDE solve cross-checked "
                                                        "against the Riccati tables");
    add_common(fbsde, true);
    fbsde->add_option("--picard", picard, "max Picard iterations")->check(CLI::PositiveNumber);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 2;
    }

    const std::string cmdline = join_args(argc, argv);
    try {
        if (app.got_subcommand(validate)) return cmd_validate(opts);
        if (app.got_subcommand(solve)) return cmd_solve(opts, cmdline);
        if (app.got_subcommand(simulate)) return cmd_simulate(opts, cmdline);
        if (app.got_subcommand(verify)) return cmd_verify_nash(opts, scale_gains, cmdline);
        if (app.got_subcommand(fbsde)) return cmd_fbsde_check(opts, picard, cmdline);
    } catch (const mfg::ParseError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const mfg::BlowUpError& e) {
        std::cerr << "solver fault: " << e.what() << "\n";
        return 3;
    } catch (const mfg::NoConvergenceError& e) {
        std::cerr << "solver fault: " << e.what() << "\n";
        return 3;
    } catch (const mfg::RegressionSingularError& e) {
        std::cerr << "solver fault: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
    return 2;
}
