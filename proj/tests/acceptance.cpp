// Acceptance gate: one line per criterion, pass/fail verdicts with the
// tolerances stated inline. Exit code 0 only if every criterion passes.

#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "mfg/cost.hpp"
#include "mfg/fbsde.hpp"
#include "mfg/nash_verify.hpp"
#include "mfg/noise.hpp"
#include "mfg/riccati.hpp"
#include "mfg/sde.hpp"
#include "support.hpp"

using namespace mfg;
namespace fs = std::filesystem;

namespace {

int g_failures = 0;

double now_s() {
    using clk = std::chrono::steady_clock;
    static const auto t0 = clk::now();
    return std::chrono::duration<double>(clk::now() - t0).count();
}

void verdict(int criterion, const char* what, bool pass, const std::string& detail) {
    std::printf("criterion %2d [%s] %s (%s)\n", criterion, pass ? "pass" : "FAIL", what,
                detail.c_str());
    if (!pass) ++g_failures;
}

std::string fmt(const char* f, ...) {
    char buf[512];
    va_list args;
    va_start(args, f);
    std::vsnprintf(buf, sizeof buf, f, args);
    va_end(args);
    return buf;
}

// --- 1: gain decomposition identity ---------------------------------------
void criterion_identity() {
    const double t0 = now_s();
    auto worst_for = [](const LqGameSpec& spec) {
        TimeGrid grid(spec.horizon, 2000);
        auto t = solve_riccati(spec, grid);
        double w = 0.0;
        for (int k = 0; k <= 2000; ++k) {
            w = std::max(w, std::fabs(t.alpha1.y[k] - t.tau1.y[k] - t.delta1.y[k]));
            w = std::max(w, std::fabs(t.alpha2.y[k] - t.tau2.y[k] - t.delta2.y[k]));
        }
        return w;
    };
    double worst = worst_for(testsup::s1());
    std::mt19937_64 rng(20240817);
    for (int i = 0; i < 20; ++i) worst = std::max(worst, worst_for(testsup::random_a3_spec(rng)));
    const double elapsed = now_s() - t0;
    verdict(1, "alpha = tau + delta at N=2000, reference + 20 random specs",
            worst <= 1e-8 && elapsed < 5.0,
            fmt("max |alpha-tau-delta| = %.3e (tol 1e-8), %.1fs (budget 5s)", worst, elapsed));
}

// --- 2: fourth-order convergence of the backward solves --------------------
void criterion_rk4_order() {
    const double t0 = now_s();
    auto spec = testsup::s1();
    std::vector<int> rungs{50, 100, 200, 400};
    std::vector<double> errs;
    for (int n : rungs) {
        TimeGrid grid(spec.horizon, n), ref_grid(spec.horizon, 10 * n);
        auto tau = solve_tau(spec, grid);
        auto ref = solve_tau(spec, ref_grid);
        double e = 0.0;
        for (int k = 0; k <= n; ++k) {
            e = std::max(e, std::fabs(tau[0].y[k] - ref[0].y[10 * k]));
            e = std::max(e, std::fabs(tau[1].y[k] - ref[1].y[10 * k]));
        }
        errs.push_back(e);
    }
    bool pass = true;
    double worst_ratio = 1e300;
    for (size_t i = 0; i + 1 < errs.size(); ++i) {
        const double ratio = errs[i] / std::max(errs[i + 1], 1e-300);
        worst_ratio = std::min(worst_ratio, ratio);
        if (ratio < std::pow(2.0, 3.5)) pass = false;
    }
    const double elapsed = now_s() - t0;
    verdict(2, "error halves at least 2^3.5 per doubling vs 10x reference",
            pass && elapsed < 10.0,
            fmt("errors %.2e..%.2e, min ratio %.1f (need >= 11.3), %.1fs (budget 10s)",
                errs.front(), errs.back(), worst_ratio, elapsed));
}

// --- 3: mean-path cross-route agreement ------------------------------------
void criterion_mean_routes() {
    auto spec = testsup::s1();
    TimeGrid grid(spec.horizon, 2000);
    auto alpha = solve_alpha(spec, grid);
    auto closed = mean_state_closed_form(spec, alpha, grid);
    auto ode = mean_state_ode(spec, alpha, grid);
    double worst = 0.0;
    for (int k = 0; k <= 2000; ++k)
        worst = std::max(worst, std::fabs(closed[k] - ode[k]) / std::max(1.0, std::fabs(ode[k])));
    verdict(3, "mean path: quadrature route vs ODE route at N=2000", worst <= 1e-6,
            fmt("max relative gap %.3e (tol 1e-6)", worst));
}

// --- 4: strong order of the filter discretization --------------------------
void criterion_filter_order() {
    auto spec = testsup::s1();
    const int n_paths = 100;
    NoisePlan plan{4242, n_paths, TimeGrid(spec.horizon, 1024)};
    std::vector<PathBundle> bundles{generate_noise(plan, 4)};
    while (bundles.back().grid.n_steps > 128) bundles.push_back(coarsen(bundles.back()));
    // bundles now hold 1024, 512, 256, 128 on common Brownian paths

    std::vector<double> log2n, log2e;
    for (const PathBundle& noise : bundles) {
        TimeGrid grid(spec.horizon, noise.grid.n_steps);
        auto tables = solve_riccati(spec, grid);
        auto euler = simulate_filter(spec, tables, noise, 4);
        auto exact = filter_closed_form(spec, tables, noise, 4);
        double rms = 0.0;
        for (size_t i = 0; i < euler.size(); ++i)
            rms += (euler[i] - exact[i]) * (euler[i] - exact[i]);
        rms = std::sqrt(rms / euler.size());
        log2n.push_back(std::log2(static_cast<double>(noise.grid.n_steps)));
        log2e.push_back(std::log2(rms));
    }
    // least-squares slope of log2 error against log2 steps
    double sn = 0, se = 0, snn = 0, sne = 0;
    const int m = static_cast<int>(log2n.size());
    for (int i = 0; i < m; ++i) {
        sn += log2n[i];
        se += log2e[i];
        snn += log2n[i] * log2n[i];
        sne += log2n[i] * log2e[i];
    }
    const double slope = -(m * sne - sn * se) / (m * snn - sn * sn);
    verdict(4, "filter Euler scheme converges with strong order >= 0.9", slope >= 0.9,
            fmt("fitted order %.2f over N in {128,256,512,1024}, 100 paths", slope));
}

// --- 5: filter vs conditional-expectation oracle ---------------------------
void criterion_conditional_mean() {
    auto spec = testsup::s1();
    const int n = 512;
    TimeGrid grid(spec.horizon, n);
    auto tables = solve_riccati(spec, grid);
    auto gains = feedback_gains(spec, tables);
    NoisePlan plan{7, 1, grid};
    auto noise = generate_noise(plan);
    std::vector<double> dw1(noise.dw1.begin(), noise.dw1.begin() + n);

    auto est = conditional_mean_oracle(spec, gains, tables.ex_mean, dw1, 5000, 99);
    auto filt = simulate_filter(spec, tables, noise);
    bool pass = true;
    double worst_sigma = 0.0;
    for (int k : {n / 4, n / 2, 3 * n / 4, n}) {
        const double gap = std::fabs(est.mean[k] - filt[k]);
        const double sigma = gap / std::max(est.se[k], 1e-300);
        worst_sigma = std::max(worst_sigma, sigma);
        if (gap > 3.0 * est.se[k]) pass = false;
    }
    verdict(5, "filter equals E[x | observed channel] within 3 SE", pass,
            fmt("worst deviation %.2f SE at T/4..T, 5000 inner samples", worst_sigma));
}

// --- 6: Monte Carlo cost vs moment-ODE oracle -------------------------------
void criterion_cost_oracle() {
    auto spec = testsup::s1();
    const int n = 2048;
    TimeGrid grid(spec.horizon, n);
    auto tables = solve_riccati(spec, grid);
    auto gains = feedback_gains(spec, tables);
    auto [j1, j2] = exact_cost_moments(spec, gains, tables.ex_mean);

    // simulate in 10k-path batches (independent seeds) to bound peak memory,
    // pooling the per-path costs for the mean and standard error
    auto estimate = [&](int n_batches, uint64_t seed0) {
        std::vector<double> c1, c2;
        for (int bi = 0; bi < n_batches; ++bi) {
            NoisePlan plan{seed0 + static_cast<uint64_t>(bi), 10000, grid};
            auto noise = generate_noise(plan);
            auto paths = simulate_state(spec, equilibrium_policy(gains), tables.ex_mean, noise);
            auto b1 = per_path_cost(spec, paths, tables.ex_mean, 1);
            auto b2 = per_path_cost(spec, paths, tables.ex_mean, 2);
            c1.insert(c1.end(), b1.begin(), b1.end());
            c2.insert(c2.end(), b2.begin(), b2.end());
        }
        CostEstimate est;
        est.n_paths = static_cast<int>(c1.size());
        double s1 = 0, s2 = 0;
        for (double v : c1) s1 += v;
        for (double v : c2) s2 += v;
        est.j1 = s1 / est.n_paths;
        est.j2 = s2 / est.n_paths;
        double q1 = 0, q2 = 0;
        for (double v : c1) q1 += (v - est.j1) * (v - est.j1);
        for (double v : c2) q2 += (v - est.j2) * (v - est.j2);
        est.se1 = std::sqrt(q1 / est.n_paths / (est.n_paths - 1));
        est.se2 = std::sqrt(q2 / est.n_paths / (est.n_paths - 1));
        return est;
    };
    auto small = estimate(1, 314159);
    auto large = estimate(10, 271828);
    const bool band = std::fabs(small.j1 - j1) <= 3.0 * small.se1 &&
                      std::fabs(small.j2 - j2) <= 3.0 * small.se2 &&
                      std::fabs(large.j1 - j1) <= 3.0 * large.se1 &&
                      std::fabs(large.j2 - j2) <= 3.0 * large.se2;
    const double ratio = small.se1 / large.se1;
    const bool scaling = ratio >= 2.5 && ratio <= 4.0;
    verdict(6, "MC costs match the moment oracle within 3 SE at 1e4 and 1e5 paths",
            band && scaling,
            fmt("j1 gap %.2e (3SE %.2e), j2 gap %.2e (3SE %.2e), SE ratio %.2f in [2.5,4]",
                std::fabs(large.j1 - j1), 3.0 * large.se1, std::fabs(large.j2 - j2),
                3.0 * large.se2, ratio));
}

// --- 7 & 8: deviation battery and derivative/variational agreement ----------
void criterion_battery() {
    const double t0 = now_s();
    auto spec = testsup::s1();
    const int n = 512;
    TimeGrid grid(spec.horizon, n);
    auto tables = solve_riccati(spec, grid);
    auto gains = feedback_gains(spec, tables);
    NoisePlan plan{1, 10000, grid};

    NashVerifier verifier(spec, gains, plan);
    auto battery = deviation_battery(spec, grid, gains);
    auto report = verifier.run_battery(battery);
    int n_pass = 0;
    for (const auto& r : report.records)
        if (r.pass) ++n_pass;

    // negative control: candidate gains scaled by 1.5 must be rejected
    auto tampered = gains;
    for (auto* v : {&tampered.k_hat1, &tampered.k_hat2, &tampered.k_mean1, &tampered.k_mean2})
        for (double& g : *v) g *= 1.5;
    NashVerifier bad(spec, tampered, NoisePlan{2, 4000, grid});
    auto bad_report = bad.run_battery(deviation_battery(spec, grid, tampered));
    const double elapsed = now_s() - t0;

    verdict(7, "all 14 standard deviations pass; 1.5x-scaled gains are rejected",
            n_pass == 14 && report.all_pass && !bad_report.all_pass && elapsed < 120.0,
            fmt("%d/14 pass, negative control %s, %.1fs (budget 120s)", n_pass,
                bad_report.all_pass ? "NOT rejected" : "rejected", elapsed));

    bool agree = true;
    double worst_sigma = 0.0;
    for (const auto& r : report.records) {
        const double comb = std::sqrt(r.gateaux_se * r.gateaux_se + r.vi_se * r.vi_se);
        const double sigma = std::fabs(r.gateaux - r.vi_value) / std::max(comb, 1e-300);
        worst_sigma = std::max(worst_sigma, sigma);
        if (std::fabs(r.gateaux - r.vi_value) > 3.0 * comb) agree = false;
    }
    verdict(8, "derivative estimate matches the variational-inequality value", agree,
            fmt("worst gap %.2e combined-SE units (tol 3) across 14 deviations", worst_sigma));
}

// --- 9: FBSDE cross-validation ---------------------------------------------
void criterion_fbsde() {
    const double t0 = now_s();
    auto spec = testsup::s1();
    SolverConfig cfg;  // damping 0.5

    TimeGrid grid(spec.horizon, 256);
    auto sol = solve_lq_fbsde(spec, cfg, NoisePlan{8, 10000, grid});
    auto resid = check_against_riccati(sol, solve_riccati(spec, grid));
    const double rmse = std::max(resid.q_hat_rel_rmse1, resid.q_hat_rel_rmse2);
    const double mean_err = std::max(resid.mean_q_rel_max1, resid.mean_q_rel_max2);

    TimeGrid fine(spec.horizon, 512);
    auto sol_fine = solve_lq_fbsde(spec, cfg, NoisePlan{8, 40000, fine});
    auto resid_fine = check_against_riccati(sol_fine, solve_riccati(spec, fine));
    const double rmse_fine = std::max(resid_fine.q_hat_rel_rmse1, resid_fine.q_hat_rel_rmse2);
    const double elapsed = now_s() - t0;

    const bool pass = sol.iterations <= 30 && rmse <= 0.05 && mean_err <= 0.02 &&
                      rmse_fine <= 0.7 * rmse && elapsed < 300.0;
    verdict(9, "FBSDE solve matches Riccati and tightens under refinement", pass,
            fmt("%d iters (<=30), qhat RMSE %.3f%% (<=5%%), mean-q %.3f%% (<=2%%), "
                "refined RMSE %.3f%% (<=70%% of coarse), %.0fs (budget 300s)",
                sol.iterations, 100 * rmse, 100 * mean_err, 100 * rmse_fine, elapsed));
}

// --- 10: byte-identical outputs across thread counts ------------------------
void criterion_determinism() {
    const fs::path root = fs::temp_directory_path() / "mfg_acceptance_threads";
    fs::remove_all(root);
    fs::create_directories(root);
    const std::string cli = MFG_CLI_PATH;
    const std::string cfg = (fs::path(MFG_CONFIG_DIR) / "s1.json").string();

    auto slurp = [](const fs::path& p) {
        std::ifstream in(p, std::ios::binary);
        std::ostringstream os;
        os << in.rdbuf();
        return os.str();
    };
    bool pass = true;
    std::string detail = "solve+simulate CSVs identical for --threads 1 vs 4";
    for (int threads : {1, 4}) {
        const fs::path out = root / ("t" + std::to_string(threads));
        const std::string cmd = cli + " simulate " + cfg + " --steps 256 --paths 4000 --seed 5" +
                                " --threads " + std::to_string(threads) + " --out " +
                                out.string() + " > /dev/null 2>&1";
        if (std::system(cmd.c_str()) != 0) pass = false;
        const std::string cmd2 = cli + " solve " + cfg + " --steps 256 --out " + out.string() +
                                 " > /dev/null 2>&1";
        if (std::system(cmd2.c_str()) != 0) pass = false;
    }
    for (const char* f : {"paths.csv", "cost.json", "riccati.csv", "gains.csv"}) {
        if (slurp(root / "t1" / f) != slurp(root / "t4" / f) || slurp(root / "t1" / f).empty()) {
            pass = false;
            detail = std::string("mismatch or empty output in ") + f;
        }
    }
    fs::remove_all(root);
    verdict(10, "reruns are byte-identical across worker-thread counts", pass, detail);
}

}  // namespace

int main() {
    criterion_identity();
    criterion_rk4_order();
    criterion_mean_routes();
    criterion_filter_order();
    criterion_conditional_mean();
    criterion_cost_oracle();
    criterion_battery();  // criteria 7 and 8
    criterion_fbsde();
    criterion_determinism();
    if (g_failures == 0) {
        std::printf("acceptance: all criteria passed\n");
        return 0;
    }
    std::printf("acceptance: %d criterion(s) FAILED\n", g_failures);
    return 1;
}
