#include "mfg/nash_verify.hpp"

#include <cmath>

#include "reduce.hpp"

namespace mfg {

std::vector<Deviation> deviation_battery(const LqGameSpec& spec, const TimeGrid& grid,
                                         const GainTables& gains) {
    std::vector<Deviation> out;
    const double T = spec.horizon;
    for (int player : {1, 2}) {
        auto add = [&](const std::string& id,
                       std::function<double(int, double, double, double)> dir) {
            Deviation d;
            d.player = player;
            d.id = "p" + std::to_string(player) + "/" + id;
            d.direction = std::move(dir);
            out.push_back(std::move(d));
        };
        for (double c : {0.5, -0.5, 1.0})
            add("const_" + std::to_string(c),
                [c](int, double, double, double) { return c; });
        add("bang_half", [T](int, double t, double, double) { return t < 0.5 * T ? 1.0 : 0.0; });
        add("sin_feedback",
            [T](int, double t, double xh, double) { return std::sin(2.0 * M_PI * t / T) * xh; });
        for (double scale : {0.5, 1.5}) {
            const std::vector<double>& kh = player == 1 ? gains.k_hat1 : gains.k_hat2;
            const std::vector<double>& km = player == 1 ? gains.k_mean1 : gains.k_mean2;
            add("gain_x" + std::to_string(scale),
                [scale, kh, km](int k, double, double xh, double m) {
                    return scale * (kh[k] * xh + km[k] * m);
                });
        }
    }
    (void)grid;
    return out;
}

ConvexityReport convexity_check(const LqGameSpec& spec, const TimeGrid& grid) {
    ConvexityReport report;
    auto violate = [&](const std::string& name, double t, double v) {
        report.violations.push_back({name, t, v});
    };
    for (int k = 0; k < grid.n_nodes(); ++k) {
        const double t = grid.node(k);
        for (auto [name, c] :
             {std::pair{"H1 convexity: g1 >= 0", &spec.g1}, {"H2 convexity: g2 >= 0", &spec.g2},
              {"H1 convexity: gbar1 >= 0", &spec.gbar1}, {"H2 convexity: gbar2 >= 0", &spec.gbar2},
              {"H1 convexity: m1 >= 0", &spec.m1}, {"H2 convexity: m2 >= 0", &spec.m2}}) {
            double v = (*c)(t);
            if (v < 0.0) violate(name, t, v);
        }
    }
    for (auto [name, v] :
         {std::pair{"phi1 convexity: h1 >= 0", spec.h1}, {"phi2 convexity: h2 >= 0", spec.h2},
          {"phi1 convexity: hbar1 >= 0", spec.hbar1}, {"phi2 convexity: hbar2 >= 0", spec.hbar2}})
        if (v < 0.0) violate(name, spec.horizon, v);
    report.pass = report.violations.empty();
    return report;
}

NashVerifier::NashVerifier(const LqGameSpec& spec, const GainTables& gains,
                           const NoisePlan& plan)
    : spec_(spec), gains_(gains) {
    bundle_ = generate_noise(plan);
    base_ = simulate_with_particle_mean(spec_, equilibrium_policy(gains_), bundle_);
    j_base_[0] = per_path_cost(spec_, base_.paths, base_.mean, 1);
    j_base_[1] = per_path_cost(spec_, base_.paths, base_.mean, 2);
}

std::vector<double> NashVerifier::realize_direction(const Deviation& dev) const {
    const TimeGrid& grid = bundle_.grid;
    const int n = grid.n_steps;
    std::vector<double> v(static_cast<size_t>(bundle_.n_paths) * n);
    for (int p = 0; p < bundle_.n_paths; ++p)
        for (int k = 0; k < n; ++k)
            v[static_cast<size_t>(p) * n + k] =
                dev.direction(k, grid.node(k), base_.paths.filt(p, k), base_.mean[k]);
    return v;
}

std::vector<double> NashVerifier::per_path_cost_at(const Deviation& dev,
                                                   const std::vector<double>& vdir,
                                                   double eps) const {
    const std::vector<double>& u_dev = baseline_control(dev.player);
    std::vector<double> mixed(u_dev.size());
    for (size_t i = 0; i < mixed.size(); ++i)
        mixed[i] = u_dev[i] + eps * (vdir[i] - u_dev[i]);
    const std::vector<double>& v1 = dev.player == 1 ? mixed : base_.paths.v1;
    const std::vector<double>& v2 = dev.player == 2 ? mixed : base_.paths.v2;
    ParticleRun run = simulate_open_loop_particle_mean(spec_, v1, v2, bundle_);
    return per_path_cost(spec_, run.paths, run.mean, dev.player);
}

GateauxResult NashVerifier::gateaux(const Deviation& dev) const {
    const std::vector<double> vdir = realize_direction(dev);
    const std::vector<double>& j0 = j_base_[dev.player - 1];
    const int np = bundle_.n_paths;

    std::vector<double> ladder = dev.eps_ladder;
    if (ladder.size() < 2)
        throw LadderInconsistentError("gateaux: need at least two epsilon levels");

    // one-sided difference quotients per path and epsilon
    std::vector<std::vector<double>> quot(ladder.size(), std::vector<double>(np));
    for (size_t e = 0; e < ladder.size(); ++e) {
        auto je = per_path_cost_at(dev, vdir, ladder[e]);
        for (int p = 0; p < np; ++p) quot[e][p] = (je[p] - j0[p]) / ladder[e];
    }

    // The cost is an exact quadratic in eps, so a two-point extrapolation
    // removes the linear-in-eps term completely; successive pairs must agree.
    std::vector<detail::MeanSe> extrap;
    std::vector<double> rich(np);
    for (size_t e = 0; e + 1 < ladder.size(); ++e) {
        const double e1 = ladder[e], e2 = ladder[e + 1];
        for (int p = 0; p < np; ++p)
            rich[p] = (e1 * quot[e + 1][p] - e2 * quot[e][p]) / (e1 - e2);
        extrap.push_back(detail::mean_se(rich));
    }
    for (size_t i = 0; i + 1 < extrap.size(); ++i) {
        double gap = std::fabs(extrap[i].mean - extrap[i + 1].mean);
        double comb = std::sqrt(extrap[i].se * extrap[i].se + extrap[i + 1].se * extrap[i + 1].se);
        if (gap > 10.0 * std::max(comb, 1e-14))
            throw LadderInconsistentError("gateaux: ladder estimates disagree for " + dev.id);
    }

    GateauxResult res;
    res.derivative = extrap.back().mean;
    res.se = extrap.back().se;

    // full unilateral deviation (eps = 1)
    auto j_full = per_path_cost_at(dev, vdir, 1.0);
    std::vector<double> dj(np);
    for (int p = 0; p < np; ++p) dj[p] = j_full[p] - j0[p];
    auto ms = detail::mean_se(dj);
    res.dj_full = ms.mean;
    res.dj_full_se = ms.se;
    res.j_base = detail::mean_se(j0).mean;
    return res;
}

VariationalPath NashVerifier::variational_state(const Deviation& dev) const {
    const std::vector<double> vdir = realize_direction(dev);
    const std::vector<double>& u_dev = baseline_control(dev.player);
    const TimeGrid& grid = bundle_.grid;
    const int n = grid.n_steps;
    const int np = bundle_.n_paths;
    const double dt = grid.dt();

    const Coefficient& b = dev.player == 1 ? spec_.b1 : spec_.b2;

    VariationalPath vp;
    vp.grid = grid;
    vp.n_paths = np;
    vp.xi.assign(static_cast<size_t>(np) * (n + 1), 0.0);
    vp.mean.assign(n + 1, 0.0);

    std::vector<double> cur(np, 0.0);
    for (int k = 0; k < n; ++k) {
        const double t = grid.node(k);
        const double ak = spec_.a(t), abk = spec_.abar(t), bk = b(t);
        const double mk = vp.mean[k];
        for (int p = 0; p < np; ++p) {
            const size_t rv = static_cast<size_t>(p) * n + k;
            cur[p] += (ak * cur[p] + abk * mk + bk * (vdir[rv] - u_dev[rv])) * dt;
            vp.xi[static_cast<size_t>(p) * (n + 1) + k + 1] = cur[p];
        }
        vp.mean[k + 1] = detail::pairwise_sum(cur) / np;
    }
    return vp;
}

std::pair<double, double> NashVerifier::variational_inequality_value(
    const Deviation& dev, const VariationalPath& vp) const {
    const TimeGrid& grid = bundle_.grid;
    if (!(vp.grid == grid))
        throw GridMismatchError("variational_inequality_value: grids differ");
    const int n = grid.n_steps;
    const int np = bundle_.n_paths;
    const double dt = grid.dt();

    const int i = dev.player;
    const Coefficient& g = i == 1 ? spec_.g1 : spec_.g2;
    const Coefficient& gbar = i == 1 ? spec_.gbar1 : spec_.gbar2;
    const Coefficient& m = i == 1 ? spec_.m1 : spec_.m2;
    const double h = i == 1 ? spec_.h1 : spec_.h2;
    const double hbar = i == 1 ? spec_.hbar1 : spec_.hbar2;

    const std::vector<double> vdir = realize_direction(dev);
    const std::vector<double>& u_dev = baseline_control(i);

    // Same trapezoid weights and left-node control convention as the cost
    // evaluation, so this equals the discrete Gateaux derivative pathwise.
    std::vector<double> vals(np);
    for (int p = 0; p < np; ++p) {
        double acc = 0.0, prev = 0.0;
        for (int k = 0; k <= n; ++k) {
            const double t = grid.node(k);
            const int kc = k < n ? k : n - 1;
            const size_t rv = static_cast<size_t>(p) * n + kc;
            const double integrand = g(t) * base_.paths.state(p, k) * vp.at(p, k) +
                                     gbar(t) * base_.mean[k] * vp.mean[k] +
                                     m(t) * u_dev[rv] * (vdir[rv] - u_dev[rv]);
            if (k > 0) acc += 0.5 * dt * (prev + integrand);
            prev = integrand;
        }
        acc += h * base_.paths.state(p, n) * vp.at(p, n) + hbar * base_.mean[n] * vp.mean[n];
        vals[p] = acc;
    }
    auto ms = detail::mean_se(vals);
    return {ms.mean, ms.se};
}

NashReport NashVerifier::run_battery(const std::vector<Deviation>& battery) const {
    NashReport report;
    for (const Deviation& dev : battery) {
        DeviationRecord rec;
        rec.player = dev.player;
        rec.id = dev.id;
        GateauxResult gr = gateaux(dev);
        VariationalPath vp = variational_state(dev);
        auto [vi, vi_se] = variational_inequality_value(dev, vp);
        rec.dj = gr.dj_full;
        rec.dj_se = gr.dj_full_se;
        rec.gateaux = gr.derivative;
        rec.gateaux_se = gr.se;
        rec.vi_value = vi;
        rec.vi_se = vi_se;
        rec.tol_grad = std::max(3.0 * gr.se, 1e-4 * std::fabs(gr.j_base));
        // unconstrained interior equilibrium: derivative ~ 0 and no profitable
        // full deviation
        rec.pass = rec.dj >= -3.0 * rec.dj_se && std::fabs(rec.gateaux) <= rec.tol_grad;
        report.all_pass = report.all_pass && rec.pass;
        report.records.push_back(std::move(rec));
    }
    return report;
}

HamiltonianResidual hamiltonian_residual(
    const LqGameSpec& spec, const RiccatiTables& tables, const StatePathSet& paths,
    const std::function<double(int, int, int)>& q_hat_provider) {
    const TimeGrid& grid = paths.grid;
    if (!(tables.grid == grid))
        throw GridMismatchError("hamiltonian_residual: grids differ");
    const int n = grid.n_steps;

    HamiltonianResidual out;
    double ss[2] = {0.0, 0.0}, ss_scale[2] = {0.0, 0.0};
    double mx[2] = {0.0, 0.0};
    size_t count = 0;
    for (int p = 0; p < paths.n_paths; ++p) {
        for (int k = 0; k < n; ++k) {
            const double t = grid.node(k);
            for (int i = 1; i <= 2; ++i) {
                const double b = i == 1 ? spec.b1(t) : spec.b2(t);
                const double m = i == 1 ? spec.m1(t) : spec.m2(t);
                const double u = i == 1 ? paths.u1(p, k) : paths.u2(p, k);
                const double r = b * q_hat_provider(i, p, k) + m * u;
                ss[i - 1] += r * r;
                ss_scale[i - 1] += m * u * m * u;
                mx[i - 1] = std::max(mx[i - 1], std::fabs(r));
            }
        }
        count += n;
    }
    out.max1 = mx[0];
    out.max2 = mx[1];
    out.rms1 = std::sqrt(ss[0] / count);
    out.rms2 = std::sqrt(ss[1] / count);
    out.rms_scale1 = std::sqrt(ss_scale[0] / count);
    out.rms_scale2 = std::sqrt(ss_scale[1] / count);
    return out;
}

HamiltonianResidual hamiltonian_residual(const LqGameSpec& spec, const RiccatiTables& tables,
                                         const StatePathSet& paths) {
    return hamiltonian_residual(spec, tables, paths, [&](int i, int p, int k) {
        const double xh = paths.filt(p, k);
        const double m = tables.ex_mean[k];
        return i == 1 ? tables.tau1.y[k] * xh + tables.delta1.y[k] * m
                      : tables.tau2.y[k] * xh + tables.delta2.y[k] * m;
    });
}

// ---- general (non-LQ) route ----------------------------------------------

GeneralRun simulate_general(const GeneralGameSpec& g, const std::vector<double>& v1,
                            const std::vector<double>& v2, const PathBundle& noise) {
    const TimeGrid& grid = noise.grid;
    const int n = grid.n_steps;
    const int np = noise.n_paths;
    const double dt = grid.dt();

    GeneralRun run;
    run.paths.n_paths = np;
    run.paths.grid = grid;
    run.paths.x.resize(static_cast<size_t>(np) * (n + 1));
    run.paths.x_hat = run.paths.x;
    run.paths.v1 = v1;
    run.paths.v2 = v2;
    run.mean.assign(n + 1, 0.0);

    std::vector<double> xs(np, g.x0);
    for (int p = 0; p < np; ++p) run.paths.x[static_cast<size_t>(p) * (n + 1)] = g.x0;
    run.mean[0] = g.x0;
    for (int k = 0; k < n; ++k) {
        const double t = grid.node(k);
        const double m = run.mean[k];
        for (int p = 0; p < np; ++p) {
            const size_t rv = static_cast<size_t>(p) * n + k;
            xs[p] += g.f(t, xs[p], m, v1[rv], v2[rv]) * dt +
                     g.sigma1(t, xs[p], m, v1[rv], v2[rv]) * noise.w1(p, k) +
                     g.sigma2(t, xs[p], m, v1[rv], v2[rv]) * noise.w2(p, k);
            run.paths.x[static_cast<size_t>(p) * (n + 1) + k + 1] = xs[p];
        }
        run.mean[k + 1] = detail::pairwise_sum(xs) / np;
    }
    run.paths.x_hat = run.paths.x;

    for (int player = 1; player <= 2; ++player) {
        std::vector<double>& out = player == 1 ? run.cost1 : run.cost2;
        out.resize(np);
        const GeneralGameSpec::Fn& l = player == 1 ? g.l1 : g.l2;
        const GeneralGameSpec::TerminalFn& phi = player == 1 ? g.phi1 : g.phi2;
        for (int p = 0; p < np; ++p) {
            double acc = 0.0, prev = 0.0;
            for (int k = 0; k <= n; ++k) {
                const double t = grid.node(k);
                const int kc = k < n ? k : n - 1;
                const size_t rv = static_cast<size_t>(p) * n + kc;
                const double integrand =
                    l(t, run.paths.state(p, k), run.mean[k], v1[rv], v2[rv]);
                if (k > 0) acc += 0.5 * dt * (prev + integrand);
                prev = integrand;
            }
            acc += phi(run.paths.state(p, n), run.mean[n]);
            out[p] = acc;
        }
    }
    return run;
}

GateauxResult general_gateaux(const GeneralGameSpec& g, int player,
                              const std::vector<double>& u1, const std::vector<double>& u2,
                              const std::vector<double>& vdir, const PathBundle& noise,
                              const std::vector<double>& eps_ladder) {
    const std::vector<double>& u_dev = player == 1 ? u1 : u2;
    GeneralRun base = simulate_general(g, u1, u2, noise);
    const std::vector<double>& j0 = player == 1 ? base.cost1 : base.cost2;
    const int np = noise.n_paths;

    auto costs_at = [&](double eps) {
        std::vector<double> mixed(u_dev.size());
        for (size_t i = 0; i < mixed.size(); ++i)
            mixed[i] = u_dev[i] + eps * (vdir[i] - u_dev[i]);
        GeneralRun run = simulate_general(g, player == 1 ? mixed : u1,
                                          player == 2 ? mixed : u2, noise);
        return player == 1 ? run.cost1 : run.cost2;
    };

    if (eps_ladder.size() < 2)
        throw LadderInconsistentError("general_gateaux: need at least two epsilon levels");
    std::vector<std::vector<double>> quot(eps_ladder.size(), std::vector<double>(np));
    for (size_t e = 0; e < eps_ladder.size(); ++e) {
        auto je = costs_at(eps_ladder[e]);
        for (int p = 0; p < np; ++p) quot[e][p] = (je[p] - j0[p]) / eps_ladder[e];
    }
    std::vector<detail::MeanSe> extrap;
    std::vector<double> rich(np);
    for (size_t e = 0; e + 1 < eps_ladder.size(); ++e) {
        const double e1 = eps_ladder[e], e2 = eps_ladder[e + 1];
        for (int p = 0; p < np; ++p)
            rich[p] = (e1 * quot[e + 1][p] - e2 * quot[e][p]) / (e1 - e2);
        extrap.push_back(detail::mean_se(rich));
    }
    for (size_t i = 0; i + 1 < extrap.size(); ++i) {
        double gap = std::fabs(extrap[i].mean - extrap[i + 1].mean);
        double comb = std::sqrt(extrap[i].se * extrap[i].se + extrap[i + 1].se * extrap[i + 1].se);
        if (gap > 10.0 * std::max(comb, 1e-12))
            throw LadderInconsistentError("general_gateaux: ladder estimates disagree");
    }

    GateauxResult res;
    res.derivative = extrap.back().mean;
    res.se = extrap.back().se;
    auto j_full = costs_at(1.0);
    std::vector<double> dj(np);
    for (int p = 0; p < np; ++p) dj[p] = j_full[p] - j0[p];
    auto ms = detail::mean_se(dj);
    res.dj_full = ms.mean;
    res.dj_full_se = ms.se;
    res.j_base = detail::mean_se(j0).mean;
    return res;
}

VariationalPath general_variational_state(const GeneralGameSpec& g, int player,
                                          const std::vector<double>& u1,
                                          const std::vector<double>& u2,
                                          const std::vector<double>& vdir,
                                          const PathBundle& noise) {
    GeneralRun base = simulate_general(g, u1, u2, noise);
    const std::vector<double>& u_dev = player == 1 ? u1 : u2;
    const TimeGrid& grid = noise.grid;
    const int n = grid.n_steps;
    const int np = noise.n_paths;
    const double dt = grid.dt();

    const GeneralGameSpec::Fn& f_v = player == 1 ? g.f_v1 : g.f_v2;
    const GeneralGameSpec::Fn& s1_v = player == 1 ? g.sigma1_v1 : g.sigma1_v2;
    const GeneralGameSpec::Fn& s2_v = player == 1 ? g.sigma2_v1 : g.sigma2_v2;

    VariationalPath vp;
    vp.grid = grid;
    vp.n_paths = np;
    vp.xi.assign(static_cast<size_t>(np) * (n + 1), 0.0);
    vp.mean.assign(n + 1, 0.0);

    std::vector<double> cur(np, 0.0);
    for (int k = 0; k < n; ++k) {
        const double t = grid.node(k);
        const double mk = vp.mean[k];
        const double mx = base.mean[k];
        for (int p = 0; p < np; ++p) {
            const size_t rv = static_cast<size_t>(p) * n + k;
            const double x = base.paths.state(p, k);
            const double a1 = u1[rv], a2 = u2[rv];
            const double dv = vdir[rv] - u_dev[rv];
            cur[p] += (g.f_x(t, x, mx, a1, a2) * cur[p] + g.f_xt(t, x, mx, a1, a2) * mk +
                       f_v(t, x, mx, a1, a2) * dv) *
                          dt +
                      (g.sigma1_x(t, x, mx, a1, a2) * cur[p] +
                       g.sigma1_xt(t, x, mx, a1, a2) * mk + s1_v(t, x, mx, a1, a2) * dv) *
                          noise.w1(p, k) +
                      (g.sigma2_x(t, x, mx, a1, a2) * cur[p] +
                       g.sigma2_xt(t, x, mx, a1, a2) * mk + s2_v(t, x, mx, a1, a2) * dv) *
                          noise.w2(p, k);
            vp.xi[static_cast<size_t>(p) * (n + 1) + k + 1] = cur[p];
        }
        vp.mean[k + 1] = detail::pairwise_sum(cur) / np;
    }
    return vp;
}

}  // namespace mfg
