#include "mfg/game_spec.hpp"

#include <cmath>
#include <random>

namespace mfg {

ValidationReport validate_lq(const LqGameSpec& spec, const TimeGrid& grid, double tol_a3) {
    ValidationReport report;
    auto violate = [&](const std::string& name, double t, double mag) {
        report.violations.push_back({name, t, mag});
    };

    for (int k = 0; k < grid.n_nodes(); ++k) {
        const double t = grid.node(k);
        const double m1 = spec.m1(t), m2 = spec.m2(t);
        if (!(m1 > 0.0)) violate("m1 > 0", t, m1);
        if (!(m2 > 0.0)) violate("m2 > 0", t, m2);
        for (auto [name, c] : {std::pair{"g1 >= 0", &spec.g1}, {"g2 >= 0", &spec.g2},
                               {"gbar1 >= 0", &spec.gbar1}, {"gbar2 >= 0", &spec.gbar2}}) {
            double v = (*c)(t);
            if (v < 0.0) violate(name, t, v);
        }
        const double b1 = spec.b1(t), b2 = spec.b2(t);
        if (b1 * b2 == 0.0) violate("b1 * b2 != 0", t, b1 * b2);
        if (m1 > 0.0 && m2 > 0.0) {
            double gap = std::fabs(b1 * b1 / m1 - b2 * b2 / m2);
            if (gap > tol_a3) violate("A3: b1^2/m1 == b2^2/m2", t, gap);
        }
    }
    for (auto [name, v] : {std::pair{"h1 >= 0", spec.h1}, {"h2 >= 0", spec.h2},
                           {"hbar1 >= 0", spec.hbar1}, {"hbar2 >= 0", spec.hbar2}})
        if (v < 0.0) violate(name, spec.horizon, v);

    report.pass = report.violations.empty();
    return report;
}

GeneralGameSpec lq_as_general(const LqGameSpec& s) {
    GeneralGameSpec g;
    g.horizon = s.horizon;
    g.x0 = s.x0;

    g.f = [s](double t, double x, double xt, double v1, double v2) {
        return s.a(t) * x + s.abar(t) * xt + s.b1(t) * v1 + s.b2(t) * v2;
    };
    g.sigma1 = [s](double t, double, double, double, double) { return s.c1(t); };
    g.sigma2 = [s](double t, double, double, double, double) { return s.c2(t); };
    g.l1 = [s](double t, double x, double xt, double v1, double) {
        return 0.5 * (s.g1(t) * x * x + s.gbar1(t) * xt * xt + s.m1(t) * v1 * v1);
    };
    g.l2 = [s](double t, double x, double xt, double, double v2) {
        return 0.5 * (s.g2(t) * x * x + s.gbar2(t) * xt * xt + s.m2(t) * v2 * v2);
    };
    g.phi1 = [s](double x, double xt) { return 0.5 * (s.h1 * x * x + s.hbar1 * xt * xt); };
    g.phi2 = [s](double x, double xt) { return 0.5 * (s.h2 * x * x + s.hbar2 * xt * xt); };

    auto zero = [](double, double, double, double, double) { return 0.0; };
    g.f_x = [s](double t, double, double, double, double) { return s.a(t); };
    g.f_xt = [s](double t, double, double, double, double) { return s.abar(t); };
    g.f_v1 = [s](double t, double, double, double, double) { return s.b1(t); };
    g.f_v2 = [s](double t, double, double, double, double) { return s.b2(t); };
    g.sigma1_x = g.sigma1_xt = g.sigma1_v1 = g.sigma1_v2 = zero;
    g.sigma2_x = g.sigma2_xt = g.sigma2_v1 = g.sigma2_v2 = zero;
    g.l1_x = [s](double t, double x, double, double, double) { return s.g1(t) * x; };
    g.l1_xt = [s](double t, double, double xt, double, double) { return s.gbar1(t) * xt; };
    g.l1_v1 = [s](double t, double, double, double v1, double) { return s.m1(t) * v1; };
    g.l2_x = [s](double t, double x, double, double, double) { return s.g2(t) * x; };
    g.l2_xt = [s](double t, double, double xt, double, double) { return s.gbar2(t) * xt; };
    g.l2_v2 = [s](double t, double, double, double, double v2) { return s.m2(t) * v2; };
    g.phi1_x = [s](double x, double) { return s.h1 * x; };
    g.phi1_xt = [s](double, double xt) { return s.hbar1 * xt; };
    g.phi2_x = [s](double x, double) { return s.h2 * x; };
    g.phi2_xt = [s](double, double xt) { return s.hbar2 * xt; };
    return g;
}

DerivativeProbeReport check_general_derivatives(const GeneralGameSpec& g, int n_probes,
                                                unsigned long long seed, double rel_tol,
                                                double fd_step) {
    DerivativeProbeReport report;
    report.n_probes = n_probes;
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> ut(0.0, g.horizon);
    std::uniform_real_distribution<double> ux(-2.0, 2.0);

    // index: 0=x, 1=xt, 2=v1, 3=v2
    auto central = [&](const GeneralGameSpec::Fn& fn, double t, double p[4], int arg) {
        double lo[4] = {p[0], p[1], p[2], p[3]}, hi[4] = {p[0], p[1], p[2], p[3]};
        lo[arg] -= fd_step;
        hi[arg] += fd_step;
        return (fn(t, hi[0], hi[1], hi[2], hi[3]) - fn(t, lo[0], lo[1], lo[2], lo[3])) /
               (2.0 * fd_step);
    };
    auto probe = [&](const char* name, const GeneralGameSpec::Fn& fn,
                     const GeneralGameSpec::Fn& dfn, double t, double p[4], int arg) {
        if (!fn || !dfn) return;
        double fd = central(fn, t, p, arg);
        double an = dfn(t, p[0], p[1], p[2], p[3]);
        double rel = std::fabs(fd - an) / std::max(1.0, std::fabs(an));
        if (rel > report.worst_rel_error) {
            report.worst_rel_error = rel;
            report.worst_name = name;
        }
        if (rel > rel_tol) report.pass = false;
    };

    for (int i = 0; i < n_probes; ++i) {
        double t = ut(rng);
        double p[4] = {ux(rng), ux(rng), ux(rng), ux(rng)};
        probe("f_x", g.f, g.f_x, t, p, 0);
        probe("f_xt", g.f, g.f_xt, t, p, 1);
        probe("f_v1", g.f, g.f_v1, t, p, 2);
        probe("f_v2", g.f, g.f_v2, t, p, 3);
        probe("sigma1_x", g.sigma1, g.sigma1_x, t, p, 0);
        probe("sigma1_xt", g.sigma1, g.sigma1_xt, t, p, 1);
        probe("sigma1_v1", g.sigma1, g.sigma1_v1, t, p, 2);
        probe("sigma1_v2", g.sigma1, g.sigma1_v2, t, p, 3);
        probe("sigma2_x", g.sigma2, g.sigma2_x, t, p, 0);
        probe("sigma2_xt", g.sigma2, g.sigma2_xt, t, p, 1);
        probe("sigma2_v1", g.sigma2, g.sigma2_v1, t, p, 2);
        probe("sigma2_v2", g.sigma2, g.sigma2_v2, t, p, 3);
        probe("l1_x", g.l1, g.l1_x, t, p, 0);
        probe("l1_xt", g.l1, g.l1_xt, t, p, 1);
        probe("l1_v1", g.l1, g.l1_v1, t, p, 2);
        probe("l2_x", g.l2, g.l2_x, t, p, 0);
        probe("l2_xt", g.l2, g.l2_xt, t, p, 1);
        probe("l2_v2", g.l2, g.l2_v2, t, p, 3);

        if (g.phi1 && g.phi1_x) {
            auto wrap = [&](const GeneralGameSpec::TerminalFn& fn) {
                return GeneralGameSpec::Fn(
                    [fn](double, double x, double xt, double, double) { return fn(x, xt); });
            };
            probe("phi1_x", wrap(g.phi1), wrap(g.phi1_x), t, p, 0);
            probe("phi1_xt", wrap(g.phi1), wrap(g.phi1_xt), t, p, 1);
            probe("phi2_x", wrap(g.phi2), wrap(g.phi2_x), t, p, 0);
            probe("phi2_xt", wrap(g.phi2), wrap(g.phi2_xt), t, p, 1);
        }
    }
    return report;
}

}  // namespace mfg
