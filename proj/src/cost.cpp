#include "mfg/cost.hpp"

#include <cmath>

#include "reduce.hpp"
#include "rk4.hpp"

namespace mfg {

namespace {

double lerp_node(const std::vector<double>& v, const TimeGrid& grid, double t) {
    const int n = grid.n_steps;
    double s = t / grid.horizon * n;
    if (s <= 0.0) return v.front();
    if (s >= n) return v.back();
    int k = static_cast<int>(s);
    double w = s - k;
    return (1.0 - w) * v[k] + w * v[k + 1];
}

}  // namespace

std::vector<double> per_path_cost(const LqGameSpec& spec, const StatePathSet& paths,
                                  const std::vector<double>& ex_mean, int player) {
    const TimeGrid& grid = paths.grid;
    if (static_cast<int>(ex_mean.size()) != grid.n_nodes())
        throw GridMismatchError("per_path_cost: ex_mean length does not match grid");
    const int n = grid.n_steps;
    const double dt = grid.dt();

    const Coefficient& g = player == 1 ? spec.g1 : spec.g2;
    const Coefficient& gbar = player == 1 ? spec.gbar1 : spec.gbar2;
    const Coefficient& m = player == 1 ? spec.m1 : spec.m2;
    const double h = player == 1 ? spec.h1 : spec.h2;
    const double hbar = player == 1 ? spec.hbar1 : spec.hbar2;

    std::vector<double> gk(n + 1), gbark(n + 1), mk(n + 1);
    for (int k = 0; k <= n; ++k) {
        const double t = grid.node(k);
        gk[k] = g(t);
        gbark[k] = gbar(t);
        mk[k] = m(t);
    }

    std::vector<double> out(paths.n_paths);
    for (int p = 0; p < paths.n_paths; ++p) {
        double acc = 0.0;
        double prev = 0.0;
        for (int k = 0; k <= n; ++k) {
            const double x = paths.state(p, k);
            // the control on [t_k, t_{k+1}) is piecewise constant; use it at the
            // left node and carry the last one to T for the trapezoid endpoint
            const int kc = k < n ? k : n - 1;
            const double v = player == 1 ? paths.u1(p, kc) : paths.u2(p, kc);
            const double integrand =
                0.5 * (gk[k] * x * x + gbark[k] * ex_mean[k] * ex_mean[k] + mk[k] * v * v);
            if (k > 0) acc += 0.5 * dt * (prev + integrand);
            prev = integrand;
        }
        const double xT = paths.state(p, n);
        acc += 0.5 * (h * xT * xT + hbar * ex_mean[n] * ex_mean[n]);
        out[p] = acc;
    }
    return out;
}

CostEstimate estimate_cost_mc(const LqGameSpec& spec, const StatePathSet& paths,
                              const std::vector<double>& ex_mean) {
    CostEstimate est;
    est.n_paths = paths.n_paths;
    auto c1 = per_path_cost(spec, paths, ex_mean, 1);
    auto c2 = per_path_cost(spec, paths, ex_mean, 2);
    auto m1 = detail::mean_se(c1);
    auto m2 = detail::mean_se(c2);
    est.j1 = m1.mean;
    est.se1 = m1.se;
    est.j2 = m2.mean;
    est.se2 = m2.se;
    return est;
}

MomentTrajectory solve_moments(const LqGameSpec& spec, const GainTables& gains,
                               const std::vector<double>& ex_mean) {
    const TimeGrid& grid = gains.grid;
    if (static_cast<int>(ex_mean.size()) != grid.n_nodes())
        throw GridMismatchError("solve_moments: ex_mean length does not match grid");

    // state: (Ex, Exh, Exx, Exxh, Exhxh); feedback makes everything linear with
    // the supplied mean as deterministic forcing.
    auto rhs = [&](double t, const std::array<double, 5>& s) -> std::array<double, 5> {
        const double a = spec.a(t);
        const double bk = spec.b1(t) * lerp_node(gains.k_hat1, grid, t) +
                          spec.b2(t) * lerp_node(gains.k_hat2, grid, t);
        const double bl = spec.abar(t) + spec.b1(t) * lerp_node(gains.k_mean1, grid, t) +
                          spec.b2(t) * lerp_node(gains.k_mean2, grid, t);
        const double m = lerp_node(ex_mean, grid, t);
        const double c1 = spec.c1(t), c2 = spec.c2(t);
        const double fm = bl * m;
        const double ex = s[0], exh = s[1], exx = s[2], exxh = s[3], exhxh = s[4];
        return {a * ex + bk * exh + fm,
                (a + bk) * exh + fm,
                2.0 * (a * exx + bk * exxh + fm * ex) + c1 * c1 + c2 * c2,
                a * exxh + bk * exhxh + fm * exh + (a + bk) * exxh + fm * ex + c1 * c1,
                2.0 * ((a + bk) * exhxh + fm * exh) + c1 * c1};
    };
    const double x0 = spec.x0;
    auto y = detail::rk4_integrate<5>(grid, {x0, x0, x0 * x0, x0 * x0, x0 * x0}, +1, rhs, 0.0,
                                      nullptr);
    MomentTrajectory out;
    out.grid = grid;
    const int nn = grid.n_nodes();
    out.ex.resize(nn);
    out.exhat.resize(nn);
    out.exx.resize(nn);
    out.exxhat.resize(nn);
    out.exhxh.resize(nn);
    for (int k = 0; k < nn; ++k) {
        out.ex[k] = y[k][0];
        out.exhat[k] = y[k][1];
        out.exx[k] = y[k][2];
        out.exxhat[k] = y[k][3];
        out.exhxh[k] = y[k][4];
    }
    return out;
}

std::pair<double, double> exact_cost_moments(const LqGameSpec& spec, const GainTables& gains,
                                             const std::vector<double>& ex_mean) {
    MomentTrajectory mom = solve_moments(spec, gains, ex_mean);
    const TimeGrid& grid = gains.grid;
    const int n = grid.n_steps;
    const double dt = grid.dt();

    double j[2] = {0.0, 0.0};
    for (int player = 1; player <= 2; ++player) {
        const Coefficient& g = player == 1 ? spec.g1 : spec.g2;
        const Coefficient& gbar = player == 1 ? spec.gbar1 : spec.gbar2;
        const Coefficient& m = player == 1 ? spec.m1 : spec.m2;
        const std::vector<double>& kh = player == 1 ? gains.k_hat1 : gains.k_hat2;
        const std::vector<double>& km = player == 1 ? gains.k_mean1 : gains.k_mean2;
        const double h = player == 1 ? spec.h1 : spec.h2;
        const double hbar = player == 1 ? spec.hbar1 : spec.hbar2;

        double acc = 0.0, prev = 0.0;
        for (int k = 0; k <= n; ++k) {
            const double t = grid.node(k);
            const double mu = ex_mean[k];
            // E[u_i^2] = kh^2 E[xh^2] + 2 kh km mu E[xh] + km^2 mu^2
            const double eu2 = kh[k] * kh[k] * mom.exhxh[k] +
                               2.0 * kh[k] * km[k] * mu * mom.exhat[k] + km[k] * km[k] * mu * mu;
            const double integrand =
                0.5 * (g(t) * mom.exx[k] + gbar(t) * mu * mu + m(t) * eu2);
            if (k > 0) acc += 0.5 * dt * (prev + integrand);
            prev = integrand;
        }
        acc += 0.5 * (h * mom.exx[n] + hbar * ex_mean[n] * ex_mean[n]);
        j[player - 1] = acc;
    }
    return {j[0], j[1]};
}

}  // namespace mfg
