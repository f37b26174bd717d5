#include "mfg/riccati.hpp"

#include <cmath>

#include "rk4.hpp"

namespace mfg {

namespace {

// b_i^2 / m_i, the control-effectiveness ratios (equal under A3).
struct Ratios {
    const LqGameSpec& s;
    double r1(double t) const { double b = s.b1(t); return b * b / s.m1(t); }
    double r2(double t) const { double b = s.b2(t); return b * b / s.m2(t); }
};

std::array<Curve, 2> split(const std::vector<std::array<double, 2>>& y,
                           const std::vector<std::array<double, 2>>& dy) {
    std::array<Curve, 2> out;
    for (int j = 0; j < 2; ++j) {
        out[j].y.resize(y.size());
        out[j].dy.resize(y.size());
        for (size_t k = 0; k < y.size(); ++k) {
            out[j].y[k] = y[k][j];
            out[j].dy[k] = dy[k][j];
        }
    }
    return out;
}

}  // namespace

std::array<Curve, 2> solve_alpha(const LqGameSpec& spec, const TimeGrid& grid) {
    Ratios r{spec};
    auto rhs = [&](double t, const std::array<double, 2>& v) -> std::array<double, 2> {
        const double a2 = 2.0 * (spec.a(t) + spec.abar(t));
        const double r1 = r.r1(t), r2 = r.r2(t);
        return {-a2 * v[0] + r1 * v[0] * v[0] + r2 * v[0] * v[1] - spec.g1(t) - spec.gbar1(t),
                -a2 * v[1] + r1 * v[0] * v[1] + r2 * v[1] * v[1] - spec.g2(t) - spec.gbar2(t)};
    };
    std::vector<std::array<double, 2>> dy;
    auto y = detail::rk4_integrate<2>(grid, {spec.h1 + spec.hbar1, spec.h2 + spec.hbar2}, -1,
                                      rhs, kBlowUpThreshold, &dy);
    return split(y, dy);
}

std::array<Curve, 2> solve_tau(const LqGameSpec& spec, const TimeGrid& grid) {
    Ratios r{spec};
    auto rhs = [&](double t, const std::array<double, 2>& v) -> std::array<double, 2> {
        const double a2 = 2.0 * spec.a(t);
        const double r1 = r.r1(t), r2 = r.r2(t);
        return {-a2 * v[0] + r1 * v[0] * v[0] + r2 * v[0] * v[1] - spec.g1(t),
                -a2 * v[1] + r2 * v[1] * v[1] + r1 * v[0] * v[1] - spec.g2(t)};
    };
    std::vector<std::array<double, 2>> dy;
    auto y = detail::rk4_integrate<2>(grid, {spec.h1, spec.h2}, -1, rhs, kBlowUpThreshold, &dy);
    return split(y, dy);
}

std::array<Curve, 2> solve_delta(const LqGameSpec& spec, const TimeGrid& grid,
                                 const std::array<Curve, 2>& alpha,
                                 const std::array<Curve, 2>& tau) {
    Ratios r{spec};
    auto rhs = [&](double t, const std::array<double, 2>& v) -> std::array<double, 2> {
        const double ab = spec.abar(t);
        const double r1 = r.r1(t), r2 = r.r2(t);
        const double a1 = alpha[0].eval(grid, t), a2v = alpha[1].eval(grid, t);
        const double t1 = tau[0].eval(grid, t), t2 = tau[1].eval(grid, t);
        const double common = 2.0 * spec.a(t) + ab - r1 * a1 - r2 * a2v;
        return {-(common - r1 * t1) * v[0] + r2 * t1 * v[1] - ab * t1 - ab * a1 - spec.gbar1(t),
                -(common - r2 * t2) * v[1] + r1 * t2 * v[0] - ab * t2 - ab * a2v - spec.gbar2(t)};
    };
    std::vector<std::array<double, 2>> dy;
    // Linear in delta for bounded alpha/tau; blow-up here would mean broken inputs.
    auto y = detail::rk4_integrate<2>(grid, {spec.hbar1, spec.hbar2}, -1, rhs,
                                      kBlowUpThreshold, &dy);
    return split(y, dy);
}

std::vector<double> mean_state_closed_form(const LqGameSpec& spec,
                                           const std::array<Curve, 2>& alpha,
                                           const TimeGrid& grid) {
    const int n = grid.n_steps;
    const double dt = grid.dt();
    std::vector<double> out(n + 1);
    auto integrand = [&](int k) {
        const double t = grid.node(k);
        const double b1 = spec.b1(t);
        return spec.a(t) + spec.abar(t) -
               b1 * b1 / spec.m1(t) * (alpha[0].y[k] + alpha[1].y[k]);
    };
    double acc = 0.0;
    out[0] = spec.x0;
    double prev = integrand(0);
    for (int k = 1; k <= n; ++k) {
        double cur = integrand(k);
        acc += 0.5 * dt * (prev + cur);
        out[k] = spec.x0 * std::exp(acc);
        prev = cur;
    }
    return out;
}

std::vector<double> mean_state_ode(const LqGameSpec& spec, const std::array<Curve, 2>& alpha,
                                   const TimeGrid& grid) {
    Ratios r{spec};
    auto rhs = [&](double t, const std::array<double, 1>& v) -> std::array<double, 1> {
        return {(spec.a(t) + spec.abar(t) - r.r1(t) * alpha[0].eval(grid, t) -
                 r.r2(t) * alpha[1].eval(grid, t)) *
                v[0]};
    };
    auto y = detail::rk4_integrate<1>(grid, {spec.x0}, +1, rhs, 0.0, nullptr);
    std::vector<double> out(y.size());
    for (size_t k = 0; k < y.size(); ++k) out[k] = y[k][0];
    return out;
}

RiccatiTables solve_riccati(const LqGameSpec& spec, const TimeGrid& grid) {
    RiccatiTables t;
    t.grid = grid;
    auto alpha = solve_alpha(spec, grid);
    auto tau = solve_tau(spec, grid);
    auto delta = solve_delta(spec, grid, alpha, tau);
    t.alpha1 = std::move(alpha[0]);
    t.alpha2 = std::move(alpha[1]);
    t.tau1 = std::move(tau[0]);
    t.tau2 = std::move(tau[1]);
    t.delta1 = std::move(delta[0]);
    t.delta2 = std::move(delta[1]);
    t.ex_mean = mean_state_closed_form(spec, {t.alpha1, t.alpha2}, grid);
    return t;
}

GainTables feedback_gains(const LqGameSpec& spec, const RiccatiTables& tables) {
    const TimeGrid& grid = tables.grid;
    GainTables g;
    g.grid = grid;
    const int nn = grid.n_nodes();
    g.k_hat1.resize(nn);
    g.k_hat2.resize(nn);
    g.k_mean1.resize(nn);
    g.k_mean2.resize(nn);
    for (int k = 0; k < nn; ++k) {
        const double t = grid.node(k);
        const double f1 = -spec.b1(t) / spec.m1(t);
        const double f2 = -spec.b2(t) / spec.m2(t);
        g.k_hat1[k] = f1 * tables.tau1.y[k];
        g.k_hat2[k] = f2 * tables.tau2.y[k];
        g.k_mean1[k] = f1 * tables.delta1.y[k];
        g.k_mean2[k] = f2 * tables.delta2.y[k];
    }
    return g;
}

}  // namespace mfg
