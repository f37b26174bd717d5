#include "mfg/fbsde.hpp"

#include <cmath>

#include "mfg/sde.hpp"
#include "reduce.hpp"

namespace mfg {

namespace {

struct AffineFit {
    double c0 = 0.0, cx = 0.0, cxh = 0.0;  // value = c0 + cx * x + cxh * x_hat
};

// OLS of y onto {1, x, x_hat} with centered normal equations. Collinear or
// variance-free columns are dropped (c2 = 0 makes x == x_hat; c1 = 0 freezes
// x_hat; at t = 0 both columns are the constant x0 and the fit is the mean).
AffineFit fit_affine(std::span<const double> x, std::span<const double> xh,
                     std::span<const double> y) {
    const size_t n = y.size();
    const double mx = detail::pairwise_sum(x) / n;
    const double mxh = detail::pairwise_sum(xh) / n;
    const double my = detail::pairwise_sum(y) / n;

    double sxx = 0, shh = 0, sxh = 0, sxy = 0, shy = 0;
    for (size_t i = 0; i < n; ++i) {
        const double dx = x[i] - mx, dh = xh[i] - mxh, dy = y[i] - my;
        sxx += dx * dx;
        shh += dh * dh;
        sxh += dx * dh;
        sxy += dx * dy;
        shy += dh * dy;
    }
    const double scale = std::max(sxx, shh);

    AffineFit f;
    if (scale < 1e-14 * n) {
        f.c0 = my;
        return f;
    }
    const double det = sxx * shh - sxh * sxh;
    if (det > 1e-10 * scale * scale) {
        f.cx = (shh * sxy - sxh * shy) / det;
        f.cxh = (sxx * shy - sxh * sxy) / det;
    } else if (shh >= sxx) {
        f.cxh = shy / shh;
    } else {
        f.cx = sxy / sxx;
    }
    f.c0 = my - f.cx * mx - f.cxh * mxh;
    return f;
}

// OLS of y onto {1, x_hat}; the filtered-costate representation.
std::pair<double, double> fit_filtered(std::span<const double> xh, std::span<const double> y) {
    const size_t n = y.size();
    const double mxh = detail::pairwise_sum(xh) / n;
    const double my = detail::pairwise_sum(y) / n;
    double shh = 0, shy = 0;
    for (size_t i = 0; i < n; ++i) {
        const double dh = xh[i] - mxh, dy = y[i] - my;
        shh += dh * dh;
        shy += dh * dy;
    }
    double slope = shh > 1e-14 * n ? shy / shh : 0.0;
    return {my - slope * mxh, slope};
}

}  // namespace

FbsdeSolution solve_lq_fbsde(const LqGameSpec& spec, const SolverConfig& config,
                             const NoisePlan& plan) {
    if (!(config.picard_tol > 0.0)) throw std::invalid_argument("picard_tol must be positive");
    if (!(config.damping > 0.0 && config.damping <= 1.0))
        throw std::invalid_argument("damping must be in (0, 1]");

    const TimeGrid& grid = plan.grid;
    const int n = grid.n_steps;
    const int np = plan.n_paths;
    const double dt = grid.dt();
    const double theta = config.damping;
    const PathBundle noise = generate_noise(plan);

    // node coefficient tables
    std::vector<double> at(n + 1), abart(n + 1), b1t(n + 1), b2t(n + 1), c1t(n + 1), c2t(n + 1),
        g1t(n + 1), g2t(n + 1), gb1t(n + 1), gb2t(n + 1), m1t(n + 1), m2t(n + 1);
    for (int k = 0; k <= n; ++k) {
        const double t = grid.node(k);
        at[k] = spec.a(t);
        abart[k] = spec.abar(t);
        b1t[k] = spec.b1(t);
        b2t[k] = spec.b2(t);
        c1t[k] = spec.c1(t);
        c2t[k] = spec.c2(t);
        g1t[k] = spec.g1(t);
        g2t[k] = spec.g2(t);
        gb1t[k] = spec.gbar1(t);
        gb2t[k] = spec.gbar2(t);
        m1t[k] = spec.m1(t);
        m2t[k] = spec.m2(t);
    }

    // control tables u_i(k, x_hat) = u_c0[i][k] + u_c1[i][k] * x_hat
    std::vector<double> u_c0[2] = {std::vector<double>(n + 1, 0.0),
                                   std::vector<double>(n + 1, 0.0)};
    std::vector<double> u_c1[2] = {std::vector<double>(n + 1, 0.0),
                                   std::vector<double>(n + 1, 0.0)};

    FbsdeSolution sol;
    sol.grid = grid;
    sol.n_paths = np;
    const size_t nodes = static_cast<size_t>(n + 1);
    sol.x.resize(np * nodes);
    sol.x_hat.resize(np * nodes);
    sol.mean.resize(nodes);
    sol.q1.resize(np * nodes);
    sol.q2.resize(np * nodes);
    sol.k11.resize(n);
    sol.k12.resize(n);
    sol.k21.resize(n);
    sol.k22.resize(n);
    for (int i = 0; i < 2; ++i) {
        sol.q_hat_c0[i].resize(nodes);
        sol.q_hat_c1[i].resize(nodes);
    }

    std::vector<double> xs(np), xhs(np), q[2], target(np), xcol(np), xhcol(np);
    q[0].resize(np);
    q[1].resize(np);

    bool converged = false;
    int it = 0;
    double change = 0.0;
    for (it = 1; it <= config.max_picard; ++it) {
        // forward pass: lockstep particle mean
        std::fill(xs.begin(), xs.end(), spec.x0);
        std::fill(xhs.begin(), xhs.end(), spec.x0);
        sol.mean[0] = spec.x0;
        for (int p = 0; p < np; ++p) {
            sol.x[p * nodes] = spec.x0;
            sol.x_hat[p * nodes] = spec.x0;
        }
        for (int k = 0; k < n; ++k) {
            const double m = sol.mean[k];
            for (int p = 0; p < np; ++p) {
                const double u1 = u_c0[0][k] + u_c1[0][k] * xhs[p];
                const double u2 = u_c0[1][k] + u_c1[1][k] * xhs[p];
                const double drift_common = abart[k] * m + b1t[k] * u1 + b2t[k] * u2;
                const double d1 = noise.w1(p, k), d2 = noise.w2(p, k);
                xs[p] += (at[k] * xs[p] + drift_common) * dt + c1t[k] * d1 + c2t[k] * d2;
                xhs[p] += (at[k] * xhs[p] + drift_common) * dt + c1t[k] * d1;
                sol.x[p * nodes + k + 1] = xs[p];
                sol.x_hat[p * nodes + k + 1] = xhs[p];
            }
            sol.mean[k + 1] = detail::pairwise_sum(xs) / np;
        }

        // a noiseless bundle cannot support conditional-expectation regression
        {
            double var = 0.0;
            for (int p = 0; p < np; ++p) {
                const double d = sol.x[p * nodes + n] - sol.mean[n];
                var += d * d;
            }
            if (var / np < 1e-18 * (1.0 + spec.x0 * spec.x0))
                throw RegressionSingularError(
                    "path bundle is degenerate (no diffusion); regression Gram is singular");
        }

        // backward pass: explicit regression of the discrete costate targets
        for (int i = 0; i < 2; ++i) {
            const std::vector<double>& g = i == 0 ? g1t : g2t;
            const std::vector<double>& gb = i == 0 ? gb1t : gb2t;
            const double h = i == 0 ? spec.h1 : spec.h2;
            const double hbar = i == 0 ? spec.hbar1 : spec.hbar2;
            std::vector<double>& qi = i == 0 ? sol.q1 : sol.q2;
            std::vector<double>& ki1 = i == 0 ? sol.k11 : sol.k21;
            std::vector<double>& ki2 = i == 0 ? sol.k12 : sol.k22;

            for (int p = 0; p < np; ++p)
                q[i][p] = h * sol.x[p * nodes + n] + hbar * sol.mean[n];
            for (int p = 0; p < np; ++p) qi[p * nodes + n] = q[i][p];
            {
                for (int p = 0; p < np; ++p) xhcol[p] = sol.x_hat[p * nodes + n];
                auto [c0, c1] = fit_filtered(xhcol, q[i]);
                sol.q_hat_c0[i][n] = c0;
                sol.q_hat_c1[i][n] = c1;
            }

            for (int k = n - 1; k >= 0; --k) {
                const double eq = detail::pairwise_sum(q[i]) / np;
                for (int p = 0; p < np; ++p) {
                    // driver of the adjoint equation at t_{k+1}
                    target[p] = q[i][p] + dt * (at[k + 1] * q[i][p] + abart[k + 1] * eq +
                                                g[k + 1] * sol.x[p * nodes + k + 1] +
                                                gb[k + 1] * sol.mean[k + 1]);
                }

                // martingale integrands (diagnostic): covariance with the step noise
                double s1 = 0, s2 = 0;
                for (int p = 0; p < np; ++p) {
                    s1 += target[p] * noise.w1(p, k);
                    s2 += target[p] * noise.w2(p, k);
                }
                ki1[k] = s1 / (np * dt);
                ki2[k] = s2 / (np * dt);

                for (int p = 0; p < np; ++p) {
                    xcol[p] = sol.x[p * nodes + k];
                    xhcol[p] = sol.x_hat[p * nodes + k];
                }
                const AffineFit fit = fit_affine(xcol, xhcol, target);
                for (int p = 0; p < np; ++p) {
                    q[i][p] = fit.c0 + fit.cx * xcol[p] + fit.cxh * xhcol[p];
                    qi[p * nodes + k] = q[i][p];
                }
                auto [c0, c1] = fit_filtered(xhcol, target);
                sol.q_hat_c0[i][k] = c0;
                sol.q_hat_c1[i][k] = c1;
            }
        }

        // damped control update toward -b_i q_hat_i / m_i; convergence is the
        // relative L2 change over the current bundle
        double num = 0.0, den = 0.0;
        for (int i = 0; i < 2; ++i) {
            const std::vector<double>& b = i == 0 ? b1t : b2t;
            const std::vector<double>& m = i == 0 ? m1t : m2t;
            for (int k = 0; k <= n; ++k) {
                const double t0 = -b[k] / m[k] * sol.q_hat_c0[i][k];
                const double t1 = -b[k] / m[k] * sol.q_hat_c1[i][k];
                const double n0 = (1.0 - theta) * u_c0[i][k] + theta * t0;
                const double n1 = (1.0 - theta) * u_c1[i][k] + theta * t1;
                // second moments of x_hat at node k over the bundle
                double sxh = 0, sxh2 = 0;
                for (int p = 0; p < np; ++p) {
                    const double v = sol.x_hat[p * nodes + k];
                    sxh += v;
                    sxh2 += v * v;
                }
                sxh /= np;
                sxh2 /= np;
                const double d0 = n0 - u_c0[i][k], d1 = n1 - u_c1[i][k];
                num += (d0 * d0 + 2 * d0 * d1 * sxh + d1 * d1 * sxh2) * dt;
                den += (n0 * n0 + 2 * n0 * n1 * sxh + n1 * n1 * sxh2) * dt;
                u_c0[i][k] = n0;
                u_c1[i][k] = n1;
            }
        }
        change = std::sqrt(num) / std::max(std::sqrt(den), 1e-12);
        sol.control_change.push_back(change);
        if (change < config.picard_tol) {
            converged = true;
            break;
        }
    }
    if (!converged) throw NoConvergenceError(config.max_picard, change);
    sol.iterations = static_cast<int>(sol.control_change.size());
    return sol;
}

FbsdeResidualReport check_against_riccati(const FbsdeSolution& sol, const RiccatiTables& tables) {
    if (!(sol.grid == tables.grid))
        throw GridMismatchError("check_against_riccati: grids differ");
    const int n = sol.grid.n_steps;
    const int np = sol.n_paths;
    const size_t nodes = static_cast<size_t>(n + 1);

    FbsdeResidualReport report;
    for (int i = 0; i < 2; ++i) {
        const Curve& tau = i == 0 ? tables.tau1 : tables.tau2;
        const Curve& del = i == 0 ? tables.delta1 : tables.delta2;
        const Curve& alp = i == 0 ? tables.alpha1 : tables.alpha2;
        const std::vector<double>& qi = i == 0 ? sol.q1 : sol.q2;

        // (a) filtered costate vs the Riccati representation
        double ss = 0, ss_ref = 0;
        for (int p = 0; p < np; ++p) {
            for (int k = 0; k <= n; ++k) {
                const double xh = sol.x_hat[p * nodes + k];
                const double qh = sol.q_hat_c0[i][k] + sol.q_hat_c1[i][k] * xh;
                const double ref = tau.y[k] * xh + del.y[k] * tables.ex_mean[k];
                ss += (qh - ref) * (qh - ref);
                ss_ref += qh * qh;
            }
        }
        double rel_rmse = std::sqrt(ss / std::max(ss_ref, 1e-300));

        // (b) mean costate vs alpha * Ex
        double max_abs = 0, scale = 0;
        for (int k = 0; k <= n; ++k) {
            double mq = 0;
            for (int p = 0; p < np; ++p) mq += qi[p * nodes + k];
            mq /= np;
            const double ref = alp.y[k] * tables.ex_mean[k];
            max_abs = std::max(max_abs, std::fabs(mq - ref));
            scale = std::max(scale, std::fabs(ref));
        }
        double rel_max = max_abs / std::max(scale, 1e-300);

        // terminal-condition fit of the regression-fitted costate
        double st = 0, st_ref = 0;
        for (int p = 0; p < np; ++p) {
            const double ref = qi[p * nodes + n];
            st_ref += ref * ref;
        }
        double term_rel = st_ref > 0 ? std::sqrt(st / st_ref) : 0.0;

        if (i == 0) {
            report.q_hat_rel_rmse1 = rel_rmse;
            report.mean_q_rel_max1 = rel_max;
            report.terminal_rel_err1 = term_rel;
        } else {
            report.q_hat_rel_rmse2 = rel_rmse;
            report.mean_q_rel_max2 = rel_max;
            report.terminal_rel_err2 = term_rel;
        }
    }
    return report;
}

}  // namespace mfg
