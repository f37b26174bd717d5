#include "mfg/sde.hpp"

#include <cmath>
#include <thread>

#include "reduce.hpp"

namespace mfg {

namespace {

struct NodeCoeffs {
    std::vector<double> a, abar, b1, b2, c1, c2;
};

NodeCoeffs tabulate(const LqGameSpec& spec, const TimeGrid& grid) {
    NodeCoeffs c;
    const int nn = grid.n_nodes();
    c.a.resize(nn);
    c.abar.resize(nn);
    c.b1.resize(nn);
    c.b2.resize(nn);
    c.c1.resize(nn);
    c.c2.resize(nn);
    for (int k = 0; k < nn; ++k) {
        const double t = grid.node(k);
        c.a[k] = spec.a(t);
        c.abar[k] = spec.abar(t);
        c.b1[k] = spec.b1(t);
        c.b2[k] = spec.b2(t);
        c.c1[k] = spec.c1(t);
        c.c2[k] = spec.c2(t);
    }
    return c;
}

void check_mean_grid(const std::vector<double>& ex_mean, const TimeGrid& grid,
                     const char* where) {
    if (static_cast<int>(ex_mean.size()) != grid.n_nodes())
        throw GridMismatchError(std::string(where) + ": ex_mean length does not match grid");
}

StatePathSet alloc_paths(int n_paths, const TimeGrid& grid) {
    StatePathSet s;
    s.n_paths = n_paths;
    s.grid = grid;
    s.x.resize(static_cast<size_t>(n_paths) * grid.n_nodes());
    s.x_hat.resize(static_cast<size_t>(n_paths) * grid.n_nodes());
    s.v1.resize(static_cast<size_t>(n_paths) * grid.n_steps);
    s.v2.resize(static_cast<size_t>(n_paths) * grid.n_steps);
    return s;
}

template <typename Body>
void for_paths(int n_paths, int n_threads, Body body) {
    if (n_threads <= 1) {
        for (int p = 0; p < n_paths; ++p) body(p);
        return;
    }
    std::vector<std::thread> workers;
    int chunk = (n_paths + n_threads - 1) / n_threads;
    for (int w = 0; w < n_threads; ++w) {
        int lo = w * chunk, hi = std::min(n_paths, lo + chunk);
        if (lo >= hi) break;
        workers.emplace_back([&, lo, hi] {
            for (int p = lo; p < hi; ++p) body(p);
        });
    }
    for (auto& t : workers) t.join();
}

}  // namespace

StatePathSet simulate_state(const LqGameSpec& spec, const ControlPolicy& policy,
                            const std::vector<double>& ex_mean, const PathBundle& noise,
                            int n_threads) {
    if (!policy.adapted) throw NonAdaptedPolicyError();
    const TimeGrid& grid = noise.grid;
    check_mean_grid(ex_mean, grid, "simulate_state");
    const int n = grid.n_steps;
    const double dt = grid.dt();
    const NodeCoeffs c = tabulate(spec, grid);
    StatePathSet s = alloc_paths(noise.n_paths, grid);

    for_paths(noise.n_paths, n_threads, [&](int p) {
        size_t rx = static_cast<size_t>(p) * (n + 1);
        size_t rv = static_cast<size_t>(p) * n;
        double x = spec.x0, xh = spec.x0;
        s.x[rx] = x;
        s.x_hat[rx] = xh;
        for (int k = 0; k < n; ++k) {
            const Control u = policy.eval(k, grid.node(k), xh, ex_mean[k]);
            s.v1[rv + k] = u.v1;
            s.v2[rv + k] = u.v2;
            const double drift_common = c.abar[k] * ex_mean[k] + c.b1[k] * u.v1 + c.b2[k] * u.v2;
            const double d1 = noise.w1(p, k), d2 = noise.w2(p, k);
            x += (c.a[k] * x + drift_common) * dt + c.c1[k] * d1 + c.c2[k] * d2;
            xh += (c.a[k] * xh + drift_common) * dt + c.c1[k] * d1;
            s.x[rx + k + 1] = x;
            s.x_hat[rx + k + 1] = xh;
        }
    });
    return s;
}

StatePathSet simulate_state_open_loop(const LqGameSpec& spec, const std::vector<double>& v1,
                                      const std::vector<double>& v2,
                                      const std::vector<double>& ex_mean,
                                      const PathBundle& noise, int n_threads) {
    const TimeGrid& grid = noise.grid;
    check_mean_grid(ex_mean, grid, "simulate_state_open_loop");
    const int n = grid.n_steps;
    if (v1.size() != noise.dw1.size() || v2.size() != noise.dw1.size())
        throw GridMismatchError("simulate_state_open_loop: control table size mismatch");
    const double dt = grid.dt();
    const NodeCoeffs c = tabulate(spec, grid);
    StatePathSet s = alloc_paths(noise.n_paths, grid);
    s.v1 = v1;
    s.v2 = v2;

    for_paths(noise.n_paths, n_threads, [&](int p) {
        size_t rx = static_cast<size_t>(p) * (n + 1);
        size_t rv = static_cast<size_t>(p) * n;
        double x = spec.x0, xh = spec.x0;
        s.x[rx] = x;
        s.x_hat[rx] = xh;
        for (int k = 0; k < n; ++k) {
            const double drift_common =
                c.abar[k] * ex_mean[k] + c.b1[k] * v1[rv + k] + c.b2[k] * v2[rv + k];
            const double d1 = noise.w1(p, k), d2 = noise.w2(p, k);
            x += (c.a[k] * x + drift_common) * dt + c.c1[k] * d1 + c.c2[k] * d2;
            xh += (c.a[k] * xh + drift_common) * dt + c.c1[k] * d1;
            s.x[rx + k + 1] = x;
            s.x_hat[rx + k + 1] = xh;
        }
    });
    return s;
}

namespace {

// Lockstep particle run: the mean-field term at step k is the running sample
// mean of x over the bundle, which the run also returns frozen. ControlFn is
// (path, k, t, x_hat, mean) -> Control.
template <typename ControlFn>
ParticleRun particle_run(const LqGameSpec& spec, const PathBundle& noise, ControlFn control) {
    const TimeGrid& grid = noise.grid;
    const int n = grid.n_steps;
    const int np = noise.n_paths;
    const double dt = grid.dt();
    const NodeCoeffs c = tabulate(spec, grid);

    ParticleRun run;
    run.paths = alloc_paths(np, grid);
    run.mean.resize(n + 1);
    StatePathSet& s = run.paths;

    std::vector<double> xs(np, spec.x0), xhs(np, spec.x0);
    for (int p = 0; p < np; ++p) {
        s.x[static_cast<size_t>(p) * (n + 1)] = spec.x0;
        s.x_hat[static_cast<size_t>(p) * (n + 1)] = spec.x0;
    }
    run.mean[0] = spec.x0;

    for (int k = 0; k < n; ++k) {
        const double m = run.mean[k];
        const double t = grid.node(k);
        for (int p = 0; p < np; ++p) {
            const Control u = control(p, k, t, xhs[p], m);
            size_t rv = static_cast<size_t>(p) * n;
            s.v1[rv + k] = u.v1;
            s.v2[rv + k] = u.v2;
            const double drift_common = c.abar[k] * m + c.b1[k] * u.v1 + c.b2[k] * u.v2;
            const double d1 = noise.w1(p, k), d2 = noise.w2(p, k);
            xs[p] += (c.a[k] * xs[p] + drift_common) * dt + c.c1[k] * d1 + c.c2[k] * d2;
            xhs[p] += (c.a[k] * xhs[p] + drift_common) * dt + c.c1[k] * d1;
            size_t rx = static_cast<size_t>(p) * (n + 1);
            s.x[rx + k + 1] = xs[p];
            s.x_hat[rx + k + 1] = xhs[p];
        }
        run.mean[k + 1] = detail::pairwise_sum(xs) / np;
    }
    return run;
}

}  // namespace

ParticleRun simulate_with_particle_mean(const LqGameSpec& spec, const ControlPolicy& policy,
                                        const PathBundle& noise) {
    if (!policy.adapted) throw NonAdaptedPolicyError();
    return particle_run(spec, noise, [&](int, int k, double t, double xh, double m) {
        return policy.eval(k, t, xh, m);
    });
}

ParticleRun simulate_open_loop_particle_mean(const LqGameSpec& spec,
                                             const std::vector<double>& v1,
                                             const std::vector<double>& v2,
                                             const PathBundle& noise) {
    const int n = noise.grid.n_steps;
    if (v1.size() != noise.dw1.size() || v2.size() != noise.dw1.size())
        throw GridMismatchError("simulate_open_loop_particle_mean: control table size mismatch");
    return particle_run(spec, noise, [&](int p, int k, double, double, double) {
        size_t rv = static_cast<size_t>(p) * n;
        return Control{v1[rv + k], v2[rv + k]};
    });
}

std::vector<double> simulate_filter(const LqGameSpec& spec, const RiccatiTables& tables,
                                    const PathBundle& noise, int n_threads) {
    const TimeGrid& grid = noise.grid;
    if (!(tables.grid == grid))
        throw GridMismatchError("simulate_filter: tables and noise grids differ");
    const int n = grid.n_steps;
    const double dt = grid.dt();
    std::vector<double> out(static_cast<size_t>(noise.n_paths) * (n + 1));

    // Drift per Eq. of the filter with the costate ansatz substituted:
    // dx_hat = [(a - r1 tau1 - r2 tau2) x_hat + (abar - r1 delta1 - r2 delta2) Ex] dt + c1 dw1
    std::vector<double> lin(n + 1), src(n + 1), c1(n + 1);
    for (int k = 0; k <= n; ++k) {
        const double t = grid.node(k);
        const double r1 = spec.b1(t) * spec.b1(t) / spec.m1(t);
        const double r2 = spec.b2(t) * spec.b2(t) / spec.m2(t);
        lin[k] = spec.a(t) - r1 * tables.tau1.y[k] - r2 * tables.tau2.y[k];
        src[k] = (spec.abar(t) - r1 * tables.delta1.y[k] - r2 * tables.delta2.y[k]) *
                 tables.ex_mean[k];
        c1[k] = spec.c1(t);
    }

    for_paths(noise.n_paths, n_threads, [&](int p) {
        size_t r = static_cast<size_t>(p) * (n + 1);
        double xh = spec.x0;
        out[r] = xh;
        for (int k = 0; k < n; ++k) {
            xh += (lin[k] * xh + src[k]) * dt + c1[k] * noise.w1(p, k);
            out[r + k + 1] = xh;
        }
    });
    return out;
}

std::vector<double> filter_closed_form(const LqGameSpec& spec, const RiccatiTables& tables,
                                       const PathBundle& noise, int n_threads) {
    const TimeGrid& grid = noise.grid;
    if (!(tables.grid == grid))
        throw GridMismatchError("filter_closed_form: tables and noise grids differ");
    const int n = grid.n_steps;
    const double dt = grid.dt();

    // log Phi_0^{t_k} by trapezoid of a - r1 tau1 - r2 tau2
    std::vector<double> logphi(n + 1, 0.0), src(n + 1), c1(n + 1);
    {
        std::vector<double> psi(n + 1);
        for (int k = 0; k <= n; ++k) {
            const double t = grid.node(k);
            const double r1 = spec.b1(t) * spec.b1(t) / spec.m1(t);
            const double r2 = spec.b2(t) * spec.b2(t) / spec.m2(t);
            psi[k] = spec.a(t) - r1 * tables.tau1.y[k] - r2 * tables.tau2.y[k];
            src[k] = (spec.abar(t) - r1 * tables.delta1.y[k] - r2 * tables.delta2.y[k]) *
                     tables.ex_mean[k];
            c1[k] = spec.c1(t);
        }
        for (int k = 1; k <= n; ++k) logphi[k] = logphi[k - 1] + 0.5 * dt * (psi[k - 1] + psi[k]);
    }

    std::vector<double> out(static_cast<size_t>(noise.n_paths) * (n + 1));
    for_paths(noise.n_paths, n_threads, [&](int p) {
        size_t r = static_cast<size_t>(p) * (n + 1);
        // accumulate exp(-logphi_j) * (src_j dt + c1_j dw1_j), then scale by Phi_0^{t_k}
        double acc = spec.x0;
        out[r] = spec.x0;
        for (int k = 1; k <= n; ++k) {
            int j = k - 1;
            acc += std::exp(-logphi[j]) * (src[j] * dt + c1[j] * noise.w1(p, j));
            out[r + k] = std::exp(logphi[k]) * acc;
        }
    });
    return out;
}

ControlPolicy equilibrium_policy(const GainTables& gains) {
    ControlPolicy pol;
    pol.adapted = true;
    pol.eval = [gains](int k, double, double xh, double m) {
        return Control{gains.k_hat1[k] * xh + gains.k_mean1[k] * m,
                       gains.k_hat2[k] * xh + gains.k_mean2[k] * m};
    };
    return pol;
}

ConditionalMeanEstimate conditional_mean_oracle(const LqGameSpec& spec, const GainTables& gains,
                                                const std::vector<double>& ex_mean,
                                                const std::vector<double>& dw1_path,
                                                int n_inner, uint64_t seed) {
    const TimeGrid& grid = gains.grid;
    check_mean_grid(ex_mean, grid, "conditional_mean_oracle");
    const int n = grid.n_steps;
    if (static_cast<int>(dw1_path.size()) != n)
        throw GridMismatchError("conditional_mean_oracle: w1 path length mismatch");
    const double dt = grid.dt();
    const double sdt = std::sqrt(dt);
    const NodeCoeffs c = tabulate(spec, grid);

    // One filter/control path shared by every inner copy.
    std::vector<double> u1(n), u2(n), xhat(n + 1);
    {
        double xh = spec.x0;
        xhat[0] = xh;
        for (int k = 0; k < n; ++k) {
            u1[k] = gains.k_hat1[k] * xh + gains.k_mean1[k] * ex_mean[k];
            u2[k] = gains.k_hat2[k] * xh + gains.k_mean2[k] * ex_mean[k];
            xh += (c.a[k] * xh + c.abar[k] * ex_mean[k] + c.b1[k] * u1[k] + c.b2[k] * u2[k]) * dt +
                  c.c1[k] * dw1_path[k];
            xhat[k + 1] = xh;
        }
    }

    std::vector<std::vector<double>> samples(n + 1, std::vector<double>(n_inner));
    for (int i = 0; i < n_inner; ++i) {
        double x = spec.x0;
        samples[0][i] = x;
        for (int k = 0; k < n; ++k) {
            const double d2 = sdt * philox::standard_normal(seed, static_cast<uint64_t>(i),
                                                            (1ull << 32) | static_cast<uint32_t>(k));
            x += (c.a[k] * x + c.abar[k] * ex_mean[k] + c.b1[k] * u1[k] + c.b2[k] * u2[k]) * dt +
                 c.c1[k] * dw1_path[k] + c.c2[k] * d2;
            samples[k + 1][i] = x;
        }
    }

    ConditionalMeanEstimate est;
    est.mean.resize(n + 1);
    est.se.resize(n + 1);
    for (int k = 0; k <= n; ++k) {
        auto ms = detail::mean_se(samples[k]);
        est.mean[k] = ms.mean;
        est.se[k] = ms.se;
    }
    return est;
}

}  // namespace mfg
