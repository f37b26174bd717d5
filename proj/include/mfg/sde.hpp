#pragma once

#include <functional>
#include <stdexcept>
#include <vector>

#include "mfg/game_spec.hpp"
#include "mfg/noise.hpp"
#include "mfg/riccati.hpp"

namespace mfg {

struct Control {
    double v1 = 0.0;
    double v2 = 0.0;
};

// Feedback rule on w1-measurable data only: the simulator hands the policy
// (step, t, filtered state, mean); it never sees x or w2, which keeps
// adaptedness structural. User-built policies may clear `adapted` to mark
// rules that peeked at inadmissible data; the simulator refuses those.
struct ControlPolicy {
    std::function<Control(int k, double t, double x_hat, double ex_mean)> eval;
    bool adapted = true;
};

struct NonAdaptedPolicyError : std::runtime_error {
    NonAdaptedPolicyError() : std::runtime_error("policy is not w1-adapted") {}
};

struct GridMismatchError : std::runtime_error {
    explicit GridMismatchError(const std::string& what) : std::runtime_error(what) {}
};

// Simulated bundle: state, filter and applied controls per path.
struct StatePathSet {
    int n_paths = 0;
    TimeGrid grid;
    std::vector<double> x;      // n_paths x (N+1)
    std::vector<double> x_hat;  // n_paths x (N+1)
    std::vector<double> v1, v2; // n_paths x N

    double state(int p, int k) const { return x[static_cast<size_t>(p) * (grid.n_steps + 1) + k]; }
    double filt(int p, int k) const { return x_hat[static_cast<size_t>(p) * (grid.n_steps + 1) + k]; }
    double u1(int p, int k) const { return v1[static_cast<size_t>(p) * grid.n_steps + k]; }
    double u2(int p, int k) const { return v2[static_cast<size_t>(p) * grid.n_steps + k]; }
};

// Euler-Maruyama on the state with the filter advanced jointly from the same
// policy outputs and the w1 channel only. The mean-field term is the supplied
// deterministic ex_mean sequence (N+1 values).
StatePathSet simulate_state(const LqGameSpec& spec, const ControlPolicy& policy,
                            const std::vector<double>& ex_mean, const PathBundle& noise,
                            int n_threads = 1);

// Same dynamics with per-path open-loop controls (n_paths x N each) instead of
// a feedback rule. Used by the verification module, where perturbed controls
// are fixed processes.
StatePathSet simulate_state_open_loop(const LqGameSpec& spec,
                                      const std::vector<double>& v1,
                                      const std::vector<double>& v2,
                                      const std::vector<double>& ex_mean,
                                      const PathBundle& noise, int n_threads = 1);

// Lockstep interacting-particle run: the mean-field term at each step is the
// running cross-path sample mean, which is also returned as the frozen mean
// sequence for cost evaluation. Off-equilibrium policies have no
// deterministic mean available, so this is their simulation route.
struct ParticleRun {
    StatePathSet paths;
    std::vector<double> mean;  // N+1, frozen particle mean of x
};

ParticleRun simulate_with_particle_mean(const LqGameSpec& spec, const ControlPolicy& policy,
                                        const PathBundle& noise);

ParticleRun simulate_open_loop_particle_mean(const LqGameSpec& spec,
                                             const std::vector<double>& v1,
                                             const std::vector<double>& v2,
                                             const PathBundle& noise);

// Euler-Maruyama on the filter alone under the equilibrium feedback, driven by
// w1 only: dx_hat = [a x_hat + abar Ex - b1^2/m1 q1_hat - b2^2/m2 q2_hat] dt + c1 dw1
// with q_i_hat = tau_i x_hat + delta_i Ex. Returns n_paths x (N+1).
std::vector<double> simulate_filter(const LqGameSpec& spec, const RiccatiTables& tables,
                                    const PathBundle& noise, int n_threads = 1);

// Explicit solution of the filter equation: state-transition factor
// Phi_s^t = exp(int_s^t (a - b1^2/m1 tau1 - b2^2/m2 tau2) dr) by trapezoid of
// the log-integrand, source and noise integrals by left-point sums.
std::vector<double> filter_closed_form(const LqGameSpec& spec, const RiccatiTables& tables,
                                       const PathBundle& noise, int n_threads = 1);

// u_i(t_k) = k_hat_i(t_k) x_hat + k_mean_i(t_k) Ex.
ControlPolicy equilibrium_policy(const GainTables& gains);

struct ConditionalMeanEstimate {
    std::vector<double> mean;  // N+1
    std::vector<double> se;    // N+1
};

// Monte Carlo estimate of E[x(t) | w1-path]: n_inner state copies share one
// fixed w1 path (and hence one filter path and one control path) while w2 is
// resampled. Checks the filter against its defining conditional expectation.
ConditionalMeanEstimate conditional_mean_oracle(const LqGameSpec& spec, const GainTables& gains,
                                                const std::vector<double>& ex_mean,
                                                const std::vector<double>& dw1_path,
                                                int n_inner, uint64_t seed);

}  // namespace mfg
