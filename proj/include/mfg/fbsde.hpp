#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "mfg/game_spec.hpp"
#include "mfg/noise.hpp"
#include "mfg/riccati.hpp"

namespace mfg {

struct SolverConfig {
    int max_picard = 50;
    double picard_tol = 1e-4;  // relative L2 change of the control tables
    double damping = 0.5;      // theta in (0, 1]
};

struct NoConvergenceError : std::runtime_error {
    int iterations;
    double last_change;
    NoConvergenceError(int it, double ch)
        : std::runtime_error("FBSDE Picard iteration did not converge after " +
                             std::to_string(it) + " iterations (last change " +
                             std::to_string(ch) + ")"),
          iterations(it), last_change(ch) {}
};

struct RegressionSingularError : std::runtime_error {
    explicit RegressionSingularError(const std::string& what) : std::runtime_error(what) {}
};

// Output of the regression Picard solver for the coupled mean-field FBSDE.
// q1, q2 hold fitted costate values per path and node; q_hat holds the
// node-wise affine representation of the filtered costate,
// q_hat_i(t_k) = q_hat_c0[i][k] + q_hat_c1[i][k] * x_hat.
struct FbsdeSolution {
    TimeGrid grid;
    int n_paths = 0;
    int iterations = 0;
    std::vector<double> control_change;  // per Picard iteration

    std::vector<double> x, x_hat;  // n_paths x (N+1)
    std::vector<double> mean;      // particle mean of x, N+1
    std::vector<double> q1, q2;    // n_paths x (N+1), regression-fitted costates
    std::vector<double> k11, k12, k21, k22;  // node-wise martingale integrands, N

    // filtered-costate affine coefficients, per player, length N+1
    std::vector<double> q_hat_c0[2], q_hat_c1[2];

    double q_hat(int player, int path, int node) const {
        const double xh = x_hat[static_cast<size_t>(path) * (grid.n_steps + 1) + node];
        return q_hat_c0[player - 1][node] + q_hat_c1[player - 1][node] * xh;
    }
};

// Picard iteration: forward particle simulation of the controlled state,
// backward least-squares regression of the costates onto {1, x, x_hat} (the
// node-wise mean term is absorbed by the intercept), filtered costate by
// regression onto {1, x_hat}, damped control update u_i <- (1-theta) u_i +
// theta (-b_i q_hat_i / m_i). Riccati-independent route to the equilibrium.
FbsdeSolution solve_lq_fbsde(const LqGameSpec& spec, const SolverConfig& config,
                             const NoisePlan& plan);

struct FbsdeResidualReport {
    double q_hat_rel_rmse1 = 0.0, q_hat_rel_rmse2 = 0.0;  // vs tau x_hat + delta Ex
    double mean_q_rel_max1 = 0.0, mean_q_rel_max2 = 0.0;  // vs alpha Ex
    double terminal_rel_err1 = 0.0, terminal_rel_err2 = 0.0;
};

FbsdeResidualReport check_against_riccati(const FbsdeSolution& sol, const RiccatiTables& tables);

}  // namespace mfg
