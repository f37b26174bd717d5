#pragma once

#include <string>
#include <utility>
#include <vector>

#include "mfg/game_spec.hpp"
#include "mfg/riccati.hpp"
#include "mfg/sde.hpp"

namespace mfg {

struct CostEstimate {
    double j1 = 0.0, j2 = 0.0;
    double se1 = 0.0, se2 = 0.0;
    int n_paths = 0;
    std::string quadrature = "trapezoid";
};

// Monte Carlo evaluation of both quadratic cost functionals on a simulated
// bundle. Running integrals by trapezoid; the (E x)^2 terms use the supplied
// deterministic/frozen mean, so squaring introduces no cross-path bias.
// Per-path values are reduced pairwise, making the result independent of
// summation order.
CostEstimate estimate_cost_mc(const LqGameSpec& spec, const StatePathSet& paths,
                              const std::vector<double>& ex_mean);

// Per-path cost contributions (length n_paths) for player i in {1,2},
// including the deterministic mean terms. mean of these = J_i estimate.
std::vector<double> per_path_cost(const LqGameSpec& spec, const StatePathSet& paths,
                                  const std::vector<double>& ex_mean, int player);

// Exact first and second moments of (x, x_hat) under the linear feedback
// gains: closed ODE system for (Ex, Ex_hat, Ex^2, Ex x_hat, Ex_hat^2)
// integrated by RK4.
struct MomentTrajectory {
    TimeGrid grid;
    std::vector<double> ex, exhat;          // means
    std::vector<double> exx, exxhat, exhxh; // second moments
};

MomentTrajectory solve_moments(const LqGameSpec& spec, const GainTables& gains,
                               const std::vector<double>& ex_mean);

// Exact costs under the feedback gains, by quadrature of the moment
// trajectories. Independent oracle for estimate_cost_mc.
std::pair<double, double> exact_cost_moments(const LqGameSpec& spec, const GainTables& gains,
                                             const std::vector<double>& ex_mean);

}  // namespace mfg
