#pragma once

#include <array>
#include <stdexcept>
#include <string>
#include <vector>

#include "mfg/game_spec.hpp"
#include "mfg/time_grid.hpp"

namespace mfg {

// Riccati integration left the bounded regime: the system has no bounded
// solution for this spec/horizon.
struct BlowUpError : std::runtime_error {
    double t;
    double value;
    BlowUpError(double t_, double v)
        : std::runtime_error("Riccati blow-up at t=" + std::to_string(t_) +
                             ", |value|=" + std::to_string(v)),
          t(t_), value(v) {}
};

inline constexpr double kBlowUpThreshold = 1e12;

// Solutions of the three backward systems plus the forward mean path.
// alpha: full-expectation Riccati pair; tau: gain on the filtered state;
// delta: gain on the mean. Node derivatives are kept for dense evaluation.
struct RiccatiTables {
    TimeGrid grid;
    Curve alpha1, alpha2;
    Curve tau1, tau2;
    Curve delta1, delta2;
    std::vector<double> ex_mean;
};

// Feedback gains of the equilibrium u_i = k_hat_i * x_hat + k_mean_i * E[x].
struct GainTables {
    TimeGrid grid;
    std::vector<double> k_hat1, k_hat2;    // -b_i tau_i / m_i
    std::vector<double> k_mean1, k_mean2;  // -b_i delta_i / m_i
};

// Backward RK4 solves from the terminal data. Each returns node values and
// node derivatives for both players; throws BlowUpError past 1e12.
std::array<Curve, 2> solve_alpha(const LqGameSpec& spec, const TimeGrid& grid);
std::array<Curve, 2> solve_tau(const LqGameSpec& spec, const TimeGrid& grid);

// Linear backward system for delta; alpha and tau are evaluated at integrator
// stage points by cubic Hermite interpolation so the 4th order is preserved.
std::array<Curve, 2> solve_delta(const LqGameSpec& spec, const TimeGrid& grid,
                                 const std::array<Curve, 2>& alpha,
                                 const std::array<Curve, 2>& tau);

// E[x](t) = x0 * exp(int_0^t [a + abar - b1^2/m1 (alpha1+alpha2)] ds),
// trapezoid on the grid.
std::vector<double> mean_state_closed_form(const LqGameSpec& spec,
                                           const std::array<Curve, 2>& alpha,
                                           const TimeGrid& grid);

// Forward RK4 on dEx = [(a+abar) Ex - b1^2/m1 alpha1 Ex - b2^2/m2 alpha2 Ex] dt.
// Cross-route oracle for mean_state_closed_form.
std::vector<double> mean_state_ode(const LqGameSpec& spec,
                                   const std::array<Curve, 2>& alpha,
                                   const TimeGrid& grid);

RiccatiTables solve_riccati(const LqGameSpec& spec, const TimeGrid& grid);

GainTables feedback_gains(const LqGameSpec& spec, const RiccatiTables& tables);

}  // namespace mfg
