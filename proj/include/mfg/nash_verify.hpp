#pragma once

#include <functional>
#include <string>
#include <vector>

#include "mfg/cost.hpp"
#include "mfg/game_spec.hpp"
#include "mfg/noise.hpp"
#include "mfg/riccati.hpp"
#include "mfg/sde.hpp"

namespace mfg {

// An admissible deviation direction for one player: a w1-adapted rule that is
// evaluated along the candidate-equilibrium run to produce a fixed open-loop
// process v_i, then mixed in as u_i + eps (v_i - u_i).
struct Deviation {
    int player = 1;  // 1 or 2
    std::string id;
    std::function<double(int k, double t, double x_hat, double ex_mean)> direction;
    std::vector<double> eps_ladder{0.2, 0.1, 0.05};
};

struct LadderInconsistentError : std::runtime_error {
    explicit LadderInconsistentError(const std::string& what) : std::runtime_error(what) {}
};

struct GateauxResult {
    double derivative = 0.0;  // Richardson-extrapolated one-sided derivative
    double se = 0.0;
    double dj_full = 0.0;  // J_i(eps=1) - J_i(equilibrium)
    double dj_full_se = 0.0;
    double j_base = 0.0;
};

struct VariationalPath {
    TimeGrid grid;
    int n_paths = 0;
    std::vector<double> xi;    // n_paths x (N+1), first variation per path
    std::vector<double> mean;  // N+1, bundle mean of xi

    double at(int p, int k) const { return xi[static_cast<size_t>(p) * (grid.n_steps + 1) + k]; }
};

struct DeviationRecord {
    int player = 0;
    std::string id;
    double dj = 0.0, dj_se = 0.0;
    double gateaux = 0.0, gateaux_se = 0.0;
    double vi_value = 0.0, vi_se = 0.0;
    double tol_grad = 0.0;
    bool pass = false;
};

struct NashReport {
    std::vector<DeviationRecord> records;
    bool all_pass = true;
};

struct HamiltonianResidual {
    double max1 = 0.0, rms1 = 0.0;
    double max2 = 0.0, rms2 = 0.0;
    double rms_scale1 = 0.0, rms_scale2 = 0.0;  // RMS of m_i u_i for relative reads
};

struct ConvexityReport {
    bool pass = true;
    std::vector<Violation> violations;
};

// Standard battery: per player, constant offsets {+0.5, -0.5, +1}, a bang on
// the first half-interval, a sinusoid-modulated feedback, and the candidate
// gains scaled by 0.5 and 1.5. Seven per player, fourteen total.
std::vector<Deviation> deviation_battery(const LqGameSpec& spec, const TimeGrid& grid,
                                         const GainTables& gains);

// Verification-theorem hypotheses for LQ data: the Hamiltonian Hessian in
// (x, xt, v_i) is diag(g_i, gbar_i, m_i) and the terminal cost Hessian is
// diag(h_i, hbar_i), so convexity is a sign check on the weights.
ConvexityReport convexity_check(const LqGameSpec& spec, const TimeGrid& grid);

// Evaluates many deviations against one candidate (gains) on one bundle with
// common random numbers. The baseline and every perturbed run use the
// lockstep frozen particle mean, so differences are exactly linear in eps.
class NashVerifier {
public:
    NashVerifier(const LqGameSpec& spec, const GainTables& gains, const NoisePlan& plan);

    // One-sided derivative of J_i at the candidate in the deviation direction,
    // Richardson-extrapolated down the eps ladder with CRN.
    GateauxResult gateaux(const Deviation& dev) const;

    // First-variation process for the deviation: per-path Euler solve of the
    // linearized dynamics with its own bundle-mean as the mean-field term.
    VariationalPath variational_state(const Deviation& dev) const;

    // Monte Carlo value of the first-order optimality form: pairs with
    // gateaux() as a mutual oracle (the two are equal in expectation).
    std::pair<double, double> variational_inequality_value(const Deviation& dev,
                                                           const VariationalPath& vp) const;

    NashReport run_battery(const std::vector<Deviation>& battery) const;

    const ParticleRun& baseline() const { return base_; }
    const std::vector<double>& baseline_mean() const { return base_.mean; }

    // Realized open-loop control of `player` along the baseline (n_paths x N).
    const std::vector<double>& baseline_control(int player) const {
        return player == 1 ? base_.paths.v1 : base_.paths.v2;
    }

private:
    LqGameSpec spec_;
    GainTables gains_;
    PathBundle bundle_;
    ParticleRun base_;
    std::vector<double> j_base_[2];  // per-path baseline costs per player

    // Realizes the deviation rule along the baseline as a fixed process.
    std::vector<double> realize_direction(const Deviation& dev) const;
    // Per-path costs at mix parameter eps for the deviating player.
    std::vector<double> per_path_cost_at(const Deviation& dev, const std::vector<double>& vdir,
                                         double eps) const;
};

// r_i(t_k) = b_i q_hat_i + m_i u_i, the conditional Hamiltonian gradient.
// With Riccati q_hat and the feedback controls it vanishes identically; it is
// the acceptance check for externally supplied (e.g. FBSDE) q_hat.
// q_hat_provider(player, path, node) supplies the costate estimates.
HamiltonianResidual hamiltonian_residual(
    const LqGameSpec& spec, const RiccatiTables& tables, const StatePathSet& paths,
    const std::function<double(int player, int path, int node)>& q_hat_provider);

// Convenience overload using q_hat_i = tau_i x_hat + delta_i ex_mean.
HamiltonianResidual hamiltonian_residual(const LqGameSpec& spec, const RiccatiTables& tables,
                                         const StatePathSet& paths);

// ---- General (non-LQ) Gateaux route -------------------------------------
// Same construction for a GeneralGameSpec with user-supplied derivative
// callables. Controls are per-path open-loop tables; the mean-field term is
// the lockstep particle mean.

struct GeneralRun {
    StatePathSet paths;              // x only meaningful; x_hat mirrors x
    std::vector<double> mean;        // frozen particle mean
    std::vector<double> cost1, cost2;  // per-path costs
};

GeneralRun simulate_general(const GeneralGameSpec& g, const std::vector<double>& v1,
                            const std::vector<double>& v2, const PathBundle& noise);

// Derivative of J_i when player i mixes from base controls toward vdir.
GateauxResult general_gateaux(const GeneralGameSpec& g, int player,
                              const std::vector<double>& u1, const std::vector<double>& u2,
                              const std::vector<double>& vdir, const PathBundle& noise,
                              const std::vector<double>& eps_ladder = {0.2, 0.1, 0.05});

// First variation of the general dynamics along the base run.
VariationalPath general_variational_state(const GeneralGameSpec& g, int player,
                                          const std::vector<double>& u1,
                                          const std::vector<double>& u2,
                                          const std::vector<double>& vdir,
                                          const PathBundle& noise);

}  // namespace mfg
