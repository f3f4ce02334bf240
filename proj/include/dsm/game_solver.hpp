// Outer solver: proximal best-response sweeps over the active users
// alternating with the per-slot worst-case error solves, centroid updates and
// a termination certificate measured on the unregularized game.
#pragma once

#include "dsm/best_response.hpp"
#include "dsm/scenario.hpp"
#include "dsm/worst_case.hpp"

namespace dsm {

class MaxOuterIterations : public std::runtime_error {
public:
    explicit MaxOuterIterations(double last_change)
        : std::runtime_error("outer loop failed to converge (relative change " +
                             std::to_string(last_change) + ")"),
          relative_change(last_change) {}
    double relative_change;
};

enum class SweepMode { GaussSeidel, Jacobi };

struct SolverConfig {
    double tau = 0.0;       // <= 0 selects the scale-aware default
    double outer_tol = 1e-2;
    double inner_tol = 1e-8;
    int max_outer = 500;
    SweepMode sweep_mode = SweepMode::GaussSeidel;
    double ne_tol = 1e-6;
    bool naive = false;     // optimize loads with all error terms at zero
    bool parallel = true;
    int inner_max_iter = 500;
    BestResponseConfig br;
    bool best_effort = false;  // return the last iterate instead of throwing
};

/// Proximal weight used when SolverConfig.tau is not set.
double default_tau(const Scenario& scenario);

struct TraceRecord {
    int iteration = 0;
    double relative_change = 0.0;
    double sum_delta_residual = 0.0;
    double wall_clock_ms = 0.0;
};

struct EquilibriumResult {
    std::vector<LoadProfile> loads;
    std::vector<ErrorProfile> errors;   // worst-case delta*
    Vec lambdas;                        // shared dual per slot
    Vec robust_aggregate;               // L_r(h) = sum_m l_m(h) + delta*_m(h)
    int outer_iterations = 0;
    std::vector<TraceRecord> convergence_trace;
    std::vector<double> contraction_q;
    std::vector<char> contraction_certified;
    double ne_certificate = 0.0;        // max relative unilateral improvement
    bool converged = false;
    bool delta_clamped = false;
    bool naive = false;
};

/// Runs the full day-ahead optimization. Naive mode keeps the error terms at
/// zero during the load sweeps and prices the final loads with one worst-case
/// pass.
EquilibriumResult solve(const Scenario& scenario, const SolverConfig& config = {});

/// Re-solves every active user's unregularized best response against the
/// result and returns the largest relative cost improvement found; `probes`
/// additional random feasible schedules per user are also tested.
double verify_equilibrium(const EquilibriumResult& result, const Scenario& scenario,
                          int probes = 0, std::uint64_t seed = 12345);

struct MonotonicityReport {
    double day_ahead_min_eigenvalue = 0.0;  // min_h K_h
    double day_ahead_max_eigenvalue = 0.0;  // (|D|+1) max_h K_h
    Vec inner_min_eigenvalue;               // per slot
    Vec inner_max_eigenvalue;
    Vec lambda_threshold;                   // K_h (|D|+1)/2 + beta_m
    std::vector<char> strongly_monotone;    // lambda_h above the threshold
};

/// Closed-form spectra of the day-ahead Jacobian blocks and of the inner-game
/// Hessian (K_h + 2 beta_m - 2 lambda_h) I + K_h 11' at the result's duals.
MonotonicityReport monotonicity_diagnostics(const Scenario& scenario,
                                            const EquilibriumResult& at);

}  // namespace dsm
