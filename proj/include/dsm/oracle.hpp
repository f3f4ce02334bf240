// Brute-force reference solvers for small instances. These stay independent
// of the iterative implementations they are used to check.
#pragma once

#include "dsm/game_solver.hpp"
#include "dsm/worst_case.hpp"

namespace dsm {
namespace oracle {

struct AngularSearchResult {
    Vec delta;
    double theta = 0.0;     // direction angle of the minimizing boundary point
    double residual = 0.0;  // stationarity residual at the returned point
};

/// Two-user slot game solved by scanning the quarter circle of boundary
/// directions at the given angular resolution and picking the direction with
/// the smallest stationarity residual.
AngularSearchResult angular_grid_search(const SlotErrorProblem& prob,
                                        double resolution_rad = 1e-6);

struct GridSearchResult {
    Vec g;  // generation schedule at the best grid point
    double objective = 0.0;
};

/// Two-slot generation-only best response solved by exhaustive search over
/// the (g1, g2) grid inside the box and daily budget.
GridSearchResult best_response_grid_search(const UserModel& m, const Vec& others_load_sum,
                                           const Vec& error_sum, const Vec& own_error,
                                           const Vec& centroid, double tau,
                                           const GridCostParams& params, double resolution);

struct SpectrumDiscrepancy {
    double day_ahead = 0.0;  // |closed-form minimum eigenvalue - dense solve|
    double inner = 0.0;      // max over slots of eigenvalue discrepancies
};

/// Assembles the per-slot day-ahead Jacobian K_h (I + 11') and the inner-game
/// Hessian explicitly, runs a dense symmetric eigensolver and compares the
/// extreme eigenvalues against the closed-form diagnostics report.
SpectrumDiscrepancy monotonicity_spectrum_check(const Scenario& scenario,
                                                const EquilibriumResult& at);

}  // namespace oracle
}  // namespace dsm
