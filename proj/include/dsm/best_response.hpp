// Per-user proximal best response: minimize the user's day-ahead cost plus
// (tau/2)|l_n - centroid|^2 over the device polytope, by projected gradient
// with backtracking line search. Projections run on the active-set engine.
#pragma once

#include "dsm/qp.hpp"
#include "dsm/user_model.hpp"

namespace dsm {

/// Stacking order of one user's decision variables: [g | s_plus | s_minus],
/// with absent blocks skipped.
struct DeviceLayout {
    bool has_gen = false;
    bool has_store = false;
    int slots = 0;

    explicit DeviceLayout(const UserModel& m)
        : has_gen(m.has_generation()), has_store(m.has_storage()), slots(m.slots()) {}

    int dim() const { return slots * ((has_gen ? 1 : 0) + (has_store ? 2 : 0)); }
    int g_offset() const { return 0; }
    int sp_offset() const { return has_gen ? slots : 0; }
    int sm_offset() const { return sp_offset() + slots; }

    DeviceSchedule to_schedule(const Vec& x) const;
    Vec from_schedule(const DeviceSchedule& d) const;
    Vec implied_load(const UserModel& m, const Vec& x) const;
    /// Pull a gradient on the load vector back to device coordinates.
    Vec pullback_load_gradient(const Vec& grad_l) const;
};

/// Linear constraints of the user's feasible region in layout coordinates.
Polytope build_device_polytope(const UserModel& m);

struct BestResponseConfig {
    double tol = 1e-8;          // projected-gradient norm at unit step
    int max_iter = 10000;
    double armijo_factor = 0.5; // backtracking shrink
    double initial_step = 1.0;
    double armijo_c = 1e-4;     // sufficient-decrease coefficient
};

struct BestResponseResult {
    LoadProfile load;
    DeviceSchedule schedule;
    Vec x;                 // device coordinates, usable as the next warm start
    double objective = 0;  // full f_n + proximal value at the solution
    double kkt_residual = 0;
    int iterations = 0;
};

/// Day-ahead objective of user n at load l, all other quantities fixed:
///   sum_h K_h (l(h) + others(h) + error_sum(h)) (l(h) + own_error(h))
///   + beta_m |own_error|^2 + (tau/2) |l - centroid|^2.
double best_response_objective(const Vec& load, const Vec& others_load_sum,
                               const Vec& error_sum, const Vec& own_error,
                               const Vec& centroid, double tau, const GridCostParams& params);

/// Solves the strongly convex per-user subproblem. `others_load_sum` is
/// sum_{m != n} l_m per slot; `error_sum` is 1' delta(h); tau == 0 yields the
/// unregularized best response. Passive users return their base demand.
BestResponseResult best_response(const UserModel& m, const Vec& others_load_sum,
                                 const Vec& error_sum, const Vec& own_error,
                                 const Vec& centroid, double tau, const GridCostParams& params,
                                 const Vec* warm_start = nullptr,
                                 ProjectionWorkspace* ws = nullptr,
                                 const BestResponseConfig& cfg = {});

}  // namespace dsm
