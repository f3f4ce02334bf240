// Coupled worst-case error game for one time slot. The normalized variational
// solution is the unique fixed point of
//   T(d) = P_X( sqrt(alpha) * (a + A d) / |a + A d| ),  A = 11' - I,
// restricted to the halfspace X where T is a contraction self-map. The shared
// dual lambda_h prices the per-slot error ball |d|^2 <= alpha.
#pragma once

#include "dsm/types.hpp"

namespace dsm {

class DegenerateDirection : public ModelError {
public:
    explicit DegenerateDirection(int slot_1based)
        : ModelError("degenerate error direction at slot " + std::to_string(slot_1based)) {}
};

struct SlotErrorProblem {
    int slot = 0;      // 0-based slot index
    Vec a;             // a_n = L(h) + l_n(h), one entry per user
    double alpha = 0;  // error-ball budget, squared kWh

    SlotErrorProblem() = default;
    SlotErrorProblem(int slot_idx, Vec a_vec, double alpha_h);

    int users() const { return static_cast<int>(a.size()); }
};

/// Builds the slot problem from day-ahead loads (a_n = L(h) + l_n(h)).
SlotErrorProblem make_slot_problem(const std::vector<LoadProfile>& loads, int h, double alpha_h);

/// Membership in X: x >= 0 componentwise and
/// 1'x + 1'a/(|D|-1) - sqrt(alpha |D|) >= 0.
bool halfspace_contains(const Vec& x, const SlotErrorProblem& prob, double tol = 1e-12);

/// Closed-form projection: identity inside X, otherwise a shift along 1 onto
/// the bounding hyperplane (which the result then satisfies with equality).
Vec project_halfspace(const Vec& x, const SlotErrorProblem& prob);

/// One application of T. Throws DegenerateDirection when |a + A d| < 1e-12.
Vec fixed_point_map(const Vec& delta, const SlotErrorProblem& prob);

/// max_n | d_n - sqrt(alpha) w_n / |w| | with w = a + A d; zero at an interior
/// fixed point.
double stationarity_residual(const Vec& delta, const SlotErrorProblem& prob);

/// Shared dual: lambda_h = K_h + beta_m + K_h |a + A d| / (2 sqrt(alpha)).
double lambda_from_delta(const Vec& delta, const SlotErrorProblem& prob, double k_h,
                         double beta_m);

/// gamma = min_{x in X} |a + A x|, solved exactly from the KKT system by
/// bisection on the shared shift multiplier.
double gamma_min_norm(const SlotErrorProblem& prob);

/// q = sqrt(alpha) (|D|-1) / gamma; q < 1 certifies the contraction.
double contraction_constant(const SlotErrorProblem& prob);

struct SlotErrorSolution {
    Vec delta;
    double lambda = 0.0;
    double residual = 0.0;  // |d^{k+1} - d^k| at termination
    int iterations = 0;
    double q = 0.0;                      // contraction constant at this a_h
    bool contraction_certified = false;  // q < 1
    bool clamped_negative = false;       // converged iterate had a component < 0
};

/// Iterates T from the symmetric start sqrt(alpha/|D|) * 1 (or a warm start)
/// until |d^{k+1} - d^k| <= tol. |D| == 1 collapses to d = sqrt(alpha) sign(a).
SlotErrorSolution solve_slot_errors(const SlotErrorProblem& prob, double k_h, double beta_m,
                                    double tol = 1e-8, int max_iter = 500,
                                    const Vec* warm_start = nullptr);

/// Independent per-slot solves; slots run in parallel when requested.
std::vector<SlotErrorSolution> solve_all_slots(const std::vector<SlotErrorProblem>& probs,
                                               const GridCostParams& params, double tol_per_slot,
                                               int max_iter, bool parallel,
                                               const std::vector<Vec>* warm_starts = nullptr);

struct LockstepResult {
    std::vector<SlotErrorSolution> slots;
    std::vector<double> residual_trace;  // sum_h |d^{k+1}(h) - d^k(h)| per sweep
    int iterations = 0;
};

/// All slots advance one map application per sweep until the joint criterion
/// sum_h |d^{k+1}(h) - d^k(h)| <= tol is met; records the residual trace.
LockstepResult solve_all_slots_lockstep(const std::vector<SlotErrorProblem>& probs,
                                        const GridCostParams& params, double tol, int max_iter,
                                        bool parallel);

/// Uniform sample inside X (nonnegative draw shifted along 1 when needed).
Vec random_point_in_region(const SlotErrorProblem& prob, std::uint64_t seed);

}  // namespace dsm
