#include "dsm/worst_case.hpp"

#include "dsm/rng.hpp"

#include <cmath>
#include <random>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace dsm {

namespace {

// w = a + A d with A = 11' - I, computed as a + (1'd) 1 - d.
Vec coupled_direction(const Vec& a, const Vec& delta) {
    const double total = delta.sum();
    return a + Vec::Constant(delta.size(), total) - delta;
}

}  // namespace

SlotErrorProblem::SlotErrorProblem(int slot_idx, Vec a_vec, double alpha_h)
    : slot(slot_idx), a(std::move(a_vec)), alpha(alpha_h) {
    if (a.size() < 1) throw ModelError("SlotErrorProblem: empty user set");
    if (!(alpha > 0.0)) throw ModelError("SlotErrorProblem: alpha must be > 0");
}

SlotErrorProblem make_slot_problem(const std::vector<LoadProfile>& loads, int h, double alpha_h) {
    if (loads.empty()) throw EmptyUserSet();
    double total = 0.0;
    for (const auto& p : loads) total += p.l[h];
    Vec a(loads.size());
    for (std::size_t n = 0; n < loads.size(); ++n) a[n] = total + loads[n].l[h];
    return SlotErrorProblem(h, std::move(a), alpha_h);
}

bool halfspace_contains(const Vec& x, const SlotErrorProblem& prob, double tol) {
    const int n = prob.users();
    if (n < 2) throw ModelError("halfspace_contains requires at least two users");
    if (x.size() != n) throw DimensionMismatch("halfspace_contains");
    if (x.minCoeff() < -tol) return false;
    const double plane = x.sum() + prob.a.sum() / (n - 1) - std::sqrt(prob.alpha * n);
    return plane >= -tol;
}

Vec project_halfspace(const Vec& x, const SlotErrorProblem& prob) {
    const int n = prob.users();
    if (n < 2) throw ModelError("project_halfspace requires at least two users");
    if (x.size() != n) throw DimensionMismatch("project_halfspace");
    if (halfspace_contains(x, prob)) return x;
    // A^{-1} a = (11'/(|D|-1) - I) a, so 1'(A^{-1} a) = 1'a / (|D|-1).
    const double inv_a_sum = prob.a.sum() / (n - 1);
    const double sqrt_n = std::sqrt(static_cast<double>(n));
    const double offset = std::sqrt(prob.alpha) - (inv_a_sum + x.sum()) / sqrt_n;
    return x + Vec::Constant(n, offset / sqrt_n);
}

Vec fixed_point_map(const Vec& delta, const SlotErrorProblem& prob) {
    const int n = prob.users();
    if (n < 2) throw ModelError("fixed_point_map requires at least two users");
    if (delta.size() != n) throw DimensionMismatch("fixed_point_map");
    const Vec w = coupled_direction(prob.a, delta);
    const double norm = w.norm();
    if (norm < 1e-12) throw DegenerateDirection(prob.slot + 1);
    return project_halfspace(std::sqrt(prob.alpha) / norm * w, prob);
}

double stationarity_residual(const Vec& delta, const SlotErrorProblem& prob) {
    const Vec w = coupled_direction(prob.a, delta);
    const double norm = w.norm();
    if (norm < 1e-300) return delta.cwiseAbs().maxCoeff();
    return (delta - std::sqrt(prob.alpha) / norm * w).cwiseAbs().maxCoeff();
}

double lambda_from_delta(const Vec& delta, const SlotErrorProblem& prob, double k_h,
                         double beta_m) {
    const Vec w = coupled_direction(prob.a, delta);
    return k_h + beta_m + k_h * w.norm() / (2.0 * std::sqrt(prob.alpha));
}

double gamma_min_norm(const SlotErrorProblem& prob) {
    const int n = prob.users();
    if (n == 1) return std::abs(prob.a[0]);
    const Vec& a = prob.a;
    const double a_sum = a.sum();
    const double threshold = std::sqrt(prob.alpha * n) - a_sum / (n - 1);

    // Stationarity of |a + A x|^2 over {x >= 0, 1'x >= threshold} gives
    // x = max(a + beta 1, 0) for a scalar beta tied to the two multipliers.
    auto x_sum = [&](double beta) {
        double s = 0.0;
        for (int i = 0; i < n; ++i) s += std::max(a[i] + beta, 0.0);
        return s;
    };
    auto bisect = [](auto&& f, double lo, double hi) {
        for (int it = 0; it < 200; ++it) {
            const double mid = 0.5 * (lo + hi);
            if (f(mid) < 0.0)
                lo = mid;
            else
                hi = mid;
        }
        return 0.5 * (lo + hi);
    };

    // Unconstrained-in-the-halfspace root: beta + (n-2) S(beta) + 1'a = 0.
    auto phi = [&](double beta) { return beta + (n - 2) * x_sum(beta) + a_sum; };
    const double a_max = a.maxCoeff();
    double lo = std::min(-a_max, -a_sum) - 1.0;
    double hi = std::abs(a_sum) + 1.0;
    double beta = bisect([&](double b) { return phi(b); }, lo, hi);

    if (x_sum(beta) < threshold) {
        // Halfspace active: pick beta with 1'x(beta) = threshold.
        double hi2 = beta + 1.0;
        while (x_sum(hi2) < threshold) hi2 = beta + 2.0 * (hi2 - beta);
        beta = bisect([&](double b) { return x_sum(b) - threshold; }, beta, hi2);
    }

    Vec x(n);
    for (int i = 0; i < n; ++i) x[i] = std::max(a[i] + beta, 0.0);
    return coupled_direction(a, x).norm();
}

double contraction_constant(const SlotErrorProblem& prob) {
    const int n = prob.users();
    if (n == 1) return 0.0;
    const double gamma = gamma_min_norm(prob);
    if (gamma < 1e-300) return std::numeric_limits<double>::infinity();
    return std::sqrt(prob.alpha) * (n - 1) / gamma;
}

SlotErrorSolution solve_slot_errors(const SlotErrorProblem& prob, double k_h, double beta_m,
                                    double tol, int max_iter, const Vec* warm_start) {
    if (!(tol > 0.0)) throw ModelError("solve_slot_errors: tol must be > 0");
    const int n = prob.users();
    SlotErrorSolution sol;

    if (n == 1) {
        if (std::abs(prob.a[0]) < 1e-12) throw DegenerateDirection(prob.slot + 1);
        sol.delta = Vec::Constant(1, std::sqrt(prob.alpha) * (prob.a[0] > 0 ? 1.0 : -1.0));
        sol.lambda = k_h + beta_m + k_h * std::abs(prob.a[0]) / (2.0 * std::sqrt(prob.alpha));
        sol.iterations = 1;
        sol.q = 0.0;
        sol.contraction_certified = true;
        return sol;
    }

    Vec delta = (warm_start && warm_start->size() == n)
                    ? *warm_start
                    : Vec::Constant(n, std::sqrt(prob.alpha / n));
    double residual = std::numeric_limits<double>::infinity();
    int k = 0;
    while (k < max_iter) {
        const Vec next = fixed_point_map(delta, prob);
        residual = (next - delta).norm();
        delta = next;
        ++k;
        if (residual <= tol) break;
    }
    if (residual > tol) throw MaxIterationsExceeded("solve_slot_errors", residual);

    if (delta.minCoeff() < 0.0) {
        delta = delta.cwiseMax(0.0);
        sol.clamped_negative = true;
    }
    sol.delta = delta;
    sol.lambda = lambda_from_delta(delta, prob, k_h, beta_m);
    sol.residual = residual;
    sol.iterations = k;
    sol.q = contraction_constant(prob);
    sol.contraction_certified = sol.q < 1.0;
    return sol;
}

std::vector<SlotErrorSolution> solve_all_slots(const std::vector<SlotErrorProblem>& probs,
                                               const GridCostParams& params, double tol_per_slot,
                                               int max_iter, bool parallel,
                                               const std::vector<Vec>* warm_starts) {
    const int H = static_cast<int>(probs.size());
    std::vector<SlotErrorSolution> out(H);
    std::exception_ptr failure = nullptr;

#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic) if (parallel)
#endif
    for (int h = 0; h < H; ++h) {
        try {
            const Vec* warm = warm_starts && h < static_cast<int>(warm_starts->size())
                                  ? &(*warm_starts)[h]
                                  : nullptr;
            out[h] = solve_slot_errors(probs[h], params.k[probs[h].slot], params.beta_m,
                                       tol_per_slot, max_iter, warm);
        } catch (...) {
#ifdef _OPENMP
#pragma omp critical
#endif
            if (!failure) failure = std::current_exception();
        }
    }
    if (failure) std::rethrow_exception(failure);
    return out;
}

LockstepResult solve_all_slots_lockstep(const std::vector<SlotErrorProblem>& probs,
                                        const GridCostParams& params, double tol, int max_iter,
                                        bool parallel) {
    const int H = static_cast<int>(probs.size());
    LockstepResult res;
    res.slots.resize(H);
    std::vector<Vec> delta(H);
    std::vector<double> change(H, 0.0);
    for (int h = 0; h < H; ++h)
        delta[h] = Vec::Constant(probs[h].users(), std::sqrt(probs[h].alpha / probs[h].users()));

    double joint = std::numeric_limits<double>::infinity();
    int k = 0;
    while (k < max_iter) {
        std::exception_ptr failure = nullptr;
#ifdef _OPENMP
#pragma omp parallel for schedule(static) if (parallel)
#endif
        for (int h = 0; h < H; ++h) {
            try {
                const Vec next = fixed_point_map(delta[h], probs[h]);
                change[h] = (next - delta[h]).norm();
                delta[h] = next;
            } catch (...) {
#ifdef _OPENMP
#pragma omp critical
#endif
                if (!failure) failure = std::current_exception();
            }
        }
        if (failure) std::rethrow_exception(failure);
        joint = 0.0;
        for (int h = 0; h < H; ++h) joint += change[h];
        res.residual_trace.push_back(joint);
        ++k;
        if (joint <= tol) break;
    }
    if (joint > tol) throw MaxIterationsExceeded("solve_all_slots_lockstep", joint);

    res.iterations = k;
    for (int h = 0; h < H; ++h) {
        SlotErrorSolution& s = res.slots[h];
        s.delta = delta[h];
        if (s.delta.minCoeff() < 0.0) {
            s.delta = s.delta.cwiseMax(0.0);
            s.clamped_negative = true;
        }
        s.lambda = lambda_from_delta(s.delta, probs[h], params.k[probs[h].slot], params.beta_m);
        s.residual = change[h];
        s.iterations = k;
        s.q = contraction_constant(probs[h]);
        s.contraction_certified = s.q < 1.0;
    }
    return res;
}

Vec random_point_in_region(const SlotErrorProblem& prob, std::uint64_t seed) {
    const int n = prob.users();
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> uni(0.0, 2.0 * std::sqrt(prob.alpha));
    Vec x(n);
    for (int i = 0; i < n; ++i) x[i] = uni(rng);
    const double threshold = std::sqrt(prob.alpha * n) - prob.a.sum() / (n - 1);
    const double deficit = threshold - x.sum();
    if (deficit > 0.0) x.array() += deficit / n;  // shift along 1 keeps x >= 0
    return x;
}

}  // namespace dsm
