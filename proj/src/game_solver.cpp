#include "dsm/game_solver.hpp"

#include "dsm/core_model.hpp"
#include "dsm/rng.hpp"

#include <chrono>
#include <cmath>
#include <random>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace dsm {

double default_tau(const Scenario& scenario) {
    return 2.0 * scenario.params.k.maxCoeff() * scenario.user_count();
}

namespace {

using Clock = std::chrono::steady_clock;

double elapsed_ms(Clock::time_point since) {
    return std::chrono::duration<double, std::milli>(Clock::now() - since).count();
}

// Mutable solver state: loads and errors as |H| x |D| matrices.
struct SolverState {
    const Scenario& scenario;
    const SolverConfig& cfg;
    double tau;
    int H;
    int D;
    Eigen::MatrixXd loads;   // slot-major
    Eigen::MatrixXd deltas;
    Vec total_load;          // per slot, kept in sync with `loads`
    Vec lambdas;
    std::vector<int> active;
    std::vector<Vec> warm_x;                 // per active user
    std::vector<ProjectionWorkspace> works;  // per active user
    std::vector<double> q;
    std::vector<char> certified;
    bool clamped = false;
    double sum_delta_residual = 0.0;

    SolverState(const Scenario& s, const SolverConfig& c, double tau_value)
        : scenario(s), cfg(c), tau(tau_value), H(s.grid.slot_count), D(s.user_count()) {
        loads.resize(H, D);
        deltas = Eigen::MatrixXd::Zero(H, D);
        lambdas = Vec::Zero(H);
        q.assign(H, 0.0);
        certified.assign(H, 0);
        for (int n = 0; n < D; ++n) {
            const UserModel& u = s.users[n];
            if (u.is_active()) {
                active.push_back(n);
                const DeviceSchedule d0 = find_feasible_schedule(u);
                loads.col(n) = d0.implied_load(u);
                warm_x.push_back(DeviceLayout(u).from_schedule(d0));
            } else {
                loads.col(n) = u.base_demand;
            }
        }
        works.resize(active.size());
        total_load = loads.rowwise().sum();
        for (int h = 0; h < H; ++h)
            if (!(total_load[h] > 0.0)) throw NonPositiveAggregateLoad(h + 1);
        if (!c.naive) {
            for (int n = 0; n < D; ++n)
                for (int h = 0; h < H; ++h)
                    deltas(h, n) = std::sqrt(s.params.alpha[h] / D);
        }
    }

    Vec error_sums() const { return deltas.rowwise().sum(); }

    double day_ahead_cost(int n) const {
        const Vec dsum = error_sums();
        double cost = 0.0;
        for (int h = 0; h < H; ++h)
            cost += scenario.params.k[h] * (total_load[h] + dsum[h]) * (loads(h, n) + deltas(h, n));
        cost += scenario.params.beta_m * deltas.col(n).squaredNorm();
        return cost;
    }

    BestResponseResult respond(int idx, const Vec& others, const Vec& dsum, const Vec& centroid,
                               double tau_used, ProjectionWorkspace* ws, const Vec* warm) {
        const int n = active[idx];
        return best_response(scenario.users[n], others, dsum, deltas.col(n), centroid, tau_used,
                             scenario.params, warm, ws, cfg.br);
    }

    // One proximal sweep over the active users; returns nothing, mutates loads.
    void sweep(const Eigen::MatrixXd& centroids) {
        const Vec dsum = error_sums();
        if (cfg.sweep_mode == SweepMode::GaussSeidel) {
            for (std::size_t idx = 0; idx < active.size(); ++idx) {
                const int n = active[idx];
                const Vec others = total_load - loads.col(n);
                BestResponseResult r = respond(static_cast<int>(idx), others, dsum,
                                               centroids.col(idx), tau, &works[idx], &warm_x[idx]);
                total_load += r.load.l - loads.col(n);
                loads.col(n) = r.load.l;
                warm_x[idx] = r.x;
            }
        } else {
            const Eigen::MatrixXd snapshot = loads;
            const Vec snapshot_total = total_load;
            std::vector<Vec> fresh(active.size());
            std::exception_ptr failure = nullptr;
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic) if (cfg.parallel)
#endif
            for (int idx = 0; idx < static_cast<int>(active.size()); ++idx) {
                try {
                    const int n = active[idx];
                    const Vec others = snapshot_total - snapshot.col(n);
                    BestResponseResult r = respond(idx, others, dsum, centroids.col(idx), tau,
                                                   &works[idx], &warm_x[idx]);
                    fresh[idx] = r.load.l;
                    warm_x[idx] = r.x;
                } catch (...) {
#ifdef _OPENMP
#pragma omp critical
#endif
                    if (!failure) failure = std::current_exception();
                }
            }
            if (failure) std::rethrow_exception(failure);
            for (std::size_t idx = 0; idx < active.size(); ++idx)
                loads.col(active[idx]) = fresh[idx];
            total_load = loads.rowwise().sum();
        }
        for (int h = 0; h < H; ++h)
            if (!(total_load[h] > 0.0)) throw NonPositiveAggregateLoad(h + 1);
    }

    // Step (S.4): rebuild a_h from the fresh loads and solve every slot.
    void refresh_errors() {
        std::vector<SlotErrorProblem> probs;
        probs.reserve(H);
        for (int h = 0; h < H; ++h) {
            Vec a(D);
            for (int n = 0; n < D; ++n) a[n] = total_load[h] + loads(h, n);
            probs.emplace_back(h, std::move(a), scenario.params.alpha[h]);
        }
        std::vector<Vec> warm(H);
        for (int h = 0; h < H; ++h) warm[h] = deltas.row(h).transpose();
        const double tol_slot = cfg.inner_tol / H;
        auto slots = solve_all_slots(probs, scenario.params, tol_slot, cfg.inner_max_iter,
                                     cfg.parallel, &warm);
        sum_delta_residual = 0.0;
        for (int h = 0; h < H; ++h) {
            deltas.row(h) = slots[h].delta.transpose();
            lambdas[h] = slots[h].lambda;
            q[h] = slots[h].q;
            certified[h] = slots[h].contraction_certified ? 1 : 0;
            clamped = clamped || slots[h].clamped_negative;
            sum_delta_residual += slots[h].residual;
        }
    }

    // Largest relative unregularized improvement any active user can achieve.
    double certificate() {
        if (active.empty()) return 0.0;
        double scale = 0.0;
        std::vector<double> current(active.size());
        for (std::size_t idx = 0; idx < active.size(); ++idx) {
            current[idx] = day_ahead_cost(active[idx]);
            scale += std::abs(current[idx]);
        }
        for (int n = 0; n < D; ++n)
            if (!scenario.users[n].is_active()) scale += std::abs(day_ahead_cost(n));
        scale = std::max(scale / D, 1e-12);

        const Vec dsum = error_sums();
        double worst = 0.0;
        for (std::size_t idx = 0; idx < active.size(); ++idx) {
            const int n = active[idx];
            const Vec others = total_load - loads.col(n);
            ProjectionWorkspace ws = works[idx];  // keep the solver workspace intact
            BestResponseResult r =
                respond(static_cast<int>(idx), others, dsum, loads.col(n), 0.0, &ws, &warm_x[idx]);
            double best_cost = 0.0;
            for (int h = 0; h < H; ++h)
                best_cost += scenario.params.k[h] * (others[h] + r.load.l[h] + dsum[h]) *
                             (r.load.l[h] + deltas(h, n));
            best_cost += scenario.params.beta_m * deltas.col(n).squaredNorm();
            const double gain = (current[idx] - best_cost) / std::max(std::abs(current[idx]), scale);
            worst = std::max(worst, gain);
        }
        return worst;
    }

    std::vector<LoadProfile> load_profiles() const {
        std::vector<LoadProfile> out;
        out.reserve(D);
        for (int n = 0; n < D; ++n) out.emplace_back(n, loads.col(n));
        return out;
    }

    std::vector<ErrorProfile> error_profiles() const {
        std::vector<ErrorProfile> out;
        out.reserve(D);
        for (int n = 0; n < D; ++n) out.emplace_back(n, deltas.col(n));
        return out;
    }
};

}  // namespace

EquilibriumResult solve(const Scenario& scenario, const SolverConfig& config) {
    if (config.outer_tol <= 0.0 || config.inner_tol <= 0.0 || config.ne_tol <= 0.0)
        throw ModelError("solve: tolerances must be > 0");
    const double tau = config.tau > 0.0 ? config.tau : default_tau(scenario);

    SolverState st(scenario, config, tau);
    const auto t0 = Clock::now();

    // Centroids over active users only; passive profiles never move.
    Eigen::MatrixXd centroids(st.H, st.active.size());
    for (std::size_t idx = 0; idx < st.active.size(); ++idx)
        centroids.col(idx) = st.loads.col(st.active[idx]);

    EquilibriumResult res;
    res.naive = config.naive;

    Eigen::MatrixXd prev = st.loads;
    double rel = std::numeric_limits<double>::infinity();
    int cert_backoff = 1;
    int iters_since_cert = 0;

    int i = 0;
    for (; i < config.max_outer; ++i) {
        st.sweep(centroids);
        if (!config.naive) st.refresh_errors();

        const double norm = st.loads.norm();
        rel = norm > 0.0 ? (st.loads - prev).norm() / norm : 0.0;
        prev = st.loads;
        res.convergence_trace.push_back(
            {i + 1, rel, config.naive ? 0.0 : st.sum_delta_residual, elapsed_ms(t0)});

        if (rel <= config.ne_tol) {
            for (std::size_t idx = 0; idx < st.active.size(); ++idx)
                centroids.col(idx) = st.loads.col(st.active[idx]);
        }
        if (rel <= config.outer_tol) {
            if (++iters_since_cert >= cert_backoff) {
                iters_since_cert = 0;
                const double cert = st.certificate();
                if (cert <= 10.0 * config.ne_tol) {
                    res.ne_certificate = cert;
                    res.converged = true;
                    ++i;
                    break;
                }
                cert_backoff = std::min(2 * cert_backoff, 64);
            }
            // Not yet an equilibrium of the unregularized game: move the
            // proximal centers and keep sweeping.
            for (std::size_t idx = 0; idx < st.active.size(); ++idx)
                centroids.col(idx) = st.loads.col(st.active[idx]);
        }
    }

    if (!res.converged) {
        if (!config.best_effort) throw MaxOuterIterations(rel);
        res.ne_certificate = st.certificate();
    }
    if (config.naive) st.refresh_errors();  // one worst-case pass to price the loads

    res.loads = st.load_profiles();
    res.errors = st.error_profiles();
    res.lambdas = st.lambdas;
    res.robust_aggregate = st.total_load + st.deltas.rowwise().sum();
    res.outer_iterations = i;
    res.contraction_q = st.q;
    res.contraction_certified = st.certified;
    res.delta_clamped = st.clamped;
    return res;
}

double verify_equilibrium(const EquilibriumResult& result, const Scenario& scenario, int probes,
                          std::uint64_t seed) {
    const int H = scenario.grid.slot_count;
    const int D = scenario.user_count();
    Eigen::MatrixXd loads(H, D);
    Eigen::MatrixXd deltas(H, D);
    for (int n = 0; n < D; ++n) {
        loads.col(n) = result.loads[n].l;
        deltas.col(n) = result.errors[n].delta;
    }
    const Vec total = loads.rowwise().sum();
    const Vec dsum = deltas.rowwise().sum();

    auto cost_at = [&](int n, const Vec& l_n) {
        const Vec others = total - loads.col(n);
        double c = 0.0;
        for (int h = 0; h < H; ++h)
            c += scenario.params.k[h] * (others[h] + l_n[h] + dsum[h]) * (l_n[h] + deltas(h, n));
        return c + scenario.params.beta_m * deltas.col(n).squaredNorm();
    };

    double scale = 0.0;
    for (int n = 0; n < D; ++n) scale += std::abs(cost_at(n, loads.col(n)));
    scale = std::max(scale / D, 1e-12);

    double worst = 0.0;
    for (int n = 0; n < D; ++n) {
        const UserModel& u = scenario.users[n];
        if (!u.is_active()) continue;
        const double f_cur = cost_at(n, loads.col(n));
        const Vec others = total - loads.col(n);

        BestResponseResult r = best_response(u, others, dsum, deltas.col(n), loads.col(n), 0.0,
                                             scenario.params);
        double best_cost = cost_at(n, r.load.l);

        if (probes > 0) {
            const DeviceLayout lay(u);
            const Polytope poly = build_device_polytope(u);
            const Vec start = lay.from_schedule(find_feasible_schedule(u));
            std::mt19937_64 rng(mix_seed(seed, static_cast<std::uint64_t>(n)));
            std::uniform_real_distribution<double> uni(0.0, 1.0);
            const double span = std::max({u.gen_cap_hour, u.charge_rate_max, 1.0});
            for (int p = 0; p < probes; ++p) {
                Vec x(lay.dim());
                for (int j = 0; j < lay.dim(); ++j) x[j] = span * uni(rng);
                const Vec y = project_onto_polytope(poly, x, start);
                best_cost = std::min(best_cost, cost_at(n, lay.implied_load(u, y)));
            }
        }
        worst = std::max(worst, (f_cur - best_cost) / std::max(std::abs(f_cur), scale));
    }
    return worst;
}

MonotonicityReport monotonicity_diagnostics(const Scenario& scenario,
                                            const EquilibriumResult& at) {
    const int H = scenario.grid.slot_count;
    const int D = scenario.user_count();
    MonotonicityReport rep;
    rep.day_ahead_min_eigenvalue = scenario.params.k.minCoeff();
    rep.day_ahead_max_eigenvalue = scenario.params.k.maxCoeff() * (D + 1);
    rep.inner_min_eigenvalue = Vec::Zero(H);
    rep.inner_max_eigenvalue = Vec::Zero(H);
    rep.lambda_threshold = Vec::Zero(H);
    rep.strongly_monotone.assign(H, 0);
    for (int h = 0; h < H; ++h) {
        const double k = scenario.params.k[h];
        const double base = k + 2.0 * scenario.params.beta_m - 2.0 * at.lambdas[h];
        const double with_ones = base + k * D;
        rep.inner_min_eigenvalue[h] = D >= 2 ? std::min(base, with_ones) : with_ones;
        rep.inner_max_eigenvalue[h] = D >= 2 ? std::max(base, with_ones) : with_ones;
        rep.lambda_threshold[h] = 0.5 * k * (D + 1) + scenario.params.beta_m;
        rep.strongly_monotone[h] = at.lambdas[h] > rep.lambda_threshold[h] ? 1 : 0;
    }
    return rep;
}

}  // namespace dsm
