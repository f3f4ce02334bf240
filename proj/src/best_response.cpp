#include "dsm/best_response.hpp"

#include <cmath>

namespace dsm {

DeviceSchedule DeviceLayout::to_schedule(const Vec& x) const {
    DeviceSchedule d = DeviceSchedule::zero(slots);
    if (has_gen) d.g = x.segment(g_offset(), slots);
    if (has_store) {
        d.s_plus = x.segment(sp_offset(), slots);
        d.s_minus = x.segment(sm_offset(), slots);
    }
    return d;
}

Vec DeviceLayout::from_schedule(const DeviceSchedule& d) const {
    Vec x = Vec::Zero(dim());
    if (has_gen) x.segment(g_offset(), slots) = d.g;
    if (has_store) {
        x.segment(sp_offset(), slots) = d.s_plus;
        x.segment(sm_offset(), slots) = d.s_minus;
    }
    return x;
}

Vec DeviceLayout::implied_load(const UserModel& m, const Vec& x) const {
    Vec l = m.base_demand;
    if (has_gen) l -= x.segment(g_offset(), slots);
    if (has_store) l += x.segment(sp_offset(), slots) - x.segment(sm_offset(), slots);
    return l;
}

Vec DeviceLayout::pullback_load_gradient(const Vec& grad_l) const {
    Vec g = Vec::Zero(dim());
    if (has_gen) g.segment(g_offset(), slots) = -grad_l;
    if (has_store) {
        g.segment(sp_offset(), slots) = grad_l;
        g.segment(sm_offset(), slots) = -grad_l;
    }
    return g;
}

Polytope build_device_polytope(const UserModel& m) {
    const DeviceLayout lay(m);
    const int H = m.slots();
    Polytope p;
    p.dim = lay.dim();

    int n_ineq = 0;
    if (lay.has_gen) n_ineq += 2 * H + 1;          // boxes + daily budget
    if (lay.has_store) n_ineq += 4 * H + 2 * (H - 1);  // boxes + interior q bounds
    int n_eq = lay.has_store ? 1 : 0;              // terminal state of charge

    p.ineq_a = Eigen::MatrixXd::Zero(n_ineq, p.dim);
    p.ineq_b = Vec::Zero(n_ineq);
    p.eq_a = Eigen::MatrixXd::Zero(n_eq, p.dim);
    p.eq_b = Vec::Zero(n_eq);

    int r = 0;
    if (lay.has_gen) {
        for (int h = 0; h < H; ++h) {
            p.ineq_a(r, lay.g_offset() + h) = -1.0;
            p.ineq_b[r++] = 0.0;
            p.ineq_a(r, lay.g_offset() + h) = 1.0;
            p.ineq_b[r++] = m.gen_cap_hour;
        }
        for (int h = 0; h < H; ++h) p.ineq_a(r, lay.g_offset() + h) = 1.0;
        p.ineq_b[r++] = m.gen_cap_day;
    }
    if (lay.has_store) {
        for (int h = 0; h < H; ++h) {
            p.ineq_a(r, lay.sp_offset() + h) = -1.0;
            p.ineq_b[r++] = 0.0;
            p.ineq_a(r, lay.sp_offset() + h) = 1.0;
            p.ineq_b[r++] = m.charge_rate_max;
            p.ineq_a(r, lay.sm_offset() + h) = -1.0;
            p.ineq_b[r++] = 0.0;
            p.ineq_a(r, lay.sm_offset() + h) = 1.0;
            p.ineq_b[r++] = m.charge_rate_max;
        }
        // q(h) = leak^{h+1} q0 + sum_{j<=h} leak^{h-j} (eff+ s+(j) - eff- s-(j)).
        // The bounds at the terminal slot are implied by the equality row and
        // are omitted so the working set stays full rank.
        for (int h = 0; h < H; ++h) {
            const double passive_level = std::pow(m.leak_rate, h + 1) * m.initial_charge;
            const bool terminal = (h == H - 1);
            Vec row = Vec::Zero(p.dim);
            for (int j = 0; j <= h; ++j) {
                const double w = std::pow(m.leak_rate, h - j);
                row[lay.sp_offset() + j] = m.charge_eff * w;
                row[lay.sm_offset() + j] = -m.discharge_eff * w;
            }
            if (terminal) {
                p.eq_a.row(0) = row.transpose();
                p.eq_b[0] = m.initial_charge + m.end_of_day_delta - passive_level;
            } else {
                p.ineq_a.row(r) = -row.transpose();
                p.ineq_b[r++] = passive_level;  // q(h) >= 0
                p.ineq_a.row(r) = row.transpose();
                p.ineq_b[r++] = m.storage_capacity - passive_level;  // q(h) <= c
            }
        }
    }
    return p;
}

double best_response_objective(const Vec& load, const Vec& others_load_sum,
                               const Vec& error_sum, const Vec& own_error,
                               const Vec& centroid, double tau, const GridCostParams& params) {
    double value = params.beta_m * own_error.squaredNorm();
    for (int h = 0; h < load.size(); ++h) {
        const double total = load[h] + others_load_sum[h] + error_sum[h];
        value += params.k[h] * total * (load[h] + own_error[h]);
        const double dl = load[h] - centroid[h];
        value += 0.5 * tau * dl * dl;
    }
    return value;
}

namespace {

Vec objective_gradient_on_load(const Vec& load, const Vec& others_load_sum,
                               const Vec& error_sum, const Vec& own_error,
                               const Vec& centroid, double tau, const GridCostParams& params) {
    Vec g(load.size());
    for (int h = 0; h < load.size(); ++h) {
        g[h] = params.k[h] * (2.0 * load[h] + others_load_sum[h] + error_sum[h] + own_error[h]) +
               tau * (load[h] - centroid[h]);
    }
    return g;
}

}  // namespace

BestResponseResult best_response(const UserModel& m, const Vec& others_load_sum,
                                 const Vec& error_sum, const Vec& own_error,
                                 const Vec& centroid, double tau, const GridCostParams& params,
                                 const Vec* warm_start, ProjectionWorkspace* ws,
                                 const BestResponseConfig& cfg) {
    const int H = m.slots();
    if (others_load_sum.size() != H || error_sum.size() != H || own_error.size() != H ||
        centroid.size() != H || params.slots() != H)
        throw DimensionMismatch("best_response");
    if (tau < 0.0) throw ModelError("best_response: tau must be >= 0");

    BestResponseResult res;
    if (!m.is_active()) {
        res.load = LoadProfile(m.user_id, m.base_demand);
        res.schedule = DeviceSchedule::zero(H);
        res.objective = best_response_objective(m.base_demand, others_load_sum, error_sum,
                                                own_error, centroid, tau, params);
        return res;
    }

    const DeviceLayout lay(m);
    const Polytope poly = build_device_polytope(m);

    Vec x;
    if (warm_start && warm_start->size() == lay.dim() && poly.violation(*warm_start) <= 1e-8) {
        x = *warm_start;
    } else {
        x = lay.from_schedule(find_feasible_schedule(m));
    }

    auto objective_at = [&](const Vec& xv) {
        return best_response_objective(lay.implied_load(m, xv), others_load_sum, error_sum,
                                       own_error, centroid, tau, params);
    };

    // Curvature bound of the objective in device coordinates; the residual is
    // measured at this step so its scale stays meaningful for stiff tau.
    const double row_weight = (lay.has_gen ? 1.0 : 0.0) + (lay.has_store ? 2.0 : 0.0);
    double lipschitz = 0.0;
    for (int h = 0; h < H; ++h)
        lipschitz = std::max(lipschitz, row_weight * (2.0 * params.k[h] + tau));
    const double t_res = std::min(cfg.initial_step, 1.0 / std::max(lipschitz, 1e-12));

    // Exact objective increment along a device-space step; avoids the
    // cancellation of comparing two O(1) objective values near the optimum.
    auto increment = [&](const Vec& grad_l, const Vec& dx) {
        Vec dl = Vec::Zero(H);
        if (lay.has_gen) dl -= dx.segment(lay.g_offset(), H);
        if (lay.has_store)
            dl += dx.segment(lay.sp_offset(), H) - dx.segment(lay.sm_offset(), H);
        double quad = 0.0;
        for (int h = 0; h < H; ++h) quad += (params.k[h] + 0.5 * tau) * dl[h] * dl[h];
        return grad_l.dot(dl) + quad;
    };

    int iter = 0;
    double kkt = 0.0;
    double step_start = cfg.initial_step;  // carried across iterations once backtracked
    for (; iter < cfg.max_iter; ++iter) {
        const Vec grad_l = objective_gradient_on_load(lay.implied_load(m, x), others_load_sum,
                                                      error_sum, own_error, centroid, tau, params);
        const Vec grad = lay.pullback_load_gradient(grad_l);

        const Vec trial = project_onto_polytope(poly, x - t_res * grad, x, ws);
        kkt = (trial - x).norm() / t_res;
        if (kkt <= cfg.tol) break;

        double step = step_start;
        Vec candidate =
            step == t_res ? trial : project_onto_polytope(poly, x - step * grad, x, ws);
        while (true) {
            // Any step at or below 1/L descends on a convex quadratic, so the
            // sufficient-decrease test is only consulted above that.
            if (step <= t_res) {
                x = candidate;
                break;
            }
            const Vec d = candidate - x;
            if (increment(grad_l, d) <= cfg.armijo_c * grad.dot(d)) {
                x = candidate;
                break;
            }
            step = std::max(step * cfg.armijo_factor, t_res);
            candidate = project_onto_polytope(poly, x - step * grad, x, ws);
        }
        step_start = step;
    }
    if (iter >= cfg.max_iter) throw MaxIterationsExceeded("best_response", kkt);
    const double f = objective_at(x);

    res.schedule = lay.to_schedule(x);
    res.load = LoadProfile(m.user_id, lay.implied_load(m, x));
    res.x = x;
    res.objective = f;
    res.kkt_residual = kkt;
    res.iterations = iter;
    return res;
}

}  // namespace dsm
