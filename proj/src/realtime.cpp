#include "dsm/realtime.hpp"

#include "dsm/rng.hpp"

#include <cmath>

namespace dsm {

void PenaltyParams::validate() const {
    if (nu.size() != upsilon.size() || nu.size() != kappa.size())
        throw DimensionMismatch("PenaltyParams");
    for (int h = 0; h < nu.size(); ++h) {
        if (nu[h] < 0.0 || upsilon[h] < 0.0) throw ModelError("PenaltyParams: negative weight");
        if (std::abs(nu[h] + upsilon[h] - kappa[h]) > 1e-9 * std::max(1.0, kappa[h]))
            throw ModelError("PenaltyParams: nu + upsilon != kappa at slot " + std::to_string(h + 1));
    }
}

PenaltyParams default_penalty_params(const GridCostParams& params, int user_count) {
    const int H = params.slots();
    const int night_end = H / 3;
    PenaltyParams pen;
    pen.nu = Vec(H);
    pen.upsilon = Vec(H);
    pen.kappa = Vec(H);
    for (int h = 0; h < H; ++h) {
        pen.kappa[h] = std::sqrt(user_count / params.alpha[h]);
        pen.nu[h] = (h < night_end ? 0.2 : 0.8) * pen.kappa[h];
        pen.upsilon[h] = pen.kappa[h] - pen.nu[h];
    }
    pen.validate();
    return pen;
}

double penalty_psi(double l_n, double delta_star_n, double l_rt_n, double nu_h, double upsilon_h) {
    const double under = l_n - delta_star_n - l_rt_n;
    const double over = l_rt_n - l_n - delta_star_n;
    return nu_h * std::max(under, 0.0) + upsilon_h * std::max(over, 0.0);
}

double robust_rt_cost(int n, const std::vector<LoadProfile>& l_star,
                      const std::vector<ErrorProfile>& delta_star,
                      const std::vector<LoadProfile>& l_rt, const GridCostParams& params,
                      const PenaltyParams& pen, double m_beta) {
    const int H = params.slots();
    if (l_star.size() != delta_star.size() || l_star.size() != l_rt.size())
        throw DimensionMismatch("robust_rt_cost");
    Vec robust_aggregate = Vec::Zero(H);
    for (std::size_t m = 0; m < l_star.size(); ++m)
        robust_aggregate += l_star[m].l + delta_star[m].delta;

    double cost = 0.0;
    for (int h = 0; h < H; ++h) {
        const double psi = penalty_psi(l_star[n].l[h], delta_star[n].delta[h], l_rt[n].l[h],
                                       pen.nu[h], pen.upsilon[h]);
        cost += params.k[h] * robust_aggregate[h] * (l_rt[n].l[h] + psi);
    }
    return cost + m_beta * delta_star[n].delta.squaredNorm();
}

double nonrobust_rt_cost(int n, const std::vector<LoadProfile>& l_star,
                         const std::vector<LoadProfile>& l_rt, const Vec& worst_case_aggregate,
                         const GridCostParams& params, const PenaltyParams& pen) {
    const int H = params.slots();
    if (l_star.size() != l_rt.size()) throw DimensionMismatch("nonrobust_rt_cost");
    double cost = 0.0;
    for (int h = 0; h < H; ++h) {
        const double under = std::max(l_star[n].l[h] - l_rt[n].l[h], 0.0);
        const double over = std::max(l_rt[n].l[h] - l_star[n].l[h], 0.0);
        cost += params.k[h] * worst_case_aggregate[h] *
                (l_rt[n].l[h] + pen.nu[h] * under + pen.upsilon[h] * over);
    }
    return cost;
}

std::vector<LoadProfile> sample_rt_deviations(const std::vector<LoadProfile>& l_star,
                                              const Vec& alpha, std::uint64_t seed,
                                              double variance_scale) {
    const int D = static_cast<int>(l_star.size());
    std::vector<LoadProfile> rt = l_star;
    std::mt19937_64 rng(seed);
    for (int n = 0; n < D; ++n) {
        for (int h = 0; h < alpha.size(); ++h) {
            const double sd = std::sqrt(variance_scale * alpha[h] / D);
            rt[n].l[h] += sd * sample_standard_normal(rng);
        }
    }
    return rt;
}

RealTimeOutcome monte_carlo_compare(const EquilibriumResult& robust,
                                    const EquilibriumResult& naive, const Scenario& scenario,
                                    int runs, std::uint64_t seed, double variance_scale,
                                    bool zero_m_term, bool parallel) {
    if (runs < 1) throw ModelError("monte_carlo_compare: runs must be >= 1");
    const int D = scenario.user_count();
    const PenaltyParams pen = default_penalty_params(scenario.params, D);
    const double m_beta = zero_m_term ? 0.0 : scenario.params.beta_m;

    Eigen::MatrixXd robust_costs(runs, D);
    Eigen::MatrixXd nonrobust_costs(runs, D);
    std::exception_ptr failure = nullptr;

#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic) if (parallel)
#endif
    for (int r = 0; r < runs; ++r) {
        try {
            const std::uint64_t sub = mix_seed(seed, static_cast<std::uint64_t>(r));
            // Same deviation draw against both announcements.
            const auto rt_robust =
                sample_rt_deviations(robust.loads, scenario.params.alpha, sub, variance_scale);
            const auto rt_naive =
                sample_rt_deviations(naive.loads, scenario.params.alpha, sub, variance_scale);
            for (int n = 0; n < D; ++n) {
                robust_costs(r, n) = robust_rt_cost(n, robust.loads, robust.errors, rt_robust,
                                                    scenario.params, pen, m_beta);
                nonrobust_costs(r, n) = nonrobust_rt_cost(n, naive.loads, rt_naive,
                                                          naive.robust_aggregate, scenario.params,
                                                          pen);
            }
        } catch (...) {
#ifdef _OPENMP
#pragma omp critical
#endif
            if (!failure) failure = std::current_exception();
        }
    }
    if (failure) std::rethrow_exception(failure);

    RealTimeOutcome out;
    out.robust_costs = robust_costs.colwise().mean().transpose();
    out.nonrobust_costs = nonrobust_costs.colwise().mean().transpose();
    out.runs.reserve(runs);
    double gain_sum = 0.0;
    double gain_sq = 0.0;
    for (int r = 0; r < runs; ++r) {
        RunRecord rec;
        rec.run_id = r;
        rec.robust_total = robust_costs.row(r).sum();
        rec.nonrobust_total = nonrobust_costs.row(r).sum();
        out.runs.push_back(rec);
        const double gain =
            100.0 * (rec.nonrobust_total - rec.robust_total) / rec.nonrobust_total;
        gain_sum += gain;
        gain_sq += gain * gain;
    }
    out.mean_relative_gain_pct = gain_sum / runs;
    if (runs > 1) {
        const double var =
            std::max(0.0, (gain_sq - gain_sum * gain_sum / runs) / (runs - 1));
        out.gain_stderr_pct = std::sqrt(var / runs);
    }
    return out;
}

}  // namespace dsm
