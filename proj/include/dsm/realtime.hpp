// Real-time market evaluation: robust billing with a dead band around the
// worst-case error margins, the penalty-only comparison model, and the Monte
// Carlo harness that averages both over sampled consumption deviations.
#pragma once

#include "dsm/game_solver.hpp"

namespace dsm {

struct PenaltyParams {
    Vec nu;       // under-consumption weight per slot
    Vec upsilon;  // over-consumption weight per slot
    Vec kappa;    // scaling, nu + upsilon == kappa per slot

    void validate() const;
};

/// Construction used by the experiments: kappa(h) = sqrt(|D|/alpha(h)),
/// nu = 0.2 kappa on night slots (first third of the day), 0.8 kappa after,
/// upsilon = kappa - nu.
PenaltyParams default_penalty_params(const GridCostParams& params, int user_count);

/// Dead-band hinge: zero on [l_n - d*_n, l_n + d*_n], linear outside.
double penalty_psi(double l_n, double delta_star_n, double l_rt_n, double nu_h, double upsilon_h);

/// Robust real-time bill of user n (m_beta scales the |delta_n|^2 term; the
/// comparison harness passes 0).
double robust_rt_cost(int n, const std::vector<LoadProfile>& l_star,
                      const std::vector<ErrorProfile>& delta_star,
                      const std::vector<LoadProfile>& l_rt, const GridCostParams& params,
                      const PenaltyParams& pen, double m_beta);

/// Penalty-only bill of user n against the worst-case aggregate of the naive
/// run; every deviation from the announced load is charged immediately.
double nonrobust_rt_cost(int n, const std::vector<LoadProfile>& l_star,
                         const std::vector<LoadProfile>& l_rt, const Vec& worst_case_aggregate,
                         const GridCostParams& params, const PenaltyParams& pen);

/// l_rt_n(h) = l*_n(h) + eps with eps ~ Normal(0, variance_scale * alpha(h)/|D|),
/// independent across users and slots; deterministic in the seed.
std::vector<LoadProfile> sample_rt_deviations(const std::vector<LoadProfile>& l_star,
                                              const Vec& alpha, std::uint64_t seed,
                                              double variance_scale = 1.0);

struct RunRecord {
    int run_id = 0;
    double robust_total = 0.0;
    double nonrobust_total = 0.0;
};

struct RealTimeOutcome {
    Vec robust_costs;        // per-user mean over runs
    Vec nonrobust_costs;
    double mean_relative_gain_pct = 0.0;  // (nonrobust - robust)/nonrobust
    double gain_stderr_pct = 0.0;
    std::vector<RunRecord> runs;
};

/// Averages both bills over `runs` sampled deviations. The same deviation
/// draw is applied to both announcements (run r uses substream mix(seed, r)).
RealTimeOutcome monte_carlo_compare(const EquilibriumResult& robust,
                                    const EquilibriumResult& naive, const Scenario& scenario,
                                    int runs, std::uint64_t seed, double variance_scale = 1.0,
                                    bool zero_m_term = true, bool parallel = true);

}  // namespace dsm
