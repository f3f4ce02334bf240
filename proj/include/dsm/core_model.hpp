// Grid cost primitives: aggregate load, quadratic grid cost and the per-user
// cumulative day-ahead cost obtained from the proportional split.
#pragma once

#include "dsm/types.hpp"

namespace dsm {

/// Sums loads over users in user-index order. Throws EmptyUserSet or
/// NonPositiveAggregateLoad if the result violates the positivity assumption.
AggregateState aggregate_load(const std::vector<LoadProfile>& profiles,
                              const std::vector<ErrorProfile>* errors = nullptr);

/// Energy production cost at one slot: K_h * (L(h) + sum_n delta_n(h))^2, in pounds.
double grid_cost(double k_h, double total_load_h, double delta_sum_h);

/// Cumulative day-ahead cost of user n:
///   sum_h K_h * (L(h) + 1'delta(h)) * (l_n(h) + delta_n(h)) + beta_m * |delta_n|^2.
double user_day_ahead_cost(int n, const std::vector<LoadProfile>& loads,
                           const std::vector<ErrorProfile>& errors,
                           const GridCostParams& params);

}  // namespace dsm
