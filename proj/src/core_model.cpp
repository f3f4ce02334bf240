#include "dsm/core_model.hpp"

namespace dsm {

AggregateState aggregate_load(const std::vector<LoadProfile>& profiles,
                              const std::vector<ErrorProfile>* errors) {
    if (profiles.empty()) throw EmptyUserSet();
    const auto slots = profiles.front().l.size();
    AggregateState agg;
    agg.total_load = Vec::Zero(slots);
    agg.total_error = Vec::Zero(slots);
    for (const auto& p : profiles) {
        if (p.l.size() != slots) throw DimensionMismatch("aggregate_load");
        agg.total_load += p.l;
    }
    if (errors) {
        for (const auto& e : *errors) {
            if (e.delta.size() != slots) throw DimensionMismatch("aggregate_load errors");
            agg.total_error += e.delta;
        }
    }
    for (int h = 0; h < slots; ++h) {
        if (!(agg.total_load[h] > 0.0)) throw NonPositiveAggregateLoad(h + 1);
    }
    return agg;
}

double grid_cost(double k_h, double total_load_h, double delta_sum_h) {
    const double s = total_load_h + delta_sum_h;
    return k_h * s * s;
}

double user_day_ahead_cost(int n, const std::vector<LoadProfile>& loads,
                           const std::vector<ErrorProfile>& errors,
                           const GridCostParams& params) {
    if (loads.size() != errors.size()) throw DimensionMismatch("user_day_ahead_cost");
    const auto slots = params.k.size();
    if (n < 0 || n >= static_cast<int>(loads.size()))
        throw ModelError("user_day_ahead_cost: user index out of range");
    Vec total_load = Vec::Zero(slots);
    Vec total_error = Vec::Zero(slots);
    for (const auto& p : loads) {
        if (p.l.size() != slots) throw DimensionMismatch("user_day_ahead_cost loads");
        total_load += p.l;
    }
    for (const auto& e : errors) {
        if (e.delta.size() != slots) throw DimensionMismatch("user_day_ahead_cost errors");
        total_error += e.delta;
    }
    double cost = 0.0;
    for (int h = 0; h < slots; ++h) {
        cost += params.k[h] * (total_load[h] + total_error[h]) *
                (loads[n].l[h] + errors[n].delta[h]);
    }
    cost += params.beta_m * errors[n].delta.squaredNorm();
    return cost;
}

}  // namespace dsm
