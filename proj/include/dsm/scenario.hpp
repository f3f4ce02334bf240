// Experiment scenario generation: population mix, demand curves, cost
// coefficients calibrated to a target average price, and error budgets.
#pragma once

#include "dsm/types.hpp"
#include "dsm/user_model.hpp"

#include <cstdint>
#include <iosfwd>

namespace dsm {

struct ScenarioSpec {
    int user_count = 20;
    int slot_count = 24;
    double mean_daily_demand = 4.5;       // kWh per user per day
    double demand_noise_std = 4.5 * 0.1 / 24.0;  // kWh per slot
    double target_avg_price = 0.1412;     // pounds per kWh, no-DSM average
    double day_night_ratio = 1.5;         // K_day / K_night
    double alpha_fraction = 0.10;         // alpha(h) as a share of slot demand
    double beta_m = 0.001;
    std::uint64_t rng_seed = 1;
    bool literal_daily_gen_cap = false;   // gamma_max = 0.8 g_max instead of 0.8 g_max |H|
    std::vector<double> demand_template;  // optional normalized daily curve override
};

struct Scenario {
    TimeGrid grid{24};
    GridCostParams params;
    std::vector<UserModel> users;
    ScenarioSpec spec;

    int user_count() const { return static_cast<int>(users.size()); }
    int active_count() const;

    /// No-DSM loads: every user at its base demand.
    std::vector<LoadProfile> base_loads() const;
    /// Total no-DSM demand per slot.
    Vec base_demand_total() const;
    /// Average no-DSM price, total cost / total energy, pounds per kWh.
    double no_dsm_average_price() const;
};

/// Counts of the population mix: GS + G + S active users, remainder passive.
struct PopulationMix {
    int active = 0;
    int gen_store = 0;
    int gen_only = 0;
    int store_only = 0;
    int passive = 0;
};
PopulationMix population_mix(int user_count);

/// Built-in normalized daily demand curve (sums to one), resampled to `slots`.
std::vector<double> default_demand_template(int slots);

/// Closed-form night coefficient so that the no-DSM average price matches the
/// target: K_h = K_night * ratio(h), night slots are 1..|H|/3.
Vec calibrate_prices(const std::vector<Vec>& demands, double day_night_ratio,
                     double target_avg_price);

Scenario build_scenario(const ScenarioSpec& spec);

void save_scenario(const Scenario& s, std::ostream& out);
void save_scenario(const Scenario& s, const std::string& path);
Scenario load_scenario(std::istream& in);
Scenario load_scenario(const std::string& path);

}  // namespace dsm
