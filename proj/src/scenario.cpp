#include "dsm/scenario.hpp"

#include "dsm/core_model.hpp"
#include "dsm/rng.hpp"

#include <nlohmann/json.hpp>

#include <cmath>
#include <fstream>
#include <random>

namespace dsm {

using nlohmann::json;

int Scenario::active_count() const {
    int n = 0;
    for (const auto& u : users)
        if (u.is_active()) ++n;
    return n;
}

std::vector<LoadProfile> Scenario::base_loads() const {
    std::vector<LoadProfile> loads;
    loads.reserve(users.size());
    for (const auto& u : users) loads.emplace_back(u.user_id, u.base_demand);
    return loads;
}

Vec Scenario::base_demand_total() const {
    Vec total = Vec::Zero(grid.slot_count);
    for (const auto& u : users) total += u.base_demand;
    return total;
}

double Scenario::no_dsm_average_price() const {
    const Vec total = base_demand_total();
    double cost = 0.0;
    for (int h = 0; h < grid.slot_count; ++h) cost += grid_cost(params.k[h], total[h], 0.0);
    return cost / total.sum();
}

PopulationMix population_mix(int user_count) {
    PopulationMix mix;
    mix.active = user_count / 2;
    mix.gen_only = mix.active / 3;
    mix.store_only = mix.active / 3;
    mix.gen_store = mix.active - 2 * (mix.active / 3);
    mix.passive = user_count - mix.active;
    return mix;
}

std::vector<double> default_demand_template(int slots) {
    // Hourly residential shape: overnight trough, morning shoulder, midday
    // plateau and a 19:00-22:00 peak near three times the trough.
    static const double hourly[24] = {0.55, 0.50, 0.48, 0.47, 0.50, 0.62,  //
                                      0.85, 1.00, 1.05, 1.00, 0.98, 1.00,  //
                                      1.02, 1.00, 0.97, 0.98, 1.10, 1.25,  //
                                      1.45, 1.50, 1.48, 1.30, 0.95, 0.70};
    std::vector<double> curve(slots);
    double sum = 0.0;
    for (int h = 0; h < slots; ++h) {
        const double pos = 24.0 * h / slots;
        const int lo = static_cast<int>(pos) % 24;
        const int hi = (lo + 1) % 24;
        const double frac = pos - std::floor(pos);
        curve[h] = (1.0 - frac) * hourly[lo] + frac * hourly[hi];
        sum += curve[h];
    }
    for (double& c : curve) c /= sum;
    return curve;
}

Vec calibrate_prices(const std::vector<Vec>& demands, double day_night_ratio,
                     double target_avg_price) {
    if (demands.empty()) throw EmptyUserSet();
    if (!(target_avg_price > 0.0)) throw ModelError("calibrate_prices: target must be > 0");
    const int H = static_cast<int>(demands.front().size());
    Vec total = Vec::Zero(H);
    for (const auto& d : demands) {
        if (d.size() != H) throw DimensionMismatch("calibrate_prices");
        total += d;
    }
    const double energy = total.sum();
    if (!(energy > 0.0)) throw ModelError("calibrate_prices: zero total demand");

    const int night_end = H / 3;  // slots 1..|H|/3 are night
    double weighted = 0.0;
    for (int h = 0; h < H; ++h) {
        const double ratio = h < night_end ? 1.0 : day_night_ratio;
        weighted += ratio * total[h] * total[h];
    }
    const double k_night = target_avg_price * energy / weighted;
    Vec k(H);
    for (int h = 0; h < H; ++h) k[h] = k_night * (h < night_end ? 1.0 : day_night_ratio);
    return k;
}

Scenario build_scenario(const ScenarioSpec& spec) {
    if (spec.user_count < 2) throw ModelError("build_scenario: need at least two users");
    if (spec.slot_count < 1) throw ModelError("build_scenario: need at least one slot");
    const int H = spec.slot_count;

    std::vector<double> curve =
        spec.demand_template.empty() ? default_demand_template(H) : spec.demand_template;
    if (static_cast<int>(curve.size()) != H)
        throw ModelError("build_scenario: demand template length mismatch");

    std::mt19937_64 rng(spec.rng_seed);
    const PopulationMix mix = population_mix(spec.user_count);

    Scenario s;
    s.grid = TimeGrid(H);
    s.spec = spec;
    s.users.reserve(spec.user_count);

    const double cap = 4.0;  // storage capacity, kWh
    const double daily_gen =
        spec.literal_daily_gen_cap ? 0.8 * 0.4 : 0.8 * 0.4 * static_cast<double>(H);
    for (int n = 0; n < spec.user_count; ++n) {
        UserModel u;
        u.user_id = n;
        if (n < mix.gen_store)
            u.kind = UserKind::GenStore;
        else if (n < mix.gen_store + mix.gen_only)
            u.kind = UserKind::GenOnly;
        else if (n < mix.active)
            u.kind = UserKind::StoreOnly;
        else
            u.kind = UserKind::Passive;

        u.base_demand = Vec(H);
        for (int h = 0; h < H; ++h) {
            const double noise = spec.demand_noise_std * sample_standard_normal(rng);
            u.base_demand[h] = std::max(0.0, spec.mean_daily_demand * curve[h] + noise);
        }

        if (u.kind == UserKind::GenOnly || u.kind == UserKind::GenStore) {
            u.gen_cap_hour = 0.4;
            u.gen_cap_day = daily_gen;
        }
        if (u.kind == UserKind::StoreOnly || u.kind == UserKind::GenStore) {
            u.storage_capacity = cap;
            u.charge_rate_max = 0.125 * cap;
            u.leak_rate = std::pow(0.9, 1.0 / H);  // 10% loss over the day
            u.charge_eff = 0.9;
            u.discharge_eff = 1.1;
            u.initial_charge = 0.25 * cap;
            u.end_of_day_delta = 0.0;
        }
        u.validate();
        s.users.push_back(std::move(u));
    }

    std::vector<Vec> demands;
    demands.reserve(s.users.size());
    for (const auto& u : s.users) demands.push_back(u.base_demand);
    Vec k = calibrate_prices(demands, spec.day_night_ratio, spec.target_avg_price);

    Vec total = Vec::Zero(H);
    for (const auto& d : demands) total += d;
    for (int h = 0; h < H; ++h) {
        if (!(total[h] > 0.0)) throw NonPositiveAggregateLoad(h + 1);
    }
    Vec alpha = spec.alpha_fraction * total;
    s.params = GridCostParams(std::move(k), std::move(alpha), spec.beta_m);
    return s;
}

namespace {

json vec_to_json(const Vec& v) {
    return json(std::vector<double>(v.data(), v.data() + v.size()));
}

Vec vec_from_json(const json& j) {
    const auto values = j.get<std::vector<double>>();
    return Eigen::Map<const Vec>(values.data(), static_cast<Eigen::Index>(values.size()));
}

}  // namespace

void save_scenario(const Scenario& s, std::ostream& out) {
    json j;
    j["grid"] = {{"slot_count", s.grid.slot_count},
                 {"k", vec_to_json(s.params.k)},
                 {"alpha", vec_to_json(s.params.alpha)},
                 {"beta_m", s.params.beta_m}};
    json users = json::array();
    for (const auto& u : s.users) {
        users.push_back({{"user_id", u.user_id},
                         {"kind", to_string(u.kind)},
                         {"base_demand", vec_to_json(u.base_demand)},
                         {"gen_cap_hour", u.gen_cap_hour},
                         {"gen_cap_day", u.gen_cap_day},
                         {"storage_capacity", u.storage_capacity},
                         {"charge_rate_max", u.charge_rate_max},
                         {"leak_rate", u.leak_rate},
                         {"charge_eff", u.charge_eff},
                         {"discharge_eff", u.discharge_eff},
                         {"initial_charge", u.initial_charge},
                         {"end_of_day_delta", u.end_of_day_delta}});
    }
    j["users"] = std::move(users);
    j["meta"] = {{"seed", s.spec.rng_seed},
                 {"spec",
                  {{"user_count", s.spec.user_count},
                   {"slot_count", s.spec.slot_count},
                   {"mean_daily_demand", s.spec.mean_daily_demand},
                   {"demand_noise_std", s.spec.demand_noise_std},
                   {"target_avg_price", s.spec.target_avg_price},
                   {"day_night_ratio", s.spec.day_night_ratio},
                   {"alpha_fraction", s.spec.alpha_fraction},
                   {"beta_m", s.spec.beta_m},
                   {"rng_seed", s.spec.rng_seed},
                   {"literal_daily_gen_cap", s.spec.literal_daily_gen_cap}}}};
    out << j.dump(2) << "\n";
}

void save_scenario(const Scenario& s, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw ModelError("cannot write scenario file: " + path);
    save_scenario(s, out);
}

Scenario load_scenario(std::istream& in) {
    json j;
    in >> j;
    Scenario s;
    const auto& grid = j.at("grid");
    s.grid = TimeGrid(grid.at("slot_count").get<int>());
    s.params = GridCostParams(vec_from_json(grid.at("k")), vec_from_json(grid.at("alpha")),
                              grid.at("beta_m").get<double>());
    for (const auto& uj : j.at("users")) {
        UserModel u;
        u.user_id = uj.at("user_id").get<int>();
        u.kind = user_kind_from_string(uj.at("kind").get<std::string>());
        u.base_demand = vec_from_json(uj.at("base_demand"));
        u.gen_cap_hour = uj.at("gen_cap_hour").get<double>();
        u.gen_cap_day = uj.at("gen_cap_day").get<double>();
        u.storage_capacity = uj.at("storage_capacity").get<double>();
        u.charge_rate_max = uj.at("charge_rate_max").get<double>();
        u.leak_rate = uj.at("leak_rate").get<double>();
        u.charge_eff = uj.at("charge_eff").get<double>();
        u.discharge_eff = uj.at("discharge_eff").get<double>();
        u.initial_charge = uj.at("initial_charge").get<double>();
        u.end_of_day_delta = uj.at("end_of_day_delta").get<double>();
        u.validate();
        s.users.push_back(std::move(u));
    }
    if (j.contains("meta") && j["meta"].contains("spec")) {
        const auto& sp = j["meta"]["spec"];
        s.spec.user_count = sp.value("user_count", static_cast<int>(s.users.size()));
        s.spec.slot_count = sp.value("slot_count", s.grid.slot_count);
        s.spec.mean_daily_demand = sp.value("mean_daily_demand", 4.5);
        s.spec.demand_noise_std = sp.value("demand_noise_std", 0.01875);
        s.spec.target_avg_price = sp.value("target_avg_price", 0.1412);
        s.spec.day_night_ratio = sp.value("day_night_ratio", 1.5);
        s.spec.alpha_fraction = sp.value("alpha_fraction", 0.10);
        s.spec.beta_m = sp.value("beta_m", s.params.beta_m);
        s.spec.rng_seed = sp.value("rng_seed", std::uint64_t{0});
        s.spec.literal_daily_gen_cap = sp.value("literal_daily_gen_cap", false);
    }
    return s;
}

Scenario load_scenario(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ModelError("cannot read scenario file: " + path);
    return load_scenario(in);
}

}  // namespace dsm
