#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "dsm/scenario.hpp"

#include <sstream>

using namespace dsm;

TEST_CASE("population identity holds for every size") {
    for (int d = 2; d <= 203; ++d) {
        const auto mix = population_mix(d);
        CHECK(mix.active == d / 2);
        CHECK(mix.gen_only == mix.active / 3);
        CHECK(mix.store_only == mix.active / 3);
        CHECK(mix.gen_store + mix.gen_only + mix.store_only == mix.active);
        CHECK(mix.active + mix.passive == d);
    }
}

TEST_CASE("zero noise makes all demand curves identical") {
    ScenarioSpec spec;
    spec.user_count = 10;
    spec.demand_noise_std = 0.0;
    const auto s = build_scenario(spec);
    for (const auto& u : s.users) CHECK((u.base_demand - s.users[0].base_demand).norm() == 0.0);
    // Daily energy matches the requested mean.
    CHECK(s.users[0].base_demand.sum() == doctest::Approx(4.5).epsilon(1e-12));
}

TEST_CASE("default spec reproduces the target average price") {
    ScenarioSpec spec;
    const auto s = build_scenario(spec);
    CHECK(s.no_dsm_average_price() == doctest::Approx(0.1412).epsilon(1e-10));
    // Day coefficients are exactly 1.5x the night ones.
    const int night_end = spec.slot_count / 3;
    for (int h = 0; h < spec.slot_count; ++h) {
        const double expect = s.params.k[0] * (h < night_end ? 1.0 : 1.5);
        CHECK(s.params.k[h] == doctest::Approx(expect).epsilon(1e-12));
    }
}

TEST_CASE("alpha is the configured share of per-slot demand") {
    ScenarioSpec spec;
    spec.user_count = 30;
    const auto s = build_scenario(spec);
    const Vec total = s.base_demand_total();
    for (int h = 0; h < spec.slot_count; ++h)
        CHECK(s.params.alpha[h] == doctest::Approx(0.10 * total[h]).epsilon(1e-12));
}

TEST_CASE("calibration closed form on a single slot") {
    std::vector<Vec> demands = {Vec::Constant(1, 10.0)};
    const Vec k = calibrate_prices(demands, 1.0, 0.1412);
    CHECK(k[0] == doctest::Approx(0.01412));
    const Vec k2 = calibrate_prices(demands, 1.0, 2.0 * 0.1412);
    CHECK(k2[0] == doctest::Approx(2.0 * k[0]));
}

TEST_CASE("device parameters follow the experiment defaults") {
    ScenarioSpec spec;
    spec.user_count = 24;
    const auto s = build_scenario(spec);
    const auto mix = population_mix(spec.user_count);
    int gen_seen = 0, store_seen = 0;
    for (const auto& u : s.users) {
        if (u.has_generation()) {
            ++gen_seen;
            CHECK(u.gen_cap_hour == 0.4);
            CHECK(u.gen_cap_day == doctest::Approx(0.8 * 0.4 * 24));
        }
        if (u.has_storage()) {
            ++store_seen;
            CHECK(u.storage_capacity == 4.0);
            CHECK(u.charge_rate_max == doctest::Approx(0.5));
            CHECK(u.charge_eff == 0.9);
            CHECK(u.discharge_eff == 1.1);
            CHECK(u.initial_charge == 1.0);
            CHECK(u.end_of_day_delta == 0.0);
            CHECK(std::pow(u.leak_rate, 24) == doctest::Approx(0.9).epsilon(1e-12));
        }
    }
    CHECK(gen_seen == mix.gen_store + mix.gen_only);
    CHECK(store_seen == mix.gen_store + mix.store_only);

    ScenarioSpec literal = spec;
    literal.literal_daily_gen_cap = true;
    const auto s2 = build_scenario(literal);
    for (const auto& u : s2.users)
        if (u.has_generation()) CHECK(u.gen_cap_day == doctest::Approx(0.8 * 0.4));
}

TEST_CASE("same seed gives a byte-identical serialized scenario") {
    ScenarioSpec spec;
    spec.rng_seed = 99;
    std::ostringstream a, b;
    save_scenario(build_scenario(spec), a);
    save_scenario(build_scenario(spec), b);
    CHECK(a.str() == b.str());

    spec.rng_seed = 100;
    std::ostringstream c;
    save_scenario(build_scenario(spec), c);
    CHECK(a.str() != c.str());
}

TEST_CASE("scenario JSON round trip") {
    ScenarioSpec spec;
    spec.user_count = 8;
    spec.rng_seed = 5;
    const auto s = build_scenario(spec);
    std::stringstream buf;
    save_scenario(s, buf);
    const auto back = load_scenario(buf);
    REQUIRE(back.users.size() == s.users.size());
    CHECK(back.grid.slot_count == s.grid.slot_count);
    CHECK((back.params.k - s.params.k).norm() == 0.0);
    CHECK((back.params.alpha - s.params.alpha).norm() == 0.0);
    for (std::size_t n = 0; n < s.users.size(); ++n) {
        CHECK(back.users[n].kind == s.users[n].kind);
        CHECK((back.users[n].base_demand - s.users[n].base_demand).norm() == 0.0);
    }
    CHECK(back.spec.rng_seed == 5);
}

TEST_CASE("demands stay nonnegative and the aggregate stays positive") {
    ScenarioSpec spec;
    spec.user_count = 50;
    spec.demand_noise_std = 0.15;  // heavy noise to exercise the clipping
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        spec.rng_seed = seed;
        const auto s = build_scenario(spec);
        for (const auto& u : s.users) CHECK(u.base_demand.minCoeff() >= 0.0);
        CHECK(s.base_demand_total().minCoeff() > 0.0);
    }
}

TEST_CASE("template resampling keeps the curve normalized") {
    for (int slots : {12, 24, 48}) {
        const auto curve = default_demand_template(slots);
        double sum = 0.0;
        for (double c : curve) sum += c;
        CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
        const double peak = *std::max_element(curve.begin(), curve.end());
        const double trough = *std::min_element(curve.begin(), curve.end());
        CHECK(peak / trough > 2.5);
        CHECK(peak / trough < 3.5);
    }
}

TEST_CASE("degenerate specs are rejected") {
    ScenarioSpec spec;
    spec.user_count = 1;
    CHECK_THROWS_AS(build_scenario(spec), ModelError);
}
