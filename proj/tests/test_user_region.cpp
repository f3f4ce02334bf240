#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "dsm/best_response.hpp"
#include "dsm/oracle.hpp"
#include "dsm/user_model.hpp"
#include "reference_impl.hpp"

#include <cmath>
#include <random>

using namespace dsm;

namespace {

UserModel storage_user(int slots = 24) {
    UserModel u;
    u.user_id = 0;
    u.kind = UserKind::StoreOnly;
    u.base_demand = Vec::Constant(slots, 0.2);
    u.storage_capacity = 4.0;
    u.charge_rate_max = 0.5;
    u.leak_rate = std::pow(0.9, 1.0 / slots);
    u.charge_eff = 0.9;
    u.discharge_eff = 1.1;
    u.initial_charge = 1.0;
    u.end_of_day_delta = 0.0;
    u.validate();
    return u;
}

UserModel gen_user(int slots, double g_max, double gamma_max, const Vec& demand) {
    UserModel u;
    u.user_id = 0;
    u.kind = UserKind::GenOnly;
    u.base_demand = demand;
    u.gen_cap_hour = g_max;
    u.gen_cap_day = gamma_max;
    u.validate();
    return u;
}

}  // namespace

TEST_CASE("zero schedule feasibility depends on the terminal-charge target") {
    const int H = 24;
    UserModel u = storage_user(H);

    // eps chosen so pure leakage lands exactly on the required terminal state.
    u.end_of_day_delta = u.initial_charge * (std::pow(u.leak_rate, H) - 1.0);
    CHECK(feasible_region_check(u, DeviceSchedule::zero(H)).feasible);

    u.end_of_day_delta = 0.0;  // now leakage alone misses q0
    const auto rep = feasible_region_check(u, DeviceSchedule::zero(H));
    CHECK_FALSE(rep.feasible);
    REQUIRE_FALSE(rep.violations.empty());
    CHECK(rep.violations.front().constraint == "terminal_charge");
}

TEST_CASE("daily generation budget violation is reported by name") {
    const int H = 24;
    const double g_max = 0.4;
    UserModel u = gen_user(H, g_max, 0.8 * g_max * H, Vec::Constant(H, 0.2));
    DeviceSchedule d = DeviceSchedule::zero(H);
    d.g.setConstant(g_max);  // sums to H*g_max > 0.8*H*g_max
    const auto rep = feasible_region_check(u, d);
    CHECK_FALSE(rep.feasible);
    bool found = false;
    for (const auto& v : rep.violations) found = found || v.constraint == "gen_cap_day";
    CHECK(found);
}

TEST_CASE("random schedules agree with the independent constraint checker") {
    std::mt19937_64 rng(99);
    std::uniform_real_distribution<double> uni(-0.2, 0.7);
    const int H = 8;
    UserModel u = storage_user(H);
    u.kind = UserKind::GenStore;
    u.gen_cap_hour = 0.4;
    u.gen_cap_day = 0.8 * 0.4 * H;

    int feasible_seen = 0;
    for (int trial = 0; trial < 2000; ++trial) {
        DeviceSchedule d = DeviceSchedule::zero(H);
        for (int h = 0; h < H; ++h) {
            d.g[h] = uni(rng);
            d.s_plus[h] = uni(rng);
            d.s_minus[h] = uni(rng);
        }
        if (trial % 5 == 0) d = find_feasible_schedule(u);  // include feasible draws
        const bool lib = feasible_region_check(u, d).feasible;
        const bool ref = refimpl::schedule_feasible(u, d);
        CHECK(lib == ref);
        feasible_seen += lib ? 1 : 0;
    }
    CHECK(feasible_seen > 0);
}

TEST_CASE("find_feasible_schedule satisfies every constraint") {
    for (int H : {6, 24}) {
        UserModel u = storage_user(H);
        const auto d = find_feasible_schedule(u);
        CHECK(feasible_region_check(u, d).feasible);
        CHECK(refimpl::schedule_feasible(u, d));
    }
    // Terminal target beyond what the charge rate allows in a single day.
    UserModel hard = storage_user(2);
    hard.end_of_day_delta = 2.9;
    CHECK_THROWS_AS(find_feasible_schedule(hard), InfeasibleUserModel);
}

TEST_CASE("passive best response returns the base demand") {
    UserModel u;
    u.user_id = 3;
    u.kind = UserKind::Passive;
    u.base_demand = Vec::Constant(4, 0.3);
    GridCostParams params(Vec::Constant(4, 0.05), Vec::Constant(4, 1.0), 0.0);
    const auto r = best_response(u, Vec::Constant(4, 2.0), Vec::Zero(4), Vec::Zero(4),
                                 u.base_demand, 1.0, params);
    CHECK((r.load.l - u.base_demand).norm() == 0.0);
}

TEST_CASE("huge proximal weight pins the response to the centroid") {
    const int H = 6;
    UserModel u = storage_user(H);
    GridCostParams params(Vec::Constant(H, 0.05), Vec::Constant(H, 1.0), 0.0);
    const Vec centroid = find_feasible_schedule(u).implied_load(u);
    const auto r = best_response(u, Vec::Constant(H, 2.0), Vec::Zero(H), Vec::Zero(H), centroid,
                                 1e6, params);
    CHECK((r.load.l - centroid).norm() <= 1e-3);
}

TEST_CASE("two-slot generation best response matches the grid-search oracle") {
    const int H = 2;
    UserModel u = gen_user(H, 1.0, 1.0, Vec::Constant(H, 2.0));
    GridCostParams params(Vec::Constant(H, 1.0), Vec::Constant(H, 1.0), 0.0);
    const Vec others = Vec::Constant(H, 2.0);
    const Vec zero = Vec::Zero(H);
    const Vec centroid = u.base_demand;
    const double tau = 0.01;

    const auto solver = best_response(u, others, zero, zero, centroid, tau, params);
    const auto brute =
        oracle::best_response_grid_search(u, others, zero, zero, centroid, tau, params, 1e-3);
    CHECK(solver.objective <= brute.objective + 1e-2);
    CHECK(std::abs(solver.objective - brute.objective) <= 1e-2);
    CHECK(solver.kkt_residual <= 1e-8);
}

TEST_CASE("best response beats random feasible probes") {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    const int H = 6;
    UserModel u = storage_user(H);
    u.kind = UserKind::GenStore;
    u.gen_cap_hour = 0.4;
    u.gen_cap_day = 0.8 * 0.4 * H;

    GridCostParams params(Vec::Constant(H, 0.04), Vec::Constant(H, 1.0), 0.001);
    Vec others(H), dsum(H), own(H);
    for (int h = 0; h < H; ++h) {
        others[h] = 2.0 + uni(rng);
        dsum[h] = 0.2 * uni(rng);
        own[h] = 0.05 * uni(rng);
    }
    const Vec centroid = find_feasible_schedule(u).implied_load(u);
    const auto r = best_response(u, others, dsum, own, centroid, 0.5, params);
    CHECK(feasible_region_check(u, r.schedule, 1e-6).feasible);

    const DeviceLayout lay(u);
    const Polytope poly = build_device_polytope(u);
    const Vec start = lay.from_schedule(find_feasible_schedule(u));
    for (int probe = 0; probe < 100; ++probe) {
        Vec x(lay.dim());
        for (int j = 0; j < lay.dim(); ++j) x[j] = uni(rng);
        const Vec y = project_onto_polytope(poly, x, start);
        REQUIRE(refimpl::schedule_feasible(u, lay.to_schedule(y), 1e-6));
        const double f = best_response_objective(lay.implied_load(u, y), others, dsum, own,
                                                 centroid, 0.5, params);
        CHECK(r.objective <= f + 1e-9);
    }
}

TEST_CASE("solution is unique across distinct starting points") {
    const int H = 6;
    UserModel u = storage_user(H);
    GridCostParams params(Vec::Constant(H, 0.04), Vec::Constant(H, 1.0), 0.0);
    const Vec others = Vec::Constant(H, 2.5);
    const Vec zero = Vec::Zero(H);
    const Vec centroid = find_feasible_schedule(u).implied_load(u);

    const DeviceLayout lay(u);
    const Polytope poly = build_device_polytope(u);
    const Vec start = lay.from_schedule(find_feasible_schedule(u));

    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> uni(0.0, 0.4);
    Vec probe(lay.dim());
    for (int j = 0; j < lay.dim(); ++j) probe[j] = uni(rng);
    const Vec other_start = project_onto_polytope(poly, probe, start);

    const auto a = best_response(u, others, zero, zero, centroid, 0.7, params, &start);
    const auto b = best_response(u, others, zero, zero, centroid, 0.7, params, &other_start);
    CHECK((a.load.l - b.load.l).norm() <= 1e-6);
}
