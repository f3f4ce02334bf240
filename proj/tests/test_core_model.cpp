#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "dsm/core_model.hpp"

#include <random>

using namespace dsm;

namespace {

Vec make_vec(std::initializer_list<double> v) {
    Vec x(static_cast<Eigen::Index>(v.size()));
    int i = 0;
    for (double e : v) x[i++] = e;
    return x;
}

}  // namespace

TEST_CASE("aggregate_load sums per slot in user order") {
    std::vector<LoadProfile> two = {{0, make_vec({3.0})}, {1, make_vec({4.0})}};
    CHECK(aggregate_load(two).total_load[0] == doctest::Approx(7.0));

    std::vector<LoadProfile> one = {{0, make_vec({5.0, 5.0})}};
    const auto agg = aggregate_load(one);
    CHECK(agg.total_load[0] == 5.0);
    CHECK(agg.total_load[1] == 5.0);
}

TEST_CASE("aggregate_load rejects empty sets and non-positive totals") {
    CHECK_THROWS_AS(aggregate_load({}), EmptyUserSet);
    std::vector<LoadProfile> cancel = {{0, make_vec({1.0})}, {1, make_vec({-1.0})}};
    try {
        aggregate_load(cancel);
        FAIL("expected NonPositiveAggregateLoad");
    } catch (const NonPositiveAggregateLoad& e) {
        CHECK(e.slot == 1);
    }
}

TEST_CASE("aggregate_load is permutation invariant up to reassociation") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> uni(0.1, 2.0);
    const int D = 12, H = 6;
    std::vector<LoadProfile> loads;
    for (int n = 0; n < D; ++n) {
        Vec l(H);
        for (int h = 0; h < H; ++h) l[h] = uni(rng);
        loads.emplace_back(n, l);
    }
    auto shuffled = loads;
    std::shuffle(shuffled.begin(), shuffled.end(), rng);
    const Vec a = aggregate_load(loads).total_load;
    const Vec b = aggregate_load(shuffled).total_load;
    CHECK((a - b).norm() <= 1e-12 * a.norm());
}

TEST_CASE("grid_cost quadratic form") {
    CHECK(grid_cost(0.1, 10.0, 0.0) == doctest::Approx(10.0));
    CHECK(grid_cost(1.0, 2.0, 1.0) == doctest::Approx(9.0));
    // Day coefficient 1.5x the night one scales the cost by exactly 1.5.
    const double night = grid_cost(0.02, 7.0, 0.3);
    const double day = grid_cost(0.03, 7.0, 0.3);
    CHECK(day == doctest::Approx(1.5 * night));
}

TEST_CASE("grid_cost is convex in the aggregate load") {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> uni(0.5, 20.0);
    for (int trial = 0; trial < 200; ++trial) {
        const double l1 = uni(rng), l2 = uni(rng), k = uni(rng) * 0.01;
        const double mid = grid_cost(k, 0.5 * (l1 + l2), 0.0);
        const double avg = 0.5 * (grid_cost(k, l1, 0.0) + grid_cost(k, l2, 0.0));
        CHECK(mid <= avg + 1e-12);
    }
}

TEST_CASE("user_day_ahead_cost direct arithmetic") {
    GridCostParams params(make_vec({1.0}), make_vec({1.0}), 0.0);
    std::vector<LoadProfile> loads = {{0, make_vec({1.0})}, {1, make_vec({1.0})}};
    std::vector<ErrorProfile> zero = {{0, make_vec({0.0})}, {1, make_vec({0.0})}};
    CHECK(user_day_ahead_cost(0, loads, zero, params) == doctest::Approx(2.0));

    GridCostParams params_b(make_vec({1.0}), make_vec({1.0}), 0.001);
    std::vector<ErrorProfile> skew = {{0, make_vec({0.1})}, {1, make_vec({-0.1})}};
    CHECK(user_day_ahead_cost(0, loads, skew, params_b) == doctest::Approx(2.20001));
}

TEST_CASE("proportional split: user costs sum to the grid cost when beta_m = 0") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> uni(0.2, 3.0);
    std::uniform_real_distribution<double> err(-0.1, 0.1);
    for (int trial = 0; trial < 50; ++trial) {
        const int D = 2 + static_cast<int>(rng() % 6);
        const int H = 1 + static_cast<int>(rng() % 5);
        Vec k(H), alpha(H);
        for (int h = 0; h < H; ++h) {
            k[h] = uni(rng) * 0.05;
            alpha[h] = 1.0;
        }
        GridCostParams params(k, alpha, 0.0);
        std::vector<LoadProfile> loads;
        std::vector<ErrorProfile> errors;
        for (int n = 0; n < D; ++n) {
            Vec l(H), d(H);
            for (int h = 0; h < H; ++h) {
                l[h] = uni(rng);
                d[h] = err(rng);
            }
            loads.emplace_back(n, l);
            errors.emplace_back(n, d);
        }
        double users_total = 0.0;
        for (int n = 0; n < D; ++n) users_total += user_day_ahead_cost(n, loads, errors, params);
        const auto agg = aggregate_load(loads, &errors);
        double grid_total = 0.0;
        for (int h = 0; h < H; ++h)
            grid_total += grid_cost(params.k[h], agg.total_load[h], agg.total_error[h]);
        CHECK(users_total == doctest::Approx(grid_total).epsilon(1e-12));
    }
}

TEST_CASE("user cost second difference along own load equals 2 K_h") {
    GridCostParams params(make_vec({0.7, 1.3}), make_vec({1.0, 1.0}), 0.0);
    std::vector<LoadProfile> loads = {{0, make_vec({1.0, 2.0})}, {1, make_vec({2.0, 1.0})}};
    std::vector<ErrorProfile> errors = {{0, make_vec({0.05, -0.02})}, {1, make_vec({0.01, 0.03})}};
    const double eps = 1e-4;
    for (int h = 0; h < 2; ++h) {
        auto perturbed = [&](double step) {
            auto l2 = loads;
            l2[0].l[h] += step;
            return user_day_ahead_cost(0, l2, errors, params);
        };
        const double second = (perturbed(eps) - 2.0 * perturbed(0.0) + perturbed(-eps)) / (eps * eps);
        CHECK(second == doctest::Approx(2.0 * params.k[h]).epsilon(1e-4));
    }
}

TEST_CASE("GridCostParams validation") {
    CHECK_THROWS_AS(GridCostParams(make_vec({0.0}), make_vec({1.0}), 0.0), ModelError);
    CHECK_THROWS_AS(GridCostParams(make_vec({1.0}), make_vec({0.0}), 0.0), ModelError);
    CHECK_THROWS_AS(GridCostParams(make_vec({1.0}), make_vec({1.0}), -0.1), ModelError);
}
