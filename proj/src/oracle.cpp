#include "dsm/oracle.hpp"

#include "dsm/best_response.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>

namespace dsm {
namespace oracle {

AngularSearchResult angular_grid_search(const SlotErrorProblem& prob, double resolution_rad) {
    if (prob.users() != 2) throw ModelError("angular_grid_search handles |D| == 2 only");
    const double r = std::sqrt(prob.alpha);
    AngularSearchResult best;
    best.residual = std::numeric_limits<double>::infinity();
    const int steps = static_cast<int>(std::ceil(0.5 * M_PI / resolution_rad));
    for (int i = 0; i <= steps; ++i) {
        const double theta = 0.5 * M_PI * i / steps;
        Vec d(2);
        d << r * std::cos(theta), r * std::sin(theta);
        const double res = stationarity_residual(d, prob);
        if (res < best.residual) {
            best.residual = res;
            best.theta = theta;
            best.delta = d;
        }
    }
    return best;
}

GridSearchResult best_response_grid_search(const UserModel& m, const Vec& others_load_sum,
                                           const Vec& error_sum, const Vec& own_error,
                                           const Vec& centroid, double tau,
                                           const GridCostParams& params, double resolution) {
    if (m.slots() != 2 || !m.has_generation() || m.has_storage())
        throw ModelError("best_response_grid_search handles 2-slot generation-only users");
    const int steps = static_cast<int>(std::round(m.gen_cap_hour / resolution));
    GridSearchResult best;
    best.objective = std::numeric_limits<double>::infinity();
    for (int i = 0; i <= steps; ++i) {
        const double g1 = m.gen_cap_hour * i / steps;
        for (int j = 0; j <= steps; ++j) {
            const double g2 = m.gen_cap_hour * j / steps;
            if (g1 + g2 > m.gen_cap_day + 1e-12) break;
            Vec load(2);
            load << m.base_demand[0] - g1, m.base_demand[1] - g2;
            const double f = best_response_objective(load, others_load_sum, error_sum, own_error,
                                                     centroid, tau, params);
            if (f < best.objective) {
                best.objective = f;
                best.g = Vec(2);
                best.g << g1, g2;
            }
        }
    }
    return best;
}

SpectrumDiscrepancy monotonicity_spectrum_check(const Scenario& scenario,
                                                const EquilibriumResult& at) {
    const int H = scenario.grid.slot_count;
    const int D = scenario.user_count();
    const MonotonicityReport rep = monotonicity_diagnostics(scenario, at);

    SpectrumDiscrepancy disc;
    const Eigen::MatrixXd ones = Eigen::MatrixXd::Ones(D, D);
    const Eigen::MatrixXd eye = Eigen::MatrixXd::Identity(D, D);

    double dense_day_ahead_min = std::numeric_limits<double>::infinity();
    for (int h = 0; h < H; ++h) {
        const double k = scenario.params.k[h];
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> day(k * (eye + ones),
                                                           Eigen::EigenvaluesOnly);
        dense_day_ahead_min = std::min(dense_day_ahead_min, day.eigenvalues().minCoeff());

        const double base = k + 2.0 * scenario.params.beta_m - 2.0 * at.lambdas[h];
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> inner(base * eye + k * ones,
                                                             Eigen::EigenvaluesOnly);
        disc.inner = std::max(
            disc.inner,
            std::abs(inner.eigenvalues().minCoeff() - rep.inner_min_eigenvalue[h]));
        disc.inner = std::max(
            disc.inner,
            std::abs(inner.eigenvalues().maxCoeff() - rep.inner_max_eigenvalue[h]));
    }
    disc.day_ahead = std::abs(dense_day_ahead_min - rep.day_ahead_min_eigenvalue);
    return disc;
}

}  // namespace oracle
}  // namespace dsm
