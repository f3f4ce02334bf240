#include "dsm/qp.hpp"

#include <algorithm>
#include <cmath>

namespace dsm {

namespace {

constexpr double kActiveTol = 1e-9;
constexpr double kStepTol = 1e-12;
constexpr double kMultiplierTol = 1e-10;
constexpr double kIndependenceTol = 1e-8;

// Rows of the working set stacked as a dense matrix. Equalities always stay in.
struct WorkingSet {
    const Polytope& poly;
    std::vector<int> ineq;  // active inequality row indices

    explicit WorkingSet(const Polytope& p) : poly(p) {}

    int rows() const { return poly.eq_count() + static_cast<int>(ineq.size()); }

    Eigen::MatrixXd matrix() const {
        Eigen::MatrixXd n(rows(), poly.dim);
        int r = 0;
        for (int i = 0; i < poly.eq_count(); ++i) n.row(r++) = poly.eq_a.row(i);
        for (int j : ineq) n.row(r++) = poly.ineq_a.row(j);
        return n;
    }

    Vec rhs() const {
        Vec c(rows());
        int r = 0;
        for (int i = 0; i < poly.eq_count(); ++i) c[r++] = poly.eq_b[i];
        for (int j : ineq) c[r++] = poly.ineq_b[j];
        return c;
    }
};

}  // namespace

double Polytope::violation(const Vec& x) const {
    double v = 0.0;
    if (ineq_count() > 0) v = (ineq_a * x - ineq_b).maxCoeff();
    if (eq_count() > 0) v = std::max(v, (eq_a * x - eq_b).cwiseAbs().maxCoeff());
    return std::max(v, 0.0);
}

Vec project_onto_polytope(const Polytope& poly, const Vec& target, const Vec& feasible_start,
                          ProjectionWorkspace* ws) {
    if (target.size() != poly.dim || feasible_start.size() != poly.dim)
        throw DimensionMismatch("project_onto_polytope");
    if (poly.ineq_count() == 0 && poly.eq_count() == 0) return target;

    Vec y = feasible_start;
    WorkingSet w(poly);

    // Seed the working set with independent rows active at the start point.
    // Warm-set hints are only honored while they are actually active.
    std::vector<int> candidates;
    if (ws) {
        for (int j : ws->working_set) {
            if (j >= 0 && j < poly.ineq_count()) candidates.push_back(j);
        }
    }
    for (int j = 0; j < poly.ineq_count(); ++j) candidates.push_back(j);

    Eigen::MatrixXd n;      // working-set rows
    Eigen::LDLT<Eigen::MatrixXd> gram;  // factorization of n * n'
    auto refactor = [&]() {
        n = w.matrix();
        if (n.rows() > 0) gram.compute(n * n.transpose());
    };
    auto independent = [&](const Vec& row) {
        if (w.rows() == 0) return row.norm() > kIndependenceTol;
        const Vec theta = gram.solve(n * row);
        return (row - n.transpose() * theta).norm() > kIndependenceTol * (1.0 + row.norm());
    };

    refactor();
    for (int j : candidates) {
        if (std::find(w.ineq.begin(), w.ineq.end(), j) != w.ineq.end()) continue;
        const double slack = poly.ineq_b[j] - poly.ineq_a.row(j).dot(y);
        if (std::abs(slack) <= kActiveTol * (1.0 + poly.ineq_a.row(j).norm())) {
            if (independent(poly.ineq_a.row(j).transpose())) {
                w.ineq.push_back(j);
                refactor();
            }
        }
    }

    const int max_iter = 100 + 10 * (poly.ineq_count() + poly.eq_count());
    for (int iter = 0; iter < max_iter; ++iter) {
        // Equality-constrained projection for the current working set.
        Vec v;
        Vec nu;  // multipliers in working-set row order
        if (w.rows() == 0) {
            v = target;
        } else {
            nu = gram.solve(n * target - w.rhs());
            v = target - n.transpose() * nu;
        }

        const Vec p = v - y;
        if (p.norm() <= kStepTol) {
            // At the subproblem optimum; check inequality multipliers.
            int drop = -1;
            double most_negative = -kMultiplierTol;
            for (std::size_t k = 0; k < w.ineq.size(); ++k) {
                const double mult = nu.size() > 0 ? nu[poly.eq_count() + static_cast<int>(k)] : 0.0;
                if (mult < most_negative) {
                    most_negative = mult;
                    drop = static_cast<int>(k);
                }
            }
            if (drop < 0) {
                if (ws) ws->working_set = w.ineq;
                return y;
            }
            w.ineq.erase(w.ineq.begin() + drop);
            refactor();
            continue;
        }

        // Longest step along p that keeps every inactive inequality satisfied.
        double alpha = 1.0;
        int blocking = -1;
        for (int j = 0; j < poly.ineq_count(); ++j) {
            if (std::find(w.ineq.begin(), w.ineq.end(), j) != w.ineq.end()) continue;
            const double d = poly.ineq_a.row(j).dot(p);
            if (d > kStepTol) {
                const double slack = poly.ineq_b[j] - poly.ineq_a.row(j).dot(y);
                const double a_j = slack / d;
                if (a_j < alpha) {
                    alpha = a_j;
                    blocking = j;
                }
            }
        }
        y += std::max(alpha, 0.0) * p;
        if (blocking >= 0) {
            w.ineq.push_back(blocking);
            refactor();
        }
    }
    throw MaxIterationsExceeded("active-set projection", poly.violation(y));
}

}  // namespace dsm
