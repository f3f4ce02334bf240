// Euclidean projection onto a small polytope {x : A x <= b, E x = e} via a
// primal active-set method. The projection Hessian is the identity, so every
// working-set subproblem has the closed form y = z - N' (N N')^{-1} (N z - c).
#pragma once

#include "dsm/types.hpp"

#include <Eigen/Dense>

namespace dsm {

struct Polytope {
    int dim = 0;
    Eigen::MatrixXd ineq_a;  // rows: a_i' x <= b_i
    Vec ineq_b;
    Eigen::MatrixXd eq_a;    // rows: a_i' x == b_i
    Vec eq_b;

    int ineq_count() const { return static_cast<int>(ineq_b.size()); }
    int eq_count() const { return static_cast<int>(eq_b.size()); }

    /// Max constraint violation at x (0 when feasible).
    double violation(const Vec& x) const;
};

struct ProjectionWorkspace {
    std::vector<int> working_set;  // inequality row indices carried across calls
};

/// Projects `target` onto the polytope. `feasible_start` must satisfy all
/// constraints; the active-set iteration starts from it. Throws
/// MaxIterationsExceeded if the working set cycles beyond the safety cap.
Vec project_onto_polytope(const Polytope& poly, const Vec& target, const Vec& feasible_start,
                          ProjectionWorkspace* ws = nullptr);

}  // namespace dsm
