// Basic domain types shared across the library: time grid, grid cost
// parameters and per-user load/error profiles.
#pragma once

#include <Eigen/Core>
#include <stdexcept>
#include <string>
#include <vector>

namespace dsm {

using Vec = Eigen::VectorXd;

/// Error raised when input data violates a model precondition.
class ModelError : public std::runtime_error {
public:
    explicit ModelError(const std::string& what) : std::runtime_error(what) {}
};

class EmptyUserSet : public ModelError {
public:
    EmptyUserSet() : ModelError("aggregate_load: empty user set") {}
};

/// Aggregate load must be strictly positive at every slot.
class NonPositiveAggregateLoad : public ModelError {
public:
    explicit NonPositiveAggregateLoad(int slot_1based)
        : ModelError("aggregate load non-positive at slot " + std::to_string(slot_1based)),
          slot(slot_1based) {}
    int slot;
};

class DimensionMismatch : public ModelError {
public:
    explicit DimensionMismatch(const std::string& where)
        : ModelError("dimension mismatch in " + where) {}
};

/// Raised by iterative solvers that hit their iteration cap.
class MaxIterationsExceeded : public std::runtime_error {
public:
    MaxIterationsExceeded(const std::string& where, double last_residual)
        : std::runtime_error(where + ": iteration limit reached (residual " +
                             std::to_string(last_residual) + ")"),
          residual(last_residual) {}
    double residual;
};

/// One day subdivided in slots 1..|H|.
struct TimeGrid {
    int slot_count = 24;

    explicit TimeGrid(int slots = 24) : slot_count(slots) {
        if (slot_count < 1) throw ModelError("TimeGrid: slot_count must be >= 1");
    }
};

/// Per-slot cost coefficients K_h (> 0), error budgets alpha(h) (> 0, squared
/// kWh) and the local-deviation penalty weight beta_m (>= 0).
struct GridCostParams {
    Vec k;
    Vec alpha;
    double beta_m = 0.0;

    GridCostParams() = default;
    GridCostParams(Vec k_, Vec alpha_, double beta)
        : k(std::move(k_)), alpha(std::move(alpha_)), beta_m(beta) {
        validate();
    }

    int slots() const { return static_cast<int>(k.size()); }

    void validate() const {
        if (k.size() != alpha.size()) throw DimensionMismatch("GridCostParams");
        for (int h = 0; h < k.size(); ++h) {
            if (!(k[h] > 0.0)) throw ModelError("GridCostParams: k must be > 0 at slot " + std::to_string(h + 1));
            if (!(alpha[h] > 0.0)) throw ModelError("GridCostParams: alpha must be > 0 at slot " + std::to_string(h + 1));
        }
        if (beta_m < 0.0) throw ModelError("GridCostParams: beta_m must be >= 0");
    }
};

/// Per-slot energy drawn from (positive) or sold to (negative) the grid, kWh.
struct LoadProfile {
    int user_id = 0;
    Vec l;

    LoadProfile() = default;
    LoadProfile(int id, Vec values) : user_id(id), l(std::move(values)) {}
};

/// Per-slot deviation between announced and realized load, kWh.
struct ErrorProfile {
    int user_id = 0;
    Vec delta;

    ErrorProfile() = default;
    ErrorProfile(int id, Vec values) : user_id(id), delta(std::move(values)) {}
};

/// Slot-wise sums over all users.
struct AggregateState {
    Vec total_load;
    Vec total_error;
};

}  // namespace dsm
