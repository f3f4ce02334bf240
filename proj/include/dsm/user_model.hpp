// Per-user demand-side model: passive base demand plus optional dispatchable
// generation and battery storage. The feasible load set is the polytope
// implied by the device limits and the linear battery dynamics
//   q(h) = a_leak * q(h-1) + charge_eff * s_plus(h) - discharge_eff * s_minus(h).
#pragma once

#include "dsm/types.hpp"

namespace dsm {

class InfeasibleUserModel : public ModelError {
public:
    explicit InfeasibleUserModel(int user_id)
        : ModelError("user " + std::to_string(user_id) + " has an empty feasible region") {}
};

enum class UserKind { Passive, GenOnly, StoreOnly, GenStore };

const char* to_string(UserKind kind);
UserKind user_kind_from_string(const std::string& s);

struct UserModel {
    int user_id = 0;
    UserKind kind = UserKind::Passive;
    Vec base_demand;               // e_n, kWh per slot, >= 0
    double gen_cap_hour = 0.0;     // g_max, kWh per slot
    double gen_cap_day = 0.0;      // gamma_max, kWh per day
    double storage_capacity = 0.0; // c_n, kWh
    double charge_rate_max = 0.0;  // s_max, kWh per slot
    double leak_rate = 1.0;        // per-slot retention factor, (0,1]
    double charge_eff = 1.0;       // (0,1]
    double discharge_eff = 1.0;    // >= 1
    double initial_charge = 0.0;   // q0, [0, c_n]
    double end_of_day_delta = 0.0; // eps_n, q(|H|) must equal q0 + eps_n

    int slots() const { return static_cast<int>(base_demand.size()); }
    bool has_generation() const {
        return (kind == UserKind::GenOnly || kind == UserKind::GenStore) && gen_cap_hour > 0.0;
    }
    bool has_storage() const {
        return (kind == UserKind::StoreOnly || kind == UserKind::GenStore) && storage_capacity > 0.0;
    }
    bool is_active() const { return has_generation() || has_storage(); }

    void validate() const;
};

/// Decision variables of one active user over the day.
struct DeviceSchedule {
    Vec g;        // generation, kWh per slot
    Vec s_plus;   // charging draw
    Vec s_minus;  // discharge

    static DeviceSchedule zero(int slots);
    Vec implied_load(const UserModel& m) const;  // e - g + s_plus - s_minus
};

struct Violation {
    std::string constraint;
    int slot;  // 1-based; 0 when not slot-specific
    double amount;
};

struct FeasibilityReport {
    bool feasible = true;
    std::vector<Violation> violations;
};

/// Battery state of charge after each slot, q(1..|H|); q(0) = initial_charge.
Vec battery_state_path(const UserModel& m, const DeviceSchedule& d);

/// Checks every device constraint within `tol`; violations name the failed
/// constraint and slot.
FeasibilityReport feasible_region_check(const UserModel& m, const DeviceSchedule& d,
                                        double tol = 1e-9);

/// A schedule satisfying every constraint (constant-rate charge or discharge
/// to meet the terminal state). Throws InfeasibleUserModel when none exists.
DeviceSchedule find_feasible_schedule(const UserModel& m);

}  // namespace dsm
