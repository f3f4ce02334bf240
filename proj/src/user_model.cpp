#include "dsm/user_model.hpp"

#include <cmath>

namespace dsm {

const char* to_string(UserKind kind) {
    switch (kind) {
        case UserKind::Passive: return "Passive";
        case UserKind::GenOnly: return "GenOnly";
        case UserKind::StoreOnly: return "StoreOnly";
        case UserKind::GenStore: return "GenStore";
    }
    return "?";
}

UserKind user_kind_from_string(const std::string& s) {
    if (s == "Passive") return UserKind::Passive;
    if (s == "GenOnly") return UserKind::GenOnly;
    if (s == "StoreOnly") return UserKind::StoreOnly;
    if (s == "GenStore") return UserKind::GenStore;
    throw ModelError("unknown user kind: " + s);
}

void UserModel::validate() const {
    if (slots() < 1) throw ModelError("UserModel: empty base demand");
    for (int h = 0; h < slots(); ++h)
        if (base_demand[h] < 0.0) throw ModelError("UserModel: negative base demand");
    if (gen_cap_hour < 0.0 || gen_cap_day < 0.0 || storage_capacity < 0.0 || charge_rate_max < 0.0)
        throw ModelError("UserModel: negative device capacity");
    if (has_generation() && gen_cap_day > slots() * gen_cap_hour + 1e-12)
        throw ModelError("UserModel: gen_cap_day exceeds |H| * gen_cap_hour");
    if (has_storage()) {
        if (!(leak_rate > 0.0 && leak_rate <= 1.0)) throw ModelError("UserModel: leak_rate outside (0,1]");
        if (!(charge_eff > 0.0 && charge_eff <= 1.0)) throw ModelError("UserModel: charge_eff outside (0,1]");
        if (discharge_eff < 1.0) throw ModelError("UserModel: discharge_eff < 1");
        if (initial_charge < 0.0 || initial_charge > storage_capacity)
            throw ModelError("UserModel: initial_charge outside [0, capacity]");
        const double terminal = initial_charge + end_of_day_delta;
        if (terminal < -1e-12 || terminal > storage_capacity + 1e-12)
            throw ModelError("UserModel: terminal charge outside [0, capacity]");
    }
}

DeviceSchedule DeviceSchedule::zero(int slots) {
    DeviceSchedule d;
    d.g = Vec::Zero(slots);
    d.s_plus = Vec::Zero(slots);
    d.s_minus = Vec::Zero(slots);
    return d;
}

Vec DeviceSchedule::implied_load(const UserModel& m) const {
    return m.base_demand - g + s_plus - s_minus;
}

Vec battery_state_path(const UserModel& m, const DeviceSchedule& d) {
    const int H = m.slots();
    Vec q(H);
    double state = m.initial_charge;
    for (int h = 0; h < H; ++h) {
        state = m.leak_rate * state + m.charge_eff * d.s_plus[h] - m.discharge_eff * d.s_minus[h];
        q[h] = state;
    }
    return q;
}

FeasibilityReport feasible_region_check(const UserModel& m, const DeviceSchedule& d, double tol) {
    FeasibilityReport rep;
    auto flag = [&](const std::string& name, int slot, double amount) {
        if (amount > tol) {
            rep.feasible = false;
            rep.violations.push_back({name, slot, amount});
        }
    };
    const int H = m.slots();
    if (d.g.size() != H || d.s_plus.size() != H || d.s_minus.size() != H) {
        rep.feasible = false;
        rep.violations.push_back({"dimension", 0, 0.0});
        return rep;
    }

    if (!m.has_generation()) {
        for (int h = 0; h < H; ++h) flag("passive_generation", h + 1, std::abs(d.g[h]));
    } else {
        for (int h = 0; h < H; ++h) {
            flag("gen_nonneg", h + 1, -d.g[h]);
            flag("gen_cap_hour", h + 1, d.g[h] - m.gen_cap_hour);
        }
        flag("gen_cap_day", 0, d.g.sum() - m.gen_cap_day);
    }

    if (!m.has_storage()) {
        for (int h = 0; h < H; ++h) {
            flag("passive_storage", h + 1, std::abs(d.s_plus[h]));
            flag("passive_storage", h + 1, std::abs(d.s_minus[h]));
        }
    } else {
        for (int h = 0; h < H; ++h) {
            flag("charge_nonneg", h + 1, -d.s_plus[h]);
            flag("charge_rate", h + 1, d.s_plus[h] - m.charge_rate_max);
            flag("discharge_nonneg", h + 1, -d.s_minus[h]);
            flag("discharge_rate", h + 1, d.s_minus[h] - m.charge_rate_max);
        }
        const Vec q = battery_state_path(m, d);
        for (int h = 0; h < H; ++h) {
            flag("battery_lower", h + 1, -q[h]);
            flag("battery_upper", h + 1, q[h] - m.storage_capacity);
        }
        const double terminal = m.initial_charge + m.end_of_day_delta;
        flag("terminal_charge", H, std::abs(q[H - 1] - terminal));
    }
    return rep;
}

DeviceSchedule find_feasible_schedule(const UserModel& m) {
    const int H = m.slots();
    DeviceSchedule d = DeviceSchedule::zero(H);
    if (!m.has_storage()) return d;  // zero schedule always feasible without a battery

    // Geometric weight of a constant charge/discharge stream on q(|H|).
    double sigma = 0.0;
    for (int h = 0; h < H; ++h) sigma = sigma * m.leak_rate + 1.0;

    const double target = m.initial_charge + m.end_of_day_delta;
    const double drift = target - std::pow(m.leak_rate, H) * m.initial_charge;
    if (drift >= 0.0) {
        d.s_plus.setConstant(drift / (m.charge_eff * sigma));
    } else {
        d.s_minus.setConstant(-drift / (m.discharge_eff * sigma));
    }
    if (!feasible_region_check(m, d).feasible) throw InfeasibleUserModel(m.user_id);
    return d;
}

}  // namespace dsm
