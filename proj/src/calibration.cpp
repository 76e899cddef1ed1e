#include "memcap/calibration.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace memcap {

namespace {

constexpr double k_lo = 0.01;
constexpr double k_hi = 0.98;

double crossing(double t0, double r0, double t1, double r1, double level) {
    if (r1 == r0) return t1;
    return t0 + (level - r0) / (r1 - r0) * (t1 - t0);
}

double sweep(const DeviceParams& p, DeviceState s, double v, double width, int steps, bool rising) {
    double dt = width / steps;
    double first = rising ? k_lo : k_hi;
    double second = rising ? k_hi : k_lo;
    double t_first = std::numeric_limits<double>::quiet_NaN();
    double r_prev = normalized_state(p, s);
    for (int i = 1; i <= steps; ++i) {
        s = step(p, s, v, dt);
        double r = normalized_state(p, s);
        double ta = (i - 1) * dt, tb = i * dt;
        bool hit_first = rising ? (r_prev < first && r >= first) : (r_prev > first && r <= first);
        bool hit_second = rising ? (r_prev < second && r >= second) : (r_prev > second && r <= second);
        if (hit_first) t_first = crossing(ta, r_prev, tb, r, first);
        if (hit_second) return crossing(ta, r_prev, tb, r, second) - t_first;
        r_prev = r;
    }
    return std::numeric_limits<double>::quiet_NaN();
}

} // namespace

const std::vector<ReferenceDevice>& reference_devices() {
    static const std::vector<ReferenceDevice> table = {
        {"biolek", 2.4, 2e-6, 0.79e-6, 0.80e-6},
        {"mohamed", 2.4, 3.0, 1.15, 0.53},
        {"chang", 2.4, 20e-12, 5.12e-12, 2.23e-12},
        {"oblea", 2.4, 1e-3, 200.31e-6, 450.62e-6},
        {"sheridan", 4.85, 100e-9, 34.51e-9, 23.63e-9},
    };
    return table;
}

const ReferenceDevice& reference_device(const std::string& name) {
    for (const auto& r : reference_devices())
        if (r.name == name) return r;
    throw ModelError("no reference switching data for '" + name + "'");
}

SwitchingTimes measure_switching(const DeviceParams& p, double amplitude, double width, int steps) {
    validate(p);
    SwitchingTimes out;
    out.min_to_max = sweep(p, minimum_state(p), std::abs(amplitude), width, steps, true);
    out.max_to_min = sweep(p, maximum_state(p), -std::abs(amplitude), width, steps, false);
    return out;
}

double calibration_error(const SwitchingTimes& m, const ReferenceDevice& ref) {
    double a = std::abs(m.min_to_max - ref.min_to_max) / ref.min_to_max;
    double b = std::abs(m.max_to_min - ref.max_to_min) / ref.max_to_min;
    if (std::isnan(a) || std::isnan(b)) return std::numeric_limits<double>::infinity();
    return std::max(a, b);
}

} // namespace memcap
