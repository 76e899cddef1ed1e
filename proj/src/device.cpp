#include "memcap/device.hpp"

#include <algorithm>
#include <cmath>
#include <fmt/format.h>
#include <limits>

namespace memcap {

namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

constexpr double k_span = 0.97; // 1% -> 98% of the full state range

bool finite_positive(double v) { return std::isfinite(v) && v > 0.0; }

void require(bool ok, const std::string& msg) {
    if (!ok) throw ModelError(msg);
}

void check_step(double v, double dt) {
    require(std::isfinite(v), "step: voltage must be finite");
    require(std::isfinite(dt) && dt > 0, "step: dt must be positive and finite");
}

// Normalized state rates (1/s). Positive device voltage grows the state.
double biolek_rate(double c, double v, const BiolekParams& p) {
    return biolek_f(v, p) * biolek_window(c, v, p);
}

double mohamed_x_rate(double x, double v, const MohamedParams& p) {
    if (v > p.v_th) {
        if (x >= p.x_max) return 0.0;
        return p.k_g * std::sinh(p.b_g * (v - p.v_th));
    }
    if (v < -p.v_th) {
        if (x <= p.x_min) return 0.0;
        return -p.k_s * std::sinh(p.b_s * (-v - p.v_th));
    }
    return 0.0;
}

double memristor_rate(double rho, double v, const MemristorParams& p) {
    if (v > p.v_th) return rho >= 1.0 ? 0.0 : p.k_on * (v - p.v_th);
    if (v < -p.v_th) return rho <= 0.0 ? 0.0 : -p.k_off * (-v - p.v_th);
    return 0.0;
}

template <class F>
StateVector rk4(const StateVector& s, double dt, F&& rate) {
    auto add = [](const StateVector& a, const StateVector& b, double h) {
        return StateVector{a[0] + h * b[0], a[1] + h * b[1]};
    };
    StateVector k1 = rate(s);
    StateVector k2 = rate(add(s, k1, dt / 2));
    StateVector k3 = rate(add(s, k2, dt / 2));
    StateVector k4 = rate(add(s, k3, dt));
    return {s[0] + dt / 6 * (k1[0] + 2 * k2[0] + 2 * k3[0] + k4[0]),
            s[1] + dt / 6 * (k1[1] + 2 * k2[1] + 2 * k3[1] + k4[1])};
}

double mohamed_eps_area(const MohamedParams& p) { return p.epsilon * p.area / (p.d1 + p.d2); }

} // namespace

// ---------------------------------------------------------------------------

void BiolekParams::validate() const {
    require(finite_positive(c_low), "biolek: c_low must be positive");
    require(std::isfinite(c_high) && c_high > c_low, "biolek: c_high must exceed c_low");
    require(finite_positive(beta), "biolek: beta must be positive");
    require(finite_positive(v_th), "biolek: v_th must be positive");
}

void MohamedParams::validate() const {
    require(finite_positive(k_g) && finite_positive(k_s), "mohamed: k_g and k_s must be positive");
    require(finite_positive(b_g) && finite_positive(b_s), "mohamed: b_g and b_s must be positive");
    require(x_min >= 0.0 && x_max > x_min && x_max <= 1.0,
            "mohamed: need 0 <= x_min < x_max <= 1");
    require(m_min >= 0.0 && m_max > m_min && m_max <= 1.0,
            "mohamed: need 0 <= m_min < m_max <= 1");
    require(finite_positive(d1) && finite_positive(d2), "mohamed: d1 and d2 must be positive");
    require(finite_positive(epsilon) && finite_positive(area),
            "mohamed: epsilon and area must be positive");
    require(finite_positive(v_th), "mohamed: v_th must be positive");
}

void MemristorParams::validate() const {
    require(finite_positive(r_on), "memristor: r_on must be positive");
    require(std::isfinite(r_off) && r_off > r_on, "memristor: r_off must exceed r_on");
    require(finite_positive(k_on) && finite_positive(k_off),
            "memristor: k_on and k_off must be positive");
    require(finite_positive(v_th), "memristor: v_th must be positive");
}

// ---------------------------------------------------------------------------

double biolek_f(double v, const BiolekParams& p) {
    // Piecewise form of v - (|v + v_th| - |v - v_th|) / 2; exact zero inside the threshold.
    if (std::abs(v) <= p.v_th) return 0.0;
    return p.beta * (v > 0 ? v - p.v_th : v + p.v_th);
}

double biolek_window(double c, double v, const BiolekParams& p) {
    if (v >= 0.0) return c < p.c_high ? 1.0 : 0.0;
    return c > p.c_low ? 1.0 : 0.0;
}

BiolekState biolek_step(const BiolekState& s, double v, double dt, const BiolekParams& p) {
    check_step(v, dt);
    StateVector out = rk4({s.c, 0.0}, dt, [&](const StateVector& x) {
        return StateVector{biolek_rate(x[0], v, p), 0.0};
    });
    return {std::clamp(out[0], p.c_low, p.c_high)};
}

MohamedState mohamed_step(const MohamedState& s, double v, double dt, const MohamedParams& p) {
    check_step(v, dt);
    DeviceParams dp = p;
    StateVector out = clamp_state(dp, rk4({s.x, s.m}, dt, [&](const StateVector& x) {
        return state_rate(dp, x, v);
    }));
    return {out[0], out[1]};
}

MemristorState memristor_step(const MemristorState& s, double v, double dt,
                              const MemristorParams& p) {
    check_step(v, dt);
    StateVector out = rk4({s.rho, 0.0}, dt, [&](const StateVector& x) {
        return StateVector{memristor_rate(x[0], v, p), 0.0};
    });
    return {std::clamp(out[0], 0.0, 1.0)};
}

double mohamed_capacitance(const MohamedState& s, const MohamedParams& p) {
    double g = (s.x - p.x_min) / (p.x_max - p.x_min);
    return mohamed_eps_area(p) * (s.m + (1.0 - s.m) * g);
}

double memristor_resistance(const MemristorState& s, const MemristorParams& p) {
    return p.r_off + s.rho * (p.r_on - p.r_off);
}

// ---------------------------------------------------------------------------

DeviceKind kind_of(const DeviceParams& p) {
    return std::visit(overloaded{[](const BiolekParams&) { return DeviceKind::Biolek; },
                                 [](const MohamedParams&) { return DeviceKind::Mohamed; },
                                 [](const MemristorParams&) { return DeviceKind::Memristor; }},
                      p);
}

std::string_view kind_name(DeviceKind k) {
    switch (k) {
    case DeviceKind::Biolek: return "biolek";
    case DeviceKind::Mohamed: return "mohamed";
    case DeviceKind::Memristor: return "memristor";
    }
    return "?";
}

bool is_capacitive(const DeviceParams& p) { return kind_of(p) != DeviceKind::Memristor; }

double threshold(const DeviceParams& p) {
    return std::visit([](const auto& q) { return q.v_th; }, p);
}

void validate(const DeviceParams& p) {
    std::visit([](const auto& q) { q.validate(); }, p);
}

DeviceState minimum_state(const DeviceParams& p) { return state_at(p, 0.0); }
DeviceState maximum_state(const DeviceParams& p) { return state_at(p, 1.0); }

DeviceState state_at(const DeviceParams& p, double rho) {
    rho = std::clamp(rho, 0.0, 1.0);
    return std::visit(
        overloaded{[&](const BiolekParams& q) -> DeviceState {
                       return BiolekState{rho >= 1.0 ? q.c_high
                                                     : q.c_low + rho * (q.c_high - q.c_low)};
                   },
                   [&](const MohamedParams& q) -> DeviceState {
                       if (rho >= 1.0) return MohamedState{q.x_max, q.m_max};
                       return MohamedState{q.x_min + rho * (q.x_max - q.x_min),
                                           q.m_min + rho * (q.m_max - q.m_min)};
                   },
                   [&](const MemristorParams&) -> DeviceState { return MemristorState{rho}; }},
        p);
}

double normalized_state(const DeviceParams& p, const DeviceState& s) {
    StateVector v = pack(s);
    return std::visit(
        overloaded{[&](const BiolekParams& q) { return (v[0] - q.c_low) / (q.c_high - q.c_low); },
                   [&](const MohamedParams& q) { return (v[0] - q.x_min) / (q.x_max - q.x_min); },
                   [&](const MemristorParams&) { return v[0]; }},
        p);
}

double admittance(const DeviceParams& p, const DeviceState& s) {
    StateVector v = pack(s);
    return std::visit(
        overloaded{[&](const BiolekParams&) { return v[0]; },
                   [&](const MohamedParams& q) {
                       return mohamed_capacitance(MohamedState{v[0], v[1]}, q);
                   },
                   [&](const MemristorParams& q) {
                       return 1.0 / memristor_resistance(MemristorState{v[0]}, q);
                   }},
        p);
}

double admittance_min(const DeviceParams& p) { return admittance(p, minimum_state(p)); }
double admittance_max(const DeviceParams& p) { return admittance(p, maximum_state(p)); }

double device_charge(const DeviceParams& p, const DeviceState& s, double v) {
    if (!is_capacitive(p)) throw ModelError("charge is not a state function of a memristor");
    return admittance(p, s) * v;
}

double device_current(const DeviceParams& p, const DeviceState& s, double v) {
    if (is_capacitive(p)) throw ModelError("memcapacitor current depends on dq/dt");
    return admittance(p, s) * v;
}

StateVector pack(const DeviceState& s) {
    return std::visit(overloaded{[](const BiolekState& b) { return StateVector{b.c, 0.0}; },
                                 [](const MohamedState& m) { return StateVector{m.x, m.m}; },
                                 [](const MemristorState& r) { return StateVector{r.rho, 0.0}; }},
                      s);
}

DeviceState unpack(const DeviceParams& p, const StateVector& v) {
    switch (kind_of(p)) {
    case DeviceKind::Biolek: return BiolekState{v[0]};
    case DeviceKind::Mohamed: return MohamedState{v[0], v[1]};
    case DeviceKind::Memristor: return MemristorState{v[0]};
    }
    return MemristorState{v[0]};
}

StateVector state_rate(const DeviceParams& p, const StateVector& s, double v) {
    return std::visit(
        overloaded{[&](const BiolekParams& q) { return StateVector{biolek_rate(s[0], v, q), 0.0}; },
                   [&](const MohamedParams& q) {
                       double dx = mohamed_x_rate(s[0], v, q);
                       double dm = dx * (q.m_max - q.m_min) / (q.x_max - q.x_min);
                       if ((dm > 0 && s[1] >= q.m_max) || (dm < 0 && s[1] <= q.m_min)) dm = 0.0;
                       return StateVector{dx, dm};
                   },
                   [&](const MemristorParams& q) {
                       return StateVector{memristor_rate(s[0], v, q), 0.0};
                   }},
        p);
}

StateVector clamp_state(const DeviceParams& p, StateVector s) {
    std::visit(overloaded{[&](const BiolekParams& q) { s[0] = std::clamp(s[0], q.c_low, q.c_high); },
                          [&](const MohamedParams& q) {
                              s[0] = std::clamp(s[0], q.x_min, q.x_max);
                              s[1] = std::clamp(s[1], q.m_min, q.m_max);
                          },
                          [&](const MemristorParams&) { s[0] = std::clamp(s[0], 0.0, 1.0); }},
               p);
    return s;
}

StateVector state_span(const DeviceParams& p) {
    return std::visit(
        overloaded{[](const BiolekParams& q) { return StateVector{q.c_high - q.c_low, 1.0}; },
                   [](const MohamedParams& q) {
                       return StateVector{q.x_max - q.x_min, q.m_max - q.m_min};
                   },
                   [](const MemristorParams&) { return StateVector{1.0, 1.0}; }},
        p);
}

DeviceState step(const DeviceParams& p, const DeviceState& s, double v, double dt) {
    check_step(v, dt);
    StateVector out = rk4(pack(s), dt, [&](const StateVector& x) { return state_rate(p, x, v); });
    return unpack(p, clamp_state(p, out));
}

DeviceState integrate(const DeviceParams& p, const DeviceState& s, double v, double duration,
                      int substeps) {
    if (substeps < 1) throw ModelError("integrate: substeps must be >= 1");
    DeviceState cur = s;
    double dt = duration / substeps;
    for (int i = 0; i < substeps; ++i) cur = step(p, cur, v, dt);
    return cur;
}

double full_range_time(const DeviceParams& p, double v) {
    StateVector r = state_rate(p, pack(state_at(p, 0.5)), v);
    double rate = std::abs(r[0]) / state_span(p)[0];
    if (!(rate > 0)) return std::numeric_limits<double>::infinity();
    return 1.0 / rate;
}

double overdrive_for_change(const DeviceParams& p, double delta_rho, double width) {
    double d = std::abs(delta_rho);
    return std::visit(
        overloaded{[&](const BiolekParams& q) { return d * (q.c_high - q.c_low) / (q.beta * width); },
                   [&](const MohamedParams& q) {
                       double span = q.x_max - q.x_min;
                       if (delta_rho >= 0) return std::asinh(d * span / (q.k_g * width)) / q.b_g;
                       return std::asinh(d * span / (q.k_s * width)) / q.b_s;
                   },
                   [&](const MemristorParams& q) {
                       return d / ((delta_rho >= 0 ? q.k_on : q.k_off) * width);
                   }},
        p);
}

// ---------------------------------------------------------------------------

BiolekParams biolek_default() {
    BiolekParams p;
    // 2.4 V pulse -> 1.6 V overdrive; 0.79 us for the 1%->98% span.
    p.beta = k_span * (p.c_high - p.c_low) / (1.6 * 0.79e-6);
    return p;
}

MohamedParams mohamed_default() {
    MohamedParams p;
    double span = p.x_max - p.x_min;
    p.k_g = k_span * span / (1.15 * std::sinh(p.b_g * 1.6));
    p.k_s = k_span * span / (0.53 * std::sinh(p.b_s * 1.6));
    return p;
}

namespace {
MemristorParams memristor_preset(double v_p, double v_th, double t_on, double t_off,
                                 MemristorLabel label) {
    MemristorParams p;
    p.v_th = v_th;
    p.k_on = k_span / ((v_p - v_th) * t_on);
    p.k_off = k_span / ((v_p - v_th) * t_off);
    p.label = label;
    return p;
}
} // namespace

MemristorParams chang_default() {
    return memristor_preset(2.4, 0.8, 5.12e-12, 2.23e-12, MemristorLabel::Chang);
}

MemristorParams oblea_default() {
    return memristor_preset(2.4, 0.8, 200.31e-6, 450.62e-6, MemristorLabel::Oblea);
}

MemristorParams sheridan_default() {
    return memristor_preset(4.85, 4.85 / 3.0, 34.51e-9, 23.63e-9, MemristorLabel::Sheridan);
}

std::vector<std::string> preset_names() {
    return {"biolek", "mohamed", "chang", "oblea", "sheridan"};
}

DeviceParams preset(std::string_view name) {
    if (name == "biolek") return biolek_default();
    if (name == "mohamed") return mohamed_default();
    if (name == "chang") return chang_default();
    if (name == "oblea") return oblea_default();
    if (name == "sheridan") return sheridan_default();
    throw ModelError(fmt::format("unknown model '{}' (known: biolek, mohamed, chang, oblea, sheridan)",
                                 name));
}

std::string model_name(const DeviceParams& p) {
    return std::visit(overloaded{[](const BiolekParams&) { return std::string("biolek"); },
                                 [](const MohamedParams&) { return std::string("mohamed"); },
                                 [](const MemristorParams& q) {
                                     switch (q.label) {
                                     case MemristorLabel::Chang: return std::string("chang");
                                     case MemristorLabel::Oblea: return std::string("oblea");
                                     case MemristorLabel::Sheridan: return std::string("sheridan");
                                     case MemristorLabel::Custom: break;
                                     }
                                     return std::string("memristor");
                                 }},
                      p);
}

} // namespace memcap
