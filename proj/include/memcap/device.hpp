#pragma once

// Mem-device state equations.
//
// Three families share one interface: the Biolek threshold memcapacitor, a
// reduced metal-oxide (Mohamed) memcapacitor and a generic threshold
// memristor. Every model has a normalized internal state rho in [0, 1] that
// grows under positive drive above threshold and shrinks under negative
// drive below -threshold. Stepping is a pure function of (params, state,
// voltage, dt).

#include <array>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace memcap {

class ModelError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

struct BiolekParams {
    double c_low = 1e-12;   // F
    double c_high = 12e-12; // F
    double beta = 0.0;      // F/(V*s)
    double v_th = 0.8;      // V

    void validate() const;
    friend bool operator==(const BiolekParams&, const BiolekParams&) = default;
};

struct BiolekState {
    double c = 0.0; // F
    friend bool operator==(const BiolekState&, const BiolekState&) = default;
};

/// Reduced metal-oxide memcapacitor. Filament growth x and cross-section m
/// are driven by threshold-gated sinh rates. Capacitance mixes the filament
/// fraction m with the normalized gap narrowing g = (x - x_min)/(x_max - x_min):
/// C = epsilon * area * (m + (1 - m) g) / (d1 + d2).
struct MohamedParams {
    double k_g = 0.0;       // 1/s
    double k_s = 0.0;       // 1/s
    double b_g = 2.2475;    // 1/V
    double b_s = 2.75;      // 1/V
    double x_min = 0.4;
    double x_max = 0.9;
    double m_min = 0.01;
    double m_max = 0.9;
    double d1 = 5e-10;      // m
    double d2 = 5e-10;      // m
    double epsilon = 25.0 * 8.8541878128e-12; // F/m
    double area = 4.5e-10;  // m^2
    double v_th = 0.8;      // V

    void validate() const;
    friend bool operator==(const MohamedParams&, const MohamedParams&) = default;
};

struct MohamedState {
    double x = 0.0;
    double m = 0.0;
    friend bool operator==(const MohamedState&, const MohamedState&) = default;
};

enum class MemristorLabel { Chang, Oblea, Sheridan, Custom };

struct MemristorParams {
    double r_on = 1e4;  // Ohm
    double r_off = 1e6; // Ohm
    double k_on = 0.0;  // 1/(V*s)
    double k_off = 0.0; // 1/(V*s)
    double v_th = 0.8;  // V
    MemristorLabel label = MemristorLabel::Custom;

    void validate() const;
    friend bool operator==(const MemristorParams&, const MemristorParams&) = default;
};

struct MemristorState {
    double rho = 0.0;
    friend bool operator==(const MemristorState&, const MemristorState&) = default;
};

using DeviceParams = std::variant<BiolekParams, MohamedParams, MemristorParams>;
using DeviceState = std::variant<BiolekState, MohamedState, MemristorState>;

enum class DeviceKind { Biolek, Mohamed, Memristor };

// ---------------------------------------------------------------------------
// Model primitives

/// Threshold nonlinearity beta*(v - 0.5*(|v + v_th| - |v - v_th|)).
double biolek_f(double v, const BiolekParams& p);

/// Window in {0, 1}: growth blocked at c >= c_high, shrink blocked at c <= c_low.
double biolek_window(double c, double v, const BiolekParams& p);

BiolekState biolek_step(const BiolekState& s, double v, double dt, const BiolekParams& p);
MohamedState mohamed_step(const MohamedState& s, double v, double dt, const MohamedParams& p);
MemristorState memristor_step(const MemristorState& s, double v, double dt, const MemristorParams& p);

double mohamed_capacitance(const MohamedState& s, const MohamedParams& p);
double memristor_resistance(const MemristorState& s, const MemristorParams& p);

// ---------------------------------------------------------------------------
// Uniform interface over DeviceParams / DeviceState

/// Internal variables packed for integrators. Single-variable models leave
/// the second slot at zero.
using StateVector = std::array<double, 2>;

DeviceKind kind_of(const DeviceParams& p);
std::string_view kind_name(DeviceKind k);
bool is_capacitive(const DeviceParams& p);
double threshold(const DeviceParams& p);
void validate(const DeviceParams& p);

DeviceState minimum_state(const DeviceParams& p);
DeviceState maximum_state(const DeviceParams& p);
/// State with normalized internal variable rho (clamped to [0, 1]).
DeviceState state_at(const DeviceParams& p, double rho);
double normalized_state(const DeviceParams& p, const DeviceState& s);

/// Capacitance (F) for memcapacitors, conductance (S) for memristors.
double admittance(const DeviceParams& p, const DeviceState& s);
double admittance_min(const DeviceParams& p);
double admittance_max(const DeviceParams& p);

/// q = C*v. Throws for memristors, which expose device_current instead.
double device_charge(const DeviceParams& p, const DeviceState& s, double v);
/// i = v/R. Throws for memcapacitors (their current depends on history).
double device_current(const DeviceParams& p, const DeviceState& s, double v);

StateVector pack(const DeviceState& s);
DeviceState unpack(const DeviceParams& p, const StateVector& v);
StateVector state_rate(const DeviceParams& p, const StateVector& s, double v);
StateVector clamp_state(const DeviceParams& p, StateVector s);
/// Span of each packed variable, used to normalize integrator error.
StateVector state_span(const DeviceParams& p);

/// One RK4 step with clamping.
DeviceState step(const DeviceParams& p, const DeviceState& s, double v, double dt);
/// Holds v constant for `duration`, split into `substeps` RK4 steps.
DeviceState integrate(const DeviceParams& p, const DeviceState& s, double v, double duration,
                      int substeps = 1);

/// Time for a constant voltage v to move rho across its whole range
/// (growing for v > 0, shrinking for v < 0). Infinite below threshold.
double full_range_time(const DeviceParams& p, double v);

/// Overdrive above threshold (V) that moves rho by |delta_rho| in `width`
/// seconds under a constant pulse, ignoring clamps.
double overdrive_for_change(const DeviceParams& p, double delta_rho, double width);

// ---------------------------------------------------------------------------
// Named configurations calibrated to single-pulse switching times.

BiolekParams biolek_default();
MohamedParams mohamed_default();
MemristorParams chang_default();
MemristorParams oblea_default();
MemristorParams sheridan_default();

std::vector<std::string> preset_names();
/// Throws ModelError listing the known names.
DeviceParams preset(std::string_view name);
/// Name of the preset a parameter set was derived from ("biolek", "chang", ...).
std::string model_name(const DeviceParams& p);

} // namespace memcap
