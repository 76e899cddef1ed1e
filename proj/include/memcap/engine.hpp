#pragma once

// Transient simulation of "star" circuits: every branch is a voltage source
// in series with one mem-device, and all devices meet at a single output
// node. This topology covers threshold-logic gates and single devices
// driven directly (output grounded).
//
// The floating output follows from charge conservation, so no matrix solve
// is needed: V_out = (Q + sum_k w_k V_k) / sum_k w_k with w = C for
// memcapacitors (Q = stored node charge) and w = G, Q = 0 for memristors.

#include "memcap/device.hpp"
#include "memcap/waveform.hpp"

#include <iosfwd>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace memcap {

class SimulationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct Branch {
    std::string name;
    std::size_t source = 0; // index into the stimulus list
    DeviceParams params;
    DeviceState state;
    /// Device voltage = polarity * (V_source - V_out).
    int polarity = 1;
};

struct StarCircuit {
    std::vector<std::string> source_names;
    std::vector<Branch> branches;
    std::string output = "y";
    bool output_grounded = false;
    /// Intervals during which the output node is switched to ground.
    std::vector<std::pair<double, double>> ground_windows;
    double initial_node_charge = 0.0; // C, capacitive networks only

    void validate(std::size_t n_stimuli) const;
};

struct TransientOptions {
    double max_step = 0.0;         // 0 -> smallest preferred step of the stimuli
    double tolerance = 1e-7;       // step-doubling error on normalized state
    double max_state_change = 0.01;
    double min_step = 0.0;         // 0 -> duration * 1e-14
    std::size_t max_steps = 20'000'000;
};

/// Sample-major simulation output. Samples sit at accepted integrator steps
/// (non-uniform, strictly increasing). Device currents and voltages are in
/// the device's own orientation, so device power is v * i.
struct TraceRecord {
    std::vector<double> time;
    std::vector<std::string> node_names; // stimuli first, output last
    std::vector<std::vector<double>> node_voltage;
    std::vector<std::string> device_names;
    std::vector<std::size_t> device_source;
    std::vector<int> device_polarity;
    std::vector<bool> device_capacitive;
    std::vector<std::vector<double>> device_voltage;
    std::vector<std::vector<double>> device_charge; // q = C v, or integrated i dt
    std::vector<std::vector<double>> device_current;
    std::vector<std::vector<double>> device_power;
    std::vector<std::vector<double>> device_state; // normalized rho
    std::vector<DeviceState> final_states;
    std::size_t steps_rejected = 0;

    [[nodiscard]] std::size_t samples() const { return time.size(); }
    [[nodiscard]] std::size_t output_node() const { return node_names.size() - 1; }
    [[nodiscard]] const std::vector<double>& output_voltage() const {
        return node_voltage.back();
    }
    /// Columns: t, V(node)..., I(device)..., P(device)...
    void write_csv(std::ostream& os) const;
};

TraceRecord run_transient(const StarCircuit& circuit, std::span<const Waveform> stimuli,
                          double duration, const TransientOptions& options = {});

/// One device driven directly by `source` (its other terminal grounded).
/// The device is named "M1" and the source "v".
TraceRecord drive_device(const DeviceParams& p, const DeviceState& s, const Waveform& source, double duration,
                         const TransientOptions& options = {});

struct ElementPower {
    std::string name;
    std::string kind; // "source", "device", "inverter"
    double energy = 0.0;          // J, delivered (sources) or absorbed (devices)
    double average_power = 0.0;   // W
    double v_rms = 0.0;
    double i_rms = 0.0;
};

struct PowerReport {
    std::vector<ElementPower> elements;
    double total_energy = 0.0; // J drawn from supplies
    double duration = 0.0;     // s
    [[nodiscard]] double average_power() const {
        return duration > 0 ? total_energy / duration : 0.0;
    }
    [[nodiscard]] const ElementPower& element(const std::string& name) const;
};

/// Energy per element inside [t0, t1]. Capacitive energy integrates v dq,
/// resistive energy integrates v^2 G dt, both by the trapezoid rule on the
/// trace samples (window ends interpolated).
PowerReport average_power(const TraceRecord& trace, double t0, double t1);

/// Current samples of the named device (throws std::out_of_range if absent).
const std::vector<double>& device_current(const TraceRecord& trace, const std::string& device);

/// Linear interpolation of a sampled signal.
double interpolate(const std::vector<double>& t, const std::vector<double>& v, double at);

} // namespace memcap
