#pragma once

// Threshold logic built from series mem-devices.
//
// An n-input AND/OR stage is a star circuit: each input source drives one
// device and all devices meet at the output. The two kinds differ only in
// device orientation. NAND, NOR, XOR and the full adder add behavioral CMOS
// inverters; an inverter output becomes a piecewise-linear source for the
// next stage.

#include "memcap/device.hpp"
#include "memcap/engine.hpp"

#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace memcap {

class LogicError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

enum class GateKind { And, Or, Nand, Nor, Xor, FullAdder };

std::string_view gate_name(GateKind k);
/// Accepts AND, OR, NAND, NOR, XOR, FA (case-insensitive).
GateKind parse_gate_kind(std::string_view s);

/// Boolean reference outputs for one input combination.
std::vector<int> expected_outputs(GateKind k, const std::vector<int>& inputs);

struct LogicBands {
    double v_lh = 0.0; // upper bound of logic 0 (V)
    double v_hl = 0.0; // lower bound of logic 1 (V)
};

/// Default bands for pulse amplitude v_p.
LogicBands default_bands(double v_p);

/// -1 for undefined.
int classify(double v, const LogicBands& b);

/// Behavioral CMOS inverter. The defaults put a static-CMOS AND2 built from
/// three such inverters at roughly 7x the power of a Mohamed AND2.
struct InverterModel {
    double threshold_fraction = 0.5;  // switching threshold / v_p
    double transition_energy = 1e-16; // J per output transition
    double static_power = 9.5e-14;    // W
};

struct OperatingPoint {
    double v_p = 2.4; // V
    double t_w = 0.0; // s
};

/// Pulse used for functional checks (shortest reliable slot per model).
OperatingPoint truth_table_operating_point(const DeviceParams& p);
/// Pulse used for power comparisons.
OperatingPoint power_operating_point(const DeviceParams& p);

/// Charge-balance output of a floating node: sum V_i C_i / sum C_i.
double gate_output_voltage(const std::vector<double>& v, const std::vector<double>& c);

struct SignalRef {
    enum class Kind { Input, Stage, Inverter };
    Kind kind = Kind::Input;
    std::size_t index = 0;
    friend bool operator==(const SignalRef&, const SignalRef&) = default;
};

struct MemStage {
    GateKind base = GateKind::And; // And or Or
    std::vector<SignalRef> inputs;
};

struct InverterNode {
    SignalRef input;
};

struct GateCircuit {
    GateKind kind = GateKind::And;
    int arity = 2;
    DeviceParams device;
    std::vector<MemStage> stages;
    std::vector<InverterNode> inverters;
    /// Evaluation order: (is_stage, index).
    std::vector<std::pair<bool, std::size_t>> order;
    std::vector<std::string> output_names;
    std::vector<SignalRef> outputs;
    InverterModel inverter;
    std::optional<LogicBands> bands; // default: default_bands(v_p)

    [[nodiscard]] std::size_t device_count() const;
    void validate() const;
};

/// Any supported kind; throws LogicError for unsupported arity.
GateCircuit build_gate(GateKind k, const DeviceParams& p, int arity);
/// NAND, NOR, XOR or FA only.
GateCircuit build_composite(GateKind k, const DeviceParams& p, int arity);

struct GateRunOptions {
    double v_p = 2.4;
    double t_w = 0.0;
    double guard_fraction = 0.01;
    bool reset = true;
    double edge = 0.0; // pulse edge time; 0 -> 1e-4 * t_w
    /// Per-input slot levels, all the same length. Empty: every input
    /// combination in binary counting order.
    std::vector<std::vector<int>> levels;
    /// Starting states keyed by device name ("M1", or "X2.M1" in multi-stage
    /// gates). Unlisted devices start at their minimum state.
    std::map<std::string, DeviceState> initial_states;
    TransientOptions transient;
};

struct TruthRow {
    std::vector<int> inputs;
    std::vector<int> expected;
    std::vector<double> voltage;
    std::vector<int> level; // 0, 1 or -1 (undefined)
    bool pass = false;
};

struct SignalTrace {
    std::string name;
    std::vector<double> t;
    std::vector<double> v;
};

struct GateRun {
    GateKind kind = GateKind::And;
    int arity = 0;
    std::string model;
    double v_p = 0.0;
    double t_w = 0.0;
    double cycle = 0.0; // slots * t_w
    LogicBands bands;
    std::vector<TruthRow> rows;
    bool pass = false;
    PowerReport power;           // over the cycle, reset excluded
    double inverter_fraction = 0.0;
    std::vector<SignalTrace> signals; // inputs, then stage and inverter outputs
    std::vector<std::size_t> output_signals;
    std::vector<TraceRecord> stage_traces;
    std::vector<DeviceState> final_states; // after the reset phase, stage-major
};

GateRun run_truth_table(const GateCircuit& gate, const GateRunOptions& opt);
GateRun run_truth_table(const GateCircuit& gate, double v_p, double t_w);

struct HazardSpike {
    std::string output;
    std::size_t slot = 0;
    double start = 0.0; // s
    double width = 0.0; // s
};

struct HazardReport {
    std::vector<HazardSpike> spikes;
    double worst = 0.0;          // s
    std::size_t excursions = 0;  // undefined-band entries between valid plateaus
};

/// Time inside each slot during which an output sits outside the class it
/// settles to by the sampling instant.
HazardReport measure_hazards(const GateRun& run);

/// Static-CMOS reference built from inverter-equivalents of the behavioral
/// inverter.
struct CmosReference {
    double equivalents = 0.0;
    double energy = 0.0;
    double average_power = 0.0;
};
CmosReference cmos_reference(GateKind k, int arity, const InverterModel& inv, double cycle);

} // namespace memcap
