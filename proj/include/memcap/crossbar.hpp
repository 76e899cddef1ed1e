#pragma once

// Mem-device crossbar with a bias column and ideal virtual-ground outputs.
//
// Row i is driven at V_i; every column sums the charge of its devices into
// an output capacitor C_o held at virtual ground. Each device contributes
// kappa_ij * V_i where kappa is its capacitance (memcapacitors) or its
// conductance times the read window (memristors). The bias column is pinned
// at the minimum state and its charge is subtracted from every column, so
//   -V_oj = sum_i V_i (kappa_ij - kappa_bias_i) / C_oj.

#include "memcap/device.hpp"
#include "memcap/engine.hpp"

#include <cstddef>
#include <iosfwd>
#include <span>
#include <stdexcept>
#include <vector>

namespace memcap {

class CrossbarError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Row-major m x n logical weights in [0, 1].
struct WeightMatrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> w;

    WeightMatrix() = default;
    WeightMatrix(std::size_t r, std::size_t c, double fill = 0.0) : rows(r), cols(c), w(r * c, fill) {}
    double& operator()(std::size_t i, std::size_t j) { return w[i * cols + j]; }
    double operator()(std::size_t i, std::size_t j) const { return w[i * cols + j]; }
    void validate() const;
};

struct UpdateResult {
    double energy = 0.0;       // J
    double weight_before = 0.0;
    double weight_after = 0.0;
};

struct ProgramResult {
    std::size_t pulses = 0;
    double worst_error = 0.0; // weight units
    double energy = 0.0;      // J
};

class Crossbar {
public:
    /// Fresh crossbar with every device at its minimum state. `c_out` of 0
    /// selects the default rows * (kappa_max - kappa_min) for every column.
    Crossbar(std::size_t rows, std::size_t cols, DeviceParams params, double t_read = 250e-6,
             double c_out = 0.0);

    [[nodiscard]] std::size_t rows() const { return rows_; }
    [[nodiscard]] std::size_t cols() const { return cols_; }
    [[nodiscard]] const DeviceParams& params() const { return params_; }
    [[nodiscard]] double read_time() const { return t_read_; }
    [[nodiscard]] bool capacitive() const { return is_capacitive(params_); }

    [[nodiscard]] const DeviceState& state(std::size_t i, std::size_t j) const;
    /// Column index `cols()` addresses the bias column (read-only).
    [[nodiscard]] const DeviceState& bias_state(std::size_t i) const;
    /// Sets a device state verbatim (clamped to the model bounds).
    void set_state(std::size_t i, std::size_t j, const DeviceState& s);

    /// Charge per volt of a device (F).
    [[nodiscard]] double kappa(std::size_t i, std::size_t j) const { return kappa_[i * cols_ + j]; }
    [[nodiscard]] double kappa_min() const { return kappa_min_; }
    [[nodiscard]] double kappa_max() const { return kappa_max_; }
    [[nodiscard]] double output_capacitance(std::size_t j) const { return c_out_[j]; }
    void set_output_capacitance(std::size_t j, double c);

    [[nodiscard]] double weight(std::size_t i, std::size_t j) const;
    [[nodiscard]] WeightMatrix weights() const;
    /// Normalized device state that realizes a logical weight.
    [[nodiscard]] double state_for_weight(double w) const;

    /// Column output voltages. Refuses any |V_i| at or above threshold.
    [[nodiscard]] std::vector<double> infer(std::span<const double> v) const;

    /// Energy drawn from the row drivers for one read. Memcapacitive rows
    /// charge every device (bias column included) from `previous` (default
    /// 0 V, i.e. after a discharge) to `v`; memristive rows conduct for the
    /// read window. Virtual-ground circuitry is not counted.
    [[nodiscard]] PowerReport energy_of_inference(std::span<const double> v,
                                                  std::span<const double> previous = {}) const;

    /// Applies one rectangular pulse to device (i, j) only.
    UpdateResult apply_update(std::size_t i, std::size_t j, double v_w, double t_w);

    /// Pulses every device toward `target` until within `tolerance` (weight
    /// units). Throws CrossbarError naming the worst device on failure.
    ProgramResult program(const WeightMatrix& target, double tolerance, double t_w = 250e-6,
                          std::size_t max_pulses_per_device = 20);

    /// Checkpoint: header line, then rows x (cols + 1) values in F
    /// (memcapacitors) or Ohm (memristors); the last column is the bias.
    void save_csv(std::ostream& os) const;
    /// Restores states from a checkpoint written for the same model and shape.
    void load_csv(std::istream& is);

private:
    void check_index(std::size_t i, std::size_t j) const;
    void refresh(std::size_t i, std::size_t j);
    [[nodiscard]] double checkpoint_value(const DeviceState& s) const;
    [[nodiscard]] DeviceState state_from_checkpoint(double value) const;

    std::size_t rows_;
    std::size_t cols_;
    DeviceParams params_;
    double t_read_;
    double kappa_min_;
    double kappa_max_;
    std::vector<DeviceState> states_;
    std::vector<DeviceState> bias_;
    std::vector<double> kappa_;
    std::vector<double> c_out_;
};

} // namespace memcap
