#pragma once

// Single-layer delta-rule training of a crossbar classifier.
//
// Each example is read once with sub-threshold inputs (states frozen), the
// column outputs o_j = -V_oj are compared against targets v_offset +/- margin,
// and every device then receives one fixed-width pulse whose amplitude encodes
// the desired change alpha * x_i * e_j.

#include "memcap/crossbar.hpp"
#include "memcap/dataset.hpp"

#include <cstdint>
#include <iosfwd>
#include <random>
#include <stdexcept>
#include <vector>

namespace memcap {

class TrainingError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct TrainingConfig {
    double alpha = 0.5;
    double t_w = 250e-6;     // update pulse width (s)
    double v_w = 1.2;        // largest update amplitude (V)
    double v_offset = 0.03;  // target centre (V)
    double margin = 0.005;   // target = v_offset + margin for the label, - margin otherwise
    int epochs = 10;
    std::uint64_t seed = 1;
    double input_scale = 0.5; // V for a full-intensity pixel
    double t_read = 250e-6;   // memristive read window (s)
    int divergence_epochs = 5;

    /// Throws TrainingError when the configuration cannot be used with `p`.
    void validate(const DeviceParams& p) const;
};

struct EncodedSet {
    std::vector<std::vector<double>> x;
    std::vector<int> y;
    [[nodiscard]] std::size_t size() const { return y.size(); }
};

EncodedSet encode(const Dataset& d, const Encoder& e);

struct EpochStats {
    int epoch = 0;
    double mean_abs_error = 0.0;  // V
    double accuracy = 0.0;        // on the training examples, read before each update
    std::size_t pulses = 0;
    double inference_energy = 0.0; // J
    double update_energy = 0.0;    // J
    double cumulative_energy = 0.0;
};

/// Real-valued reference with the same read-out scaling as a default crossbar:
/// o_j = sum_i x_i w_ij / rows.
struct IdealModel {
    WeightMatrix w;
    bool clip = true;
    IdealModel(std::size_t rows, std::size_t cols, bool clip_weights = true) : w(rows, cols), clip(clip_weights) {}
    [[nodiscard]] std::vector<double> outputs(const std::vector<double>& x) const;
};

EpochStats train_epoch(Crossbar& xb, const EncodedSet& data, const TrainingConfig& cfg, std::mt19937_64& rng,
                       int epoch = 1);
EpochStats train_epoch(IdealModel& m, const EncodedSet& data, const TrainingConfig& cfg, std::mt19937_64& rng,
                       int epoch = 1);

struct TrainingRun {
    std::vector<EpochStats> epochs;
    double energy = 0.0;             // J, inference plus updates
    std::size_t presentations = 0;   // examples seen
    [[nodiscard]] double energy_per_image() const {
        return presentations ? energy / static_cast<double>(presentations) : 0.0;
    }
};

/// Runs cfg.epochs epochs. Throws TrainingError when the epoch mean |e| rises
/// cfg.divergence_epochs times in a row.
TrainingRun train(Crossbar& xb, const EncodedSet& data, const TrainingConfig& cfg);
TrainingRun train(IdealModel& m, const EncodedSet& data, const TrainingConfig& cfg);

struct EvalResult {
    double accuracy = 0.0;
    double energy_per_image = 0.0; // J
    std::vector<int> predictions;
};

/// Argmax over the columns, ties to the lowest index. Never modifies states.
EvalResult evaluate(const Crossbar& xb, const EncodedSet& data);
EvalResult evaluate(const IdealModel& m, const EncodedSet& data);

int argmax(const std::vector<double>& v);

/// CSV: epoch,mean_abs_error,accuracy,pulses,cumulative_energy
void write_training_log(std::ostream& os, const TrainingRun& run);

} // namespace memcap
