#pragma once

// Voltage stimuli. Every waveform is a pure function of time plus a list of
// breakpoints (times where its slope changes) that integrators stop at.

#include <optional>
#include <stdexcept>
#include <variant>
#include <vector>

namespace memcap {

class WaveformError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

struct ConstantSource {
    double value = 0.0;
};

struct ResetPulse {
    double amplitude = 0.0; // V, signed
    double width = 0.0;     // s
};

/// Binary pulse train: slot k holds levels[k] * amplitude for `width`
/// seconds. Level changes are linear ramps of `edge_time` starting at the
/// slot boundary. An optional reset pulse follows the last slot, after which
/// the source returns to 0 V.
struct PulseTrain {
    double amplitude = 0.0;
    double width = 0.0;
    std::vector<int> levels;
    std::optional<ResetPulse> reset;
    double sample_dt = 0.0; // 0 -> width / 100
    double edge_time = 0.0; // 0 -> width * 1e-4

    void validate() const;
    [[nodiscard]] double edge() const { return edge_time > 0 ? edge_time : width * 1e-4; }
    [[nodiscard]] double sample_step() const { return sample_dt > 0 ? sample_dt : width / 100; }
    [[nodiscard]] double cycle_duration() const { return width * static_cast<double>(levels.size()); }
    /// Cycle plus reset (and its trailing ramp) if present.
    [[nodiscard]] double duration() const;
    [[nodiscard]] double value(double t) const;
    void breakpoints(std::vector<double>& out) const;
};

struct SineSource {
    double amplitude = 1.0;
    double frequency = 1.0; // Hz
    double phase = 0.0;     // rad
    double offset = 0.0;

    [[nodiscard]] double value(double t) const;
    /// Zero crossings of the sine term between t0 and t1 (exact when phase = 0).
    void breakpoints(double t0, double t1, std::vector<double>& out) const;
};

/// Piecewise-linear source; holds its first/last value outside the table.
struct PwlSource {
    std::vector<double> t;
    std::vector<double> v;

    void validate() const;
    [[nodiscard]] double value(double time) const;
};

using Waveform = std::variant<ConstantSource, PulseTrain, SineSource, PwlSource>;

double value_at(const Waveform& w, double t);
/// Appends breakpoints inside [t0, t1] (unsorted, may contain duplicates).
void append_breakpoints(const Waveform& w, double t0, double t1, std::vector<double>& out);
/// Preferred maximum step for this source (infinity if none).
double preferred_step(const Waveform& w);
void validate(const Waveform& w);

} // namespace memcap
