#pragma once

// Single-pulse switching-time measurement and the reference table the
// named presets are calibrated against.

#include "memcap/device.hpp"

#include <string>
#include <vector>

namespace memcap {

struct SwitchingTimes {
    double min_to_max = 0.0; // s, NaN if the 98% level is never reached
    double max_to_min = 0.0; // s
};

struct ReferenceDevice {
    std::string name;
    double amplitude;  // V
    double width;      // s, pulse used for the measurement
    double min_to_max; // s
    double max_to_min; // s
};

/// Reference switching times for each preset.
const std::vector<ReferenceDevice>& reference_devices();
const ReferenceDevice& reference_device(const std::string& name);

/// Drives one device directly with +amplitude (from minimum) and -amplitude
/// (from maximum) for `width` seconds and reports the time spent between
/// the 1% and 98% points of the normalized state.
SwitchingTimes measure_switching(const DeviceParams& p, double amplitude, double width,
                                 int steps = 20000);

/// Relative deviation |measured - reference| / reference, worst of both directions.
double calibration_error(const SwitchingTimes& measured, const ReferenceDevice& ref);

} // namespace memcap
