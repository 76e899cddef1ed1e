#include "memcap/waveform.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace memcap {

namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

double ramp(double from, double to, double t, double start, double edge) {
    if (t >= start + edge) return to;
    return from + (to - from) * (t - start) / edge;
}

} // namespace

void PulseTrain::validate() const {
    if (!(std::isfinite(amplitude))) throw WaveformError("pulse: amplitude must be finite");
    if (!(width > 0) || !std::isfinite(width)) throw WaveformError("pulse: width must be positive");
    if (levels.empty()) throw WaveformError("pulse: no levels");
    for (int l : levels)
        if (l != 0 && l != 1) throw WaveformError("pulse: levels must be 0 or 1");
    if (sample_dt < 0 || sample_step() > width / 100 * (1 + 1e-12))
        throw WaveformError("pulse: sample_dt must not exceed width/100");
    if (edge_time < 0 || edge() >= width / 2) throw WaveformError("pulse: edge time too long");
    if (reset) {
        if (!(reset->width > 2 * edge())) throw WaveformError("pulse: reset width too short");
        if (!std::isfinite(reset->amplitude)) throw WaveformError("pulse: reset amplitude");
    }
}

double PulseTrain::duration() const {
    double d = cycle_duration();
    if (reset) d += reset->width + edge();
    return d;
}

double PulseTrain::value(double t) const {
    double e = edge();
    double tc = cycle_duration();
    if (t <= 0) return 0.0;
    if (t < tc) {
        auto k = static_cast<std::size_t>(t / width);
        k = std::min(k, levels.size() - 1);
        double start = static_cast<double>(k) * width;
        double prev = k == 0 ? 0.0 : levels[k - 1] * amplitude;
        return ramp(prev, levels[k] * amplitude, t, start, e);
    }
    double last = levels.back() * amplitude;
    if (!reset) return last;
    double tr = tc + reset->width;
    if (t < tr) return ramp(last, reset->amplitude, t, tc, e);
    return ramp(reset->amplitude, 0.0, t, tr, e);
}

void PulseTrain::breakpoints(std::vector<double>& out) const {
    double e = edge();
    for (std::size_t k = 0; k <= levels.size(); ++k) {
        double tb = static_cast<double>(k) * width;
        out.push_back(tb);
        if (k < levels.size()) out.push_back(tb + e);
    }
    if (reset) {
        double tc = cycle_duration();
        out.push_back(tc + e);
        out.push_back(tc + reset->width);
        out.push_back(tc + reset->width + e);
    }
}

double SineSource::value(double t) const {
    return offset + amplitude * std::sin(2 * std::numbers::pi * frequency * t + phase);
}

void SineSource::breakpoints(double t0, double t1, std::vector<double>& out) const {
    if (!(frequency > 0)) return;
    double half = 0.5 / frequency;
    double shift = -phase / (2 * std::numbers::pi * frequency);
    double k0 = std::ceil((t0 - shift) / half);
    for (double k = k0;; k += 1) {
        double t = shift + k * half;
        if (t > t1) break;
        out.push_back(t);
    }
}

void PwlSource::validate() const {
    if (t.empty() || t.size() != v.size()) throw WaveformError("pwl: mismatched or empty table");
    for (std::size_t i = 1; i < t.size(); ++i)
        if (!(t[i] >= t[i - 1])) throw WaveformError("pwl: times must be non-decreasing");
}

double PwlSource::value(double time) const {
    if (time <= t.front()) return v.front();
    if (time >= t.back()) return v.back();
    auto it = std::upper_bound(t.begin(), t.end(), time);
    std::size_t i = static_cast<std::size_t>(it - t.begin());
    double ta = t[i - 1], tb = t[i];
    if (tb == ta) return v[i];
    return v[i - 1] + (v[i] - v[i - 1]) * (time - ta) / (tb - ta);
}

double value_at(const Waveform& w, double t) {
    return std::visit(overloaded{[](const ConstantSource& c) { return c.value; },
                                 [&](const auto& s) { return s.value(t); }},
                      w);
}

void append_breakpoints(const Waveform& w, double t0, double t1, std::vector<double>& out) {
    std::vector<double> all;
    std::visit(overloaded{[](const ConstantSource&) {},
                          [&](const PulseTrain& p) { p.breakpoints(all); },
                          [&](const SineSource& s) { s.breakpoints(t0, t1, all); },
                          [&](const PwlSource& p) { all = p.t; }},
               w);
    for (double t : all)
        if (t >= t0 && t <= t1) out.push_back(t);
}

double preferred_step(const Waveform& w) {
    return std::visit(overloaded{[](const PulseTrain& p) { return p.sample_step(); },
                                 [](const SineSource& s) {
                                     return s.frequency > 0 ? 1.0 / (200 * s.frequency)
                                                            : std::numeric_limits<double>::infinity();
                                 },
                                 [](const auto&) { return std::numeric_limits<double>::infinity(); }},
                      w);
}

void validate(const Waveform& w) {
    std::visit(overloaded{[](const ConstantSource& c) {
                              if (!std::isfinite(c.value)) throw WaveformError("constant: not finite");
                          },
                          [](const PulseTrain& p) { p.validate(); },
                          [](const SineSource& s) {
                              if (!std::isfinite(s.amplitude) || !(s.frequency >= 0))
                                  throw WaveformError("sine: bad amplitude or frequency");
                          },
                          [](const PwlSource& p) { p.validate(); }},
               w);
}

} // namespace memcap
