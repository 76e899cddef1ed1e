#include "memcap/engine.hpp"

#include "memcap/csv.hpp"

#include <algorithm>
#include <cmath>
#include <fmt/format.h>
#include <limits>
#include <ostream>

namespace memcap {

void StarCircuit::validate(std::size_t n_stimuli) const {
    if (branches.empty())
        throw SimulationError(fmt::format("singular network at node '{}': no branches", output));
    if (source_names.size() != n_stimuli)
        throw SimulationError(fmt::format("circuit names {} sources but {} stimuli were given",
                                          source_names.size(), n_stimuli));
    bool cap = is_capacitive(branches.front().params);
    for (const auto& b : branches) {
        if (b.source >= n_stimuli)
            throw SimulationError(fmt::format("branch '{}' refers to missing source {}", b.name,
                                              b.source));
        if (b.polarity != 1 && b.polarity != -1)
            throw SimulationError(fmt::format("branch '{}': polarity must be +1 or -1", b.name));
        if (is_capacitive(b.params) != cap)
            throw SimulationError(fmt::format(
                "node '{}' mixes capacitive and resistive branches", output));
        memcap::validate(b.params);
    }
    for (const auto& [a, b] : ground_windows)
        if (!(b > a)) throw SimulationError("ground window must have positive length");
}

namespace {

using States = std::vector<StateVector>;

struct Stepper {
    const StarCircuit& c;
    std::span<const Waveform> stim;
    bool capacitive;
    double node_charge;
    std::vector<double> vs; // scratch

    void sources_at(double t) {
        vs.resize(stim.size());
        for (std::size_t i = 0; i < stim.size(); ++i) vs[i] = value_at(stim[i], t);
    }

    double output(const States& s, bool grounded) const {
        if (grounded) return 0.0;
        double num = capacitive ? node_charge : 0.0;
        double den = 0.0;
        for (std::size_t k = 0; k < s.size(); ++k) {
            const auto& b = c.branches[k];
            double w = admittance(b.params, unpack(b.params, clamp_state(b.params, s[k])));
            num += w * vs[b.source];
            den += w;
        }
        if (!(den > 0) || !std::isfinite(den) || !std::isfinite(num))
            throw SimulationError(fmt::format(
                "singular network at node '{}': total branch admittance {}", c.output, den));
        return num / den;
    }

    void rates(double t, const States& s, bool grounded, States& out) {
        sources_at(t);
        double vy = output(s, grounded);
        out.resize(s.size());
        for (std::size_t k = 0; k < s.size(); ++k) {
            const auto& b = c.branches[k];
            double u = b.polarity * (vs[b.source] - vy);
            out[k] = state_rate(b.params, s[k], u);
        }
    }

    States rk4(double t, const States& s, double h, bool g) {
        States k1, k2, k3, k4, tmp(s.size());
        auto axpy = [&](const States& d, double a) {
            for (std::size_t i = 0; i < s.size(); ++i)
                tmp[i] = {s[i][0] + a * d[i][0], s[i][1] + a * d[i][1]};
            return tmp;
        };
        rates(t, s, g, k1);
        rates(t + h / 2, axpy(k1, h / 2), g, k2);
        rates(t + h / 2, axpy(k2, h / 2), g, k3);
        rates(t + h, axpy(k3, h), g, k4);
        States out(s.size());
        for (std::size_t i = 0; i < s.size(); ++i)
            for (int j = 0; j < 2; ++j)
                out[i][j] = s[i][j] + h / 6 * (k1[i][j] + 2 * k2[i][j] + 2 * k3[i][j] + k4[i][j]);
        return out;
    }
};

} // namespace

TraceRecord run_transient(const StarCircuit& circuit, std::span<const Waveform> stimuli,
                          double duration, const TransientOptions& opt) {
    circuit.validate(stimuli.size());
    for (const auto& w : stimuli) validate(w);
    if (!(duration > 0) || !std::isfinite(duration))
        throw SimulationError("duration must be positive");

    const std::size_t n = circuit.branches.size();
    Stepper st{circuit, stimuli, is_capacitive(circuit.branches.front().params),
               circuit.initial_node_charge, {}};

    std::vector<double> bps;
    for (const auto& w : stimuli) append_breakpoints(w, 0.0, duration, bps);
    for (const auto& [a, b] : circuit.ground_windows) {
        bps.push_back(a);
        bps.push_back(b);
    }
    bps.push_back(duration);
    std::erase_if(bps, [&](double t) { return t <= 0 || t > duration; });
    std::sort(bps.begin(), bps.end());
    bps.erase(std::unique(bps.begin(), bps.end()), bps.end());

    double max_step = opt.max_step;
    if (!(max_step > 0)) {
        max_step = std::numeric_limits<double>::infinity();
        for (const auto& w : stimuli) max_step = std::min(max_step, preferred_step(w));
        if (!std::isfinite(max_step)) max_step = duration / 1000;
    }
    const double min_step = opt.min_step > 0 ? opt.min_step : duration * 1e-14;

    auto grounded_in = [&](double a, double b) {
        if (circuit.output_grounded) return true;
        double mid = 0.5 * (a + b);
        for (const auto& [g0, g1] : circuit.ground_windows)
            if (mid >= g0 && mid < g1) return true;
        return false;
    };

    States s(n), span(n);
    for (std::size_t k = 0; k < n; ++k) {
        const auto& b = circuit.branches[k];
        s[k] = clamp_state(b.params, pack(b.state));
        span[k] = state_span(b.params);
    }

    TraceRecord tr;
    tr.node_names = circuit.source_names;
    tr.node_names.push_back(circuit.output);
    tr.node_voltage.assign(tr.node_names.size(), {});
    for (const auto& b : circuit.branches) {
        tr.device_names.push_back(b.name);
        tr.device_source.push_back(b.source);
        tr.device_polarity.push_back(b.polarity);
        tr.device_capacitive.push_back(is_capacitive(b.params));
    }
    tr.device_voltage.assign(n, {});
    tr.device_charge.assign(n, {});
    tr.device_current.assign(n, {});
    tr.device_power.assign(n, {});
    tr.device_state.assign(n, {});
    std::vector<bool> at_breakpoint;

    auto record = [&](double t, bool grounded, bool bp) {
        st.sources_at(t);
        double vy = st.output(s, grounded);
        tr.time.push_back(t);
        for (std::size_t i = 0; i < stimuli.size(); ++i) tr.node_voltage[i].push_back(st.vs[i]);
        tr.node_voltage.back().push_back(vy);
        for (std::size_t k = 0; k < n; ++k) {
            const auto& b = circuit.branches[k];
            DeviceState ds = unpack(b.params, s[k]);
            double u = b.polarity * (st.vs[b.source] - vy);
            double w = admittance(b.params, ds);
            tr.device_voltage[k].push_back(u);
            tr.device_state[k].push_back(normalized_state(b.params, ds));
            if (st.capacitive) {
                tr.device_charge[k].push_back(w * u);
                tr.device_current[k].push_back(0.0);
                tr.device_power[k].push_back(0.0);
            } else {
                double i = w * u;
                double q = 0.0;
                if (!tr.device_charge[k].empty()) {
                    std::size_t j = tr.time.size() - 2;
                    q = tr.device_charge[k].back() +
                        0.5 * (tr.device_current[k].back() + i) * (t - tr.time[j]);
                }
                tr.device_charge[k].push_back(q);
                tr.device_current[k].push_back(i);
                tr.device_power[k].push_back(u * i);
            }
        }
        at_breakpoint.push_back(bp);
    };

    auto refresh_node_charge = [&](double t) {
        if (!st.capacitive) return;
        st.sources_at(t);
        double q = 0.0;
        for (std::size_t k = 0; k < n; ++k) {
            const auto& b = circuit.branches[k];
            q -= admittance(b.params, unpack(b.params, s[k])) * st.vs[b.source];
        }
        st.node_charge = q;
    };

    double t = 0.0;
    if (grounded_in(0.0, std::min(max_step, duration) * 1e-6)) refresh_node_charge(0.0);
    record(0.0, grounded_in(0.0, duration * 1e-12), true);

    double h = std::min(max_step, duration);
    std::size_t bp_i = 0;
    std::size_t steps = 0;
    while (t < duration) {
        while (bp_i < bps.size() && bps[bp_i] <= t * (1 + 1e-15)) ++bp_i;
        double next_bp = bp_i < bps.size() ? bps[bp_i] : duration;
        double hmax = std::min(max_step, next_bp - t);
        double hh = std::min(h, hmax);
        bool hits_bp = next_bp - t <= hh * (1 + 1e-12);
        if (hits_bp) hh = next_bp - t;
        bool g = grounded_in(t, t + hh);

        States full = st.rk4(t, s, hh, g);
        States half = st.rk4(t, s, hh / 2, g);
        half = st.rk4(t + hh / 2, half, hh / 2, g);

        double err = 0.0, change = 0.0;
        for (std::size_t k = 0; k < n; ++k) {
            StateVector c = clamp_state(circuit.branches[k].params, half[k]);
            for (int j = 0; j < 2; ++j) {
                if (span[k][j] <= 0) continue;
                err = std::max(err, std::abs(full[k][j] - half[k][j]) / span[k][j]);
                change = std::max(change, std::abs(c[j] - s[k][j]) / span[k][j]);
            }
        }
        bool ok = err <= opt.tolerance && change <= opt.max_state_change;
        if (!ok && hh > min_step) {
            double f = err > opt.tolerance ? 0.9 * std::pow(opt.tolerance / err, 0.2) : 1.0;
            if (change > opt.max_state_change) f = std::min(f, 0.9 * opt.max_state_change / change);
            h = hh * std::clamp(f, 0.1, 0.9);
            ++tr.steps_rejected;
            continue;
        }
        if (!ok && hh <= min_step && err > opt.tolerance * 1e3)
            throw SimulationError(fmt::format("step size underflow at t={} (node '{}')", t,
                                              circuit.output));
        for (std::size_t k = 0; k < n; ++k) s[k] = clamp_state(circuit.branches[k].params, half[k]);
        t = hits_bp ? next_bp : t + hh;
        if (g) refresh_node_charge(t);
        record(t, g, hits_bp);

        double grow = err > 0 ? 0.9 * std::pow(opt.tolerance / err, 0.2) : 2.0;
        h = std::max(hh, h) * std::clamp(grow, 1.0, 2.0);
        if (++steps > opt.max_steps)
            throw SimulationError(fmt::format("step limit exceeded at t={}", t));
    }

    // Capacitive currents from the charge record.
    if (st.capacitive) {
        const std::size_t m = tr.time.size();
        for (std::size_t k = 0; k < n; ++k) {
            auto& q = tr.device_charge[k];
            auto& i = tr.device_current[k];
            for (std::size_t j = 0; j < m; ++j) {
                std::size_t a = j, b = j;
                if (m < 2) break;
                if (j == 0 || (at_breakpoint[j] && j + 1 < m)) {
                    b = j + 1;
                } else if (j + 1 == m) {
                    a = j - 1;
                } else {
                    a = j - 1;
                    b = j + 1;
                }
                i[j] = (q[b] - q[a]) / (tr.time[b] - tr.time[a]);
                tr.device_power[k][j] = tr.device_voltage[k][j] * i[j];
            }
        }
    }

    for (std::size_t k = 0; k < n; ++k)
        tr.final_states.push_back(unpack(circuit.branches[k].params, s[k]));
    return tr;
}

void TraceRecord::write_csv(std::ostream& os) const {
    std::vector<std::string> row{"t"};
    for (const auto& nm : node_names) row.push_back("V(" + nm + ")");
    for (const auto& nm : device_names) row.push_back("I(" + nm + ")");
    for (const auto& nm : device_names) row.push_back("P(" + nm + ")");
    write_csv_row(os, row);
    for (std::size_t j = 0; j < time.size(); ++j) {
        row.clear();
        row.push_back(format_number(time[j]));
        for (const auto& v : node_voltage) row.push_back(format_number(v[j]));
        for (const auto& v : device_current) row.push_back(format_number(v[j]));
        for (const auto& v : device_power) row.push_back(format_number(v[j]));
        write_csv_row(os, row);
    }
}

const ElementPower& PowerReport::element(const std::string& name) const {
    for (const auto& e : elements)
        if (e.name == name) return e;
    throw std::out_of_range("no element named " + name);
}

const std::vector<double>& device_current(const TraceRecord& trace, const std::string& device) {
    for (std::size_t k = 0; k < trace.device_names.size(); ++k)
        if (trace.device_names[k] == device) return trace.device_current[k];
    throw std::out_of_range("no device named " + device);
}

double interpolate(const std::vector<double>& t, const std::vector<double>& v, double at) {
    if (t.empty()) return 0.0;
    if (at <= t.front()) return v.front();
    if (at >= t.back()) return v.back();
    auto it = std::upper_bound(t.begin(), t.end(), at);
    std::size_t i = static_cast<std::size_t>(it - t.begin());
    double ta = t[i - 1], tb = t[i];
    return v[i - 1] + (v[i] - v[i - 1]) * (at - ta) / (tb - ta);
}

PowerReport average_power(const TraceRecord& tr, double t0, double t1) {
    if (!(t1 > t0)) throw SimulationError("power window must have positive length");
    const std::size_t n = tr.device_names.size();
    const std::size_t ns = tr.node_names.size() - 1;
    std::vector<double> dev_e(n, 0.0), dev_v2(n, 0.0), dev_i2(n, 0.0);
    std::vector<double> src_e(ns, 0.0), src_v2(ns, 0.0), src_i2(ns, 0.0);
    std::vector<bool> src_used(ns, false);
    for (std::size_t k = 0; k < n; ++k) src_used[tr.device_source[k]] = true;

    for (std::size_t j = 0; j + 1 < tr.time.size(); ++j) {
        double ta = tr.time[j], tb = tr.time[j + 1];
        double ca = std::max(ta, t0), cb = std::min(tb, t1);
        if (!(cb > ca)) continue;
        double wa = (ca - ta) / (tb - ta), wb = (cb - ta) / (tb - ta);
        auto lerp = [&](const std::vector<double>& x, double w) {
            return x[j] + (x[j + 1] - x[j]) * w;
        };
        double dt = cb - ca;
        std::vector<double> isrc_a(ns, 0.0), isrc_b(ns, 0.0);
        for (std::size_t k = 0; k < n; ++k) {
            double ua = lerp(tr.device_voltage[k], wa), ub = lerp(tr.device_voltage[k], wb);
            double qa = lerp(tr.device_charge[k], wa), qb = lerp(tr.device_charge[k], wb);
            double ia = lerp(tr.device_current[k], wa), ib = lerp(tr.device_current[k], wb);
            std::size_t s = tr.device_source[k];
            int pol = tr.device_polarity[k];
            double va = lerp(tr.node_voltage[s], wa), vb = lerp(tr.node_voltage[s], wb);
            if (tr.device_capacitive[k]) {
                dev_e[k] += 0.5 * (ua + ub) * (qb - qa);
                src_e[s] += 0.5 * (va + vb) * pol * (qb - qa);
            } else {
                dev_e[k] += 0.5 * (ua * ia + ub * ib) * dt;
                src_e[s] += 0.5 * (va * pol * ia + vb * pol * ib) * dt;
            }
            dev_v2[k] += 0.5 * (ua * ua + ub * ub) * dt;
            dev_i2[k] += 0.5 * (ia * ia + ib * ib) * dt;
            isrc_a[s] += pol * ia;
            isrc_b[s] += pol * ib;
        }
        for (std::size_t s = 0; s < ns; ++s) {
            double va = lerp(tr.node_voltage[s], wa), vb = lerp(tr.node_voltage[s], wb);
            src_v2[s] += 0.5 * (va * va + vb * vb) * dt;
            src_i2[s] += 0.5 * (isrc_a[s] * isrc_a[s] + isrc_b[s] * isrc_b[s]) * dt;
        }
    }

    PowerReport rep;
    rep.duration = t1 - t0;
    const double T = rep.duration;
    for (std::size_t s = 0; s < ns; ++s) {
        if (!src_used[s]) continue;
        rep.elements.push_back({tr.node_names[s], "source", src_e[s], src_e[s] / T,
                                std::sqrt(src_v2[s] / T), std::sqrt(src_i2[s] / T)});
        rep.total_energy += src_e[s];
    }
    for (std::size_t k = 0; k < n; ++k)
        rep.elements.push_back({tr.device_names[k], "device", dev_e[k], dev_e[k] / T,
                                std::sqrt(dev_v2[k] / T), std::sqrt(dev_i2[k] / T)});
    return rep;
}

TraceRecord drive_device(const DeviceParams& p, const DeviceState& s, const Waveform& source, double duration,
                         const TransientOptions& options) {
    StarCircuit c;
    c.source_names = {"v"};
    c.branches.push_back({"M1", 0, p, s, 1});
    c.output = "gnd";
    c.output_grounded = true;
    return run_transient(c, std::span<const Waveform>(&source, 1), duration, options);
}

} // namespace memcap
