#include "memcap/logic.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fmt/format.h>
#include <map>

namespace memcap {

std::string_view gate_name(GateKind k) {
    switch (k) {
    case GateKind::And: return "AND";
    case GateKind::Or: return "OR";
    case GateKind::Nand: return "NAND";
    case GateKind::Nor: return "NOR";
    case GateKind::Xor: return "XOR";
    case GateKind::FullAdder: return "FA";
    }
    return "?";
}

GateKind parse_gate_kind(std::string_view s) {
    std::string u;
    for (char c : s) u += static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    for (GateKind k : {GateKind::And, GateKind::Or, GateKind::Nand, GateKind::Nor, GateKind::Xor,
                       GateKind::FullAdder})
        if (u == gate_name(k)) return k;
    throw LogicError(fmt::format("unknown gate kind '{}' (expected AND, OR, NAND, NOR, XOR, FA)", s));
}

std::vector<int> expected_outputs(GateKind k, const std::vector<int>& in) {
    int ones = static_cast<int>(std::count(in.begin(), in.end(), 1));
    int n = static_cast<int>(in.size());
    switch (k) {
    case GateKind::And: return {ones == n ? 1 : 0};
    case GateKind::Or: return {ones > 0 ? 1 : 0};
    case GateKind::Nand: return {ones == n ? 0 : 1};
    case GateKind::Nor: return {ones > 0 ? 0 : 1};
    case GateKind::Xor: return {ones % 2};
    case GateKind::FullAdder: return {ones % 2, ones >= 2 ? 1 : 0};
    }
    return {};
}

LogicBands default_bands(double v_p) { return {0.45 * v_p, 0.55 * v_p}; }

int classify(double v, const LogicBands& b) {
    if (v < b.v_lh) return 0;
    if (v > b.v_hl) return 1;
    return -1;
}

OperatingPoint truth_table_operating_point(const DeviceParams& p) {
    double v_p = std::max(2.4, 3.0 * threshold(p));
    switch (kind_of(p)) {
    case DeviceKind::Biolek: return {v_p, 2e-6};
    case DeviceKind::Mohamed: return {v_p, 3.0};
    case DeviceKind::Memristor: return {v_p, 500e-6};
    }
    return {v_p, 500e-6};
}

OperatingPoint power_operating_point(const DeviceParams& p) {
    OperatingPoint op = truth_table_operating_point(p);
    if (kind_of(p) != DeviceKind::Mohamed) op.t_w = 500e-6;
    return op;
}

double gate_output_voltage(const std::vector<double>& v, const std::vector<double>& c) {
    if (v.size() != c.size() || v.size() < 2)
        throw LogicError("gate_output_voltage: need matching lists of at least two entries");
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (!(c[i] > 0)) throw LogicError("gate_output_voltage: capacitances must be positive");
        num += v[i] * c[i];
        den += c[i];
    }
    if (!(den > 0)) throw LogicError("gate_output_voltage: zero total capacitance");
    return num / den;
}

// ---------------------------------------------------------------------------

std::size_t GateCircuit::device_count() const {
    std::size_t n = 0;
    for (const auto& s : stages) n += s.inputs.size();
    return n;
}

void GateCircuit::validate() const {
    auto check_ref = [&](const SignalRef& r, bool driving) {
        switch (r.kind) {
        case SignalRef::Kind::Input:
            if (r.index >= static_cast<std::size_t>(arity)) throw LogicError("gate: bad input ref");
            break;
        case SignalRef::Kind::Stage:
            if (r.index >= stages.size()) throw LogicError("gate: bad stage ref");
            if (driving) throw LogicError("gate: a floating stage output cannot drive a stage");
            break;
        case SignalRef::Kind::Inverter:
            if (r.index >= inverters.size()) throw LogicError("gate: bad inverter ref");
            break;
        }
    };
    if (stages.empty()) throw LogicError("gate: no stages");
    for (const auto& s : stages) {
        if (s.base != GateKind::And && s.base != GateKind::Or)
            throw LogicError("gate: stages must be AND or OR");
        if (s.inputs.size() < 2) throw LogicError("gate: stage needs at least two inputs");
        for (const auto& r : s.inputs) check_ref(r, true);
    }
    for (const auto& i : inverters) check_ref(i.input, false);
    if (outputs.empty() || outputs.size() != output_names.size())
        throw LogicError("gate: outputs and names mismatch");
    for (const auto& r : outputs) check_ref(r, false);
    if (order.size() != stages.size() + inverters.size())
        throw LogicError("gate: evaluation order incomplete");
    if (bands && !(bands->v_lh > 0 && bands->v_hl > bands->v_lh))
        throw LogicError("gate: need 0 < v_lh < v_hl");
}

namespace {

struct Builder {
    GateCircuit g;

    SignalRef input(int i) const { return {SignalRef::Kind::Input, static_cast<std::size_t>(i)}; }

    SignalRef stage(GateKind base, std::vector<SignalRef> in) {
        g.stages.push_back({base, std::move(in)});
        g.order.emplace_back(true, g.stages.size() - 1);
        return {SignalRef::Kind::Stage, g.stages.size() - 1};
    }

    SignalRef inv(SignalRef in) {
        g.inverters.push_back({in});
        g.order.emplace_back(false, g.inverters.size() - 1);
        return {SignalRef::Kind::Inverter, g.inverters.size() - 1};
    }

    SignalRef buf(SignalRef in) { return inv(inv(in)); }
};

void check_arity(GateKind k, int arity) {
    bool ok = false;
    switch (k) {
    case GateKind::And:
    case GateKind::Or: ok = arity >= 2 && arity <= 8; break;
    case GateKind::Nand:
    case GateKind::Nor: ok = arity >= 2 && arity <= 4; break;
    case GateKind::Xor: ok = arity == 2; break;
    case GateKind::FullAdder: ok = arity == 3; break;
    }
    if (!ok) throw LogicError(fmt::format("unsupported arity {} for {}", arity, gate_name(k)));
}

} // namespace

GateCircuit build_gate(GateKind k, const DeviceParams& p, int arity) {
    check_arity(k, arity);
    memcap::validate(p);
    Builder b;
    b.g.kind = k;
    b.g.arity = arity;
    b.g.device = p;
    std::vector<SignalRef> all;
    for (int i = 0; i < arity; ++i) all.push_back(b.input(i));

    switch (k) {
    case GateKind::And:
    case GateKind::Or:
        b.g.outputs = {b.stage(k, all)};
        b.g.output_names = {"y"};
        break;
    case GateKind::Nand:
        b.g.outputs = {b.inv(b.stage(GateKind::And, all))};
        b.g.output_names = {"y"};
        break;
    case GateKind::Nor:
        b.g.outputs = {b.inv(b.stage(GateKind::Or, all))};
        b.g.output_names = {"y"};
        break;
    case GateKind::Xor: {
        SignalRef any = b.buf(b.stage(GateKind::Or, all));
        SignalRef not_both = b.inv(b.stage(GateKind::And, all));
        b.g.outputs = {b.stage(GateKind::And, {any, not_both})};
        b.g.output_names = {"y"};
        break;
    }
    case GateKind::FullAdder: {
        SignalRef x[3] = {all[0], all[1], all[2]};
        SignalRef nx[3] = {b.inv(x[0]), b.inv(x[1]), b.inv(x[2])};
        std::vector<SignalRef> minterms;
        for (int m : {1, 2, 4, 7}) {
            std::vector<SignalRef> lits;
            for (int i = 0; i < 3; ++i) lits.push_back(((m >> (2 - i)) & 1) ? x[i] : nx[i]);
            minterms.push_back(b.buf(b.stage(GateKind::And, lits)));
        }
        SignalRef sum = b.stage(GateKind::Or, minterms);
        std::vector<SignalRef> pairs = {b.buf(b.stage(GateKind::And, {x[0], x[1]})),
                                        b.buf(b.stage(GateKind::And, {x[1], x[2]})),
                                        b.buf(b.stage(GateKind::And, {x[0], x[2]}))};
        SignalRef carry = b.stage(GateKind::Or, pairs);
        b.g.outputs = {sum, carry};
        b.g.output_names = {"sum", "cout"};
        break;
    }
    }
    b.g.validate();
    return b.g;
}

GateCircuit build_composite(GateKind k, const DeviceParams& p, int arity) {
    if (k == GateKind::And || k == GateKind::Or)
        throw LogicError("build_composite: AND and OR are single-stage gates");
    return build_gate(k, p, arity);
}

// ---------------------------------------------------------------------------

namespace {

struct ClassRun {
    double start, end;
    int cls;
};

/// Splits a piecewise-linear signal on [t0, t1] into maximal runs of equal class.
std::vector<ClassRun> class_runs(const SignalTrace& s, double t0, double t1, const LogicBands& b) {
    std::vector<ClassRun> runs;
    auto push = [&](double a, double e, int c) {
        if (!(e > a)) return;
        if (!runs.empty() && runs.back().cls == c && runs.back().end >= a) {
            runs.back().end = e;
        } else {
            runs.push_back({a, e, c});
        }
    };
    for (std::size_t j = 0; j + 1 < s.t.size(); ++j) {
        double ta = s.t[j], tb = s.t[j + 1];
        if (tb <= t0 || ta >= t1 || !(tb > ta)) continue;
        double va = s.v[j], vb = s.v[j + 1];
        std::vector<double> cuts{0.0, 1.0};
        for (double level : {b.v_lh, b.v_hl}) {
            if (vb == va) continue;
            double lam = (level - va) / (vb - va);
            if (lam > 0 && lam < 1) cuts.push_back(lam);
        }
        std::sort(cuts.begin(), cuts.end());
        for (std::size_t c = 0; c + 1 < cuts.size(); ++c) {
            double a = ta + cuts[c] * (tb - ta), e = ta + cuts[c + 1] * (tb - ta);
            double mid = va + 0.5 * (cuts[c] + cuts[c + 1]) * (vb - va);
            push(std::max(a, t0), std::min(e, t1), classify(mid, b));
        }
    }
    return runs;
}

/// Behavioral inverter: output v_p while the input is below threshold.
PwlSource invert(const SignalTrace& in, double thr, double v_p, double edge, double cycle,
                 int& transitions) {
    PwlSource out;
    transitions = 0;
    double cur = in.v.front() < thr ? v_p : 0.0;
    out.t.push_back(0.0);
    out.v.push_back(cur);
    for (std::size_t j = 0; j + 1 < in.t.size(); ++j) {
        double ta = in.t[j], tb = in.t[j + 1];
        if (ta >= cycle) break;
        double va = in.v[j], vb = in.v[j + 1];
        bool low_a = va < thr, low_b = vb < thr;
        if (low_a == low_b) continue;
        double tc = vb == va ? tb : ta + (thr - va) / (vb - va) * (tb - ta);
        tc = std::max(tc, out.t.back());
        if (tc >= cycle) break;
        double next = low_b ? v_p : 0.0;
        out.t.push_back(tc);
        out.v.push_back(cur);
        out.t.push_back(std::min(tc + edge, cycle));
        out.v.push_back(next);
        cur = next;
        ++transitions;
    }
    if (out.t.back() < cycle) {
        out.t.push_back(cycle);
        out.v.push_back(cur);
    }
    return out;
}

PwlSource splice_reset(PwlSource w, double cycle, double amp, double width, double edge) {
    w.t.push_back(cycle + edge);
    w.v.push_back(amp);
    w.t.push_back(cycle + width);
    w.v.push_back(amp);
    w.t.push_back(cycle + width + edge);
    w.v.push_back(0.0);
    return w;
}

SignalTrace trace_of(const PwlSource& w, const std::string& name) { return {name, w.t, w.v}; }

double rms_of_sum(const std::vector<SignalTrace>& parts, double t1) {
    std::vector<double> grid;
    for (const auto& p : parts)
        for (double t : p.t)
            if (t <= t1) grid.push_back(t);
    std::sort(grid.begin(), grid.end());
    grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
    if (grid.size() < 2) return 0.0;
    auto at = [&](double t) {
        double s = 0.0;
        for (const auto& p : parts) s += interpolate(p.t, p.v, t);
        return s;
    };
    double acc = 0.0, prev = at(grid[0]);
    for (std::size_t i = 1; i < grid.size(); ++i) {
        double cur = at(grid[i]);
        acc += 0.5 * (prev * prev + cur * cur) * (grid[i] - grid[i - 1]);
        prev = cur;
    }
    return std::sqrt(acc / (grid.back() - grid.front()));
}

} // namespace

GateRun run_truth_table(const GateCircuit& g, const GateRunOptions& o) {
    g.validate();
    memcap::validate(g.device);
    const double vth = threshold(g.device);
    if (!(o.t_w > 0)) throw LogicError("truth table: pulse width must be positive");
    if (!(o.v_p > 2 * vth))
        throw LogicError(fmt::format("truth table: v_p = {} V must exceed twice the threshold {} V",
                                     o.v_p, vth));
    if (!(o.guard_fraction > 0 && o.guard_fraction < 0.5))
        throw LogicError("truth table: guard fraction must lie in (0, 0.5)");
    const double t_up = full_range_time(g.device, o.v_p);
    const double t_down = full_range_time(g.device, -o.v_p);
    if (!(o.t_w > 0.97 * std::max(t_up, t_down)))
        throw LogicError(fmt::format(
            "truth table: pulse width {} s is shorter than the device switching time {} s", o.t_w,
            0.97 * std::max(t_up, t_down)));

    GateRun run;
    run.kind = g.kind;
    run.arity = g.arity;
    run.model = model_name(g.device);
    run.v_p = o.v_p;
    run.t_w = o.t_w;
    run.bands = g.bands.value_or(default_bands(o.v_p));
    if (!(run.bands.v_lh > 0 && run.bands.v_hl > run.bands.v_lh && run.bands.v_hl < o.v_p))
        throw LogicError("truth table: need 0 < v_lh < v_hl < v_p");

    const int n = g.arity;
    const bool custom = !o.levels.empty();
    if (custom && o.levels.size() != static_cast<std::size_t>(n))
        throw LogicError(fmt::format("truth table: {} input level sequences for a {}-input gate",
                                     o.levels.size(), n));
    const std::size_t slots = custom ? o.levels[0].size() : std::size_t{1} << n;
    if (slots == 0) throw LogicError("truth table: level sequences are empty");
    for (const auto& l : o.levels) {
        if (l.size() != slots) throw LogicError("truth table: level sequences differ in length");
        for (int b : l)
            if (b != 0 && b != 1) throw LogicError("truth table: levels must be 0 or 1");
    }
    auto level = [&](int i, std::size_t k) {
        return custom ? o.levels[i][k] : int((k >> (n - 1 - i)) & 1);
    };
    const double cycle = static_cast<double>(slots) * o.t_w;
    const double edge = o.edge > 0 ? o.edge : o.t_w * 1e-4;
    if (!(edge < 0.1 * o.t_w)) throw LogicError("truth table: edge time must be below 10% of the pulse width");
    std::size_t matched_inits = 0;
    const double reset_width = std::max(1.5 * t_down, 10 * edge);
    run.cycle = cycle;

    static const char* names = "abcdefgh";
    std::vector<PulseTrain> inputs(n);
    for (int i = 0; i < n; ++i) {
        auto& pt = inputs[i];
        pt.amplitude = o.v_p;
        pt.width = o.t_w;
        pt.edge_time = edge;
        for (std::size_t k = 0; k < slots; ++k) pt.levels.push_back(level(i, k));
        std::vector<double> bp;
        pt.breakpoints(bp);
        std::sort(bp.begin(), bp.end());
        bp.erase(std::unique(bp.begin(), bp.end()), bp.end());
        SignalTrace s{std::string(1, names[i]), {}, {}};
        for (double t : bp) {
            s.t.push_back(t);
            s.v.push_back(pt.value(t));
        }
        run.signals.push_back(std::move(s));
    }

    std::vector<std::size_t> stage_sig(g.stages.size()), inv_sig(g.inverters.size());
    std::vector<PwlSource> inv_pwl(g.inverters.size());
    std::vector<int> inv_transitions(g.inverters.size(), 0);
    auto sig_of = [&](const SignalRef& r) -> std::size_t {
        switch (r.kind) {
        case SignalRef::Kind::Input: return r.index;
        case SignalRef::Kind::Stage: return stage_sig[r.index];
        case SignalRef::Kind::Inverter: return inv_sig[r.index];
        }
        return 0;
    };
    auto output_name = [&](const SignalRef& r, const std::string& fallback) {
        for (std::size_t i = 0; i < g.outputs.size(); ++i)
            if (g.outputs[i] == r) return g.output_names[i];
        return fallback;
    };

    // Energy bookkeeping.
    std::vector<double> input_energy(n, 0.0), inv_load(g.inverters.size(), 0.0);
    std::vector<std::vector<SignalTrace>> input_currents(n), inv_currents(g.inverters.size());
    std::vector<ElementPower> devices;

    const bool multi = g.stages.size() > 1;
    for (const auto& [is_stage, idx] : g.order) {
        if (!is_stage) {
            const auto& node = g.inverters[idx];
            const SignalTrace& in = run.signals[sig_of(node.input)];
            inv_pwl[idx] = invert(in, g.inverter.threshold_fraction * o.v_p, o.v_p, edge, cycle,
                                  inv_transitions[idx]);
            SignalRef self{SignalRef::Kind::Inverter, idx};
            run.signals.push_back(trace_of(inv_pwl[idx], output_name(self, fmt::format("N{}", idx + 1))));
            inv_sig[idx] = run.signals.size() - 1;
            continue;
        }
        const MemStage& st = g.stages[idx];
        const int pol = st.base == GateKind::And ? -1 : 1;
        const double reset_amp = st.base == GateKind::And ? o.v_p : -o.v_p;
        StarCircuit c;
        c.output = output_name({SignalRef::Kind::Stage, idx}, fmt::format("X{}", idx + 1));
        std::vector<Waveform> stim;
        for (std::size_t j = 0; j < st.inputs.size(); ++j) {
            const SignalRef& r = st.inputs[j];
            c.source_names.push_back(run.signals[sig_of(r)].name);
            if (r.kind == SignalRef::Kind::Input) {
                PulseTrain pt = inputs[r.index];
                if (o.reset) pt.reset = ResetPulse{reset_amp, reset_width};
                stim.emplace_back(std::move(pt));
            } else {
                PwlSource w = inv_pwl[r.index];
                if (o.reset) w = splice_reset(std::move(w), cycle, reset_amp, reset_width, edge);
                stim.emplace_back(std::move(w));
            }
            std::string dn = multi ? fmt::format("X{}.M{}", idx + 1, j + 1) : fmt::format("M{}", j + 1);
            DeviceState s0 = minimum_state(g.device);
            if (auto it = o.initial_states.find(dn); it != o.initial_states.end()) {
                if (it->second.index() != s0.index())
                    throw LogicError(fmt::format("truth table: initial state of {} has the wrong model", dn));
                s0 = unpack(g.device, clamp_state(g.device, pack(it->second)));
                ++matched_inits;
            }
            c.branches.push_back({dn, j, g.device, s0, pol});
        }
        double duration = cycle;
        if (o.reset) {
            duration = cycle + reset_width + edge;
            c.ground_windows.push_back({cycle, duration + 1.0});
        }
        TransientOptions topt = o.transient;
        if (!(topt.max_step > 0)) topt.max_step = o.t_w / 100;
        TraceRecord tr = run_transient(c, stim, duration, topt);

        SignalTrace out{c.output, {}, {}};
        for (std::size_t j = 0; j < tr.time.size() && tr.time[j] <= cycle; ++j) {
            out.t.push_back(tr.time[j]);
            out.v.push_back(tr.output_voltage()[j]);
        }
        run.signals.push_back(std::move(out));
        stage_sig[idx] = run.signals.size() - 1;

        PowerReport rep = average_power(tr, 0.0, cycle);
        for (std::size_t j = 0; j < st.inputs.size(); ++j) {
            const SignalRef& r = st.inputs[j];
            double e = 0.0;
            for (const auto& el : rep.elements)
                if (el.kind == "source" && el.name == c.source_names[j]) e = el.energy;
            SignalTrace cur{"", tr.time, std::vector<double>(tr.time.size(), 0.0)};
            for (std::size_t k = 0; k < tr.device_names.size(); ++k)
                if (tr.device_source[k] == j)
                    for (std::size_t s = 0; s < tr.time.size(); ++s)
                        cur.v[s] += tr.device_polarity[k] * tr.device_current[k][s];
            if (r.kind == SignalRef::Kind::Input) {
                input_energy[r.index] += e;
                input_currents[r.index].push_back(std::move(cur));
            } else {
                inv_load[r.index] += e;
                inv_currents[r.index].push_back(std::move(cur));
            }
        }
        for (const auto& el : rep.elements)
            if (el.kind == "device") devices.push_back(el);
        for (const auto& s : tr.final_states) run.final_states.push_back(s);
        run.stage_traces.push_back(std::move(tr));
    }

    if (matched_inits != o.initial_states.size()) {
        for (const auto& [name, s] : o.initial_states) {
            bool found = false;
            for (const auto& tr : run.stage_traces)
                for (const auto& d : tr.device_names) found = found || d == name;
            if (!found) throw LogicError(fmt::format("truth table: no device named '{}'", name));
        }
    }

    PowerReport& pr = run.power;
    pr.duration = cycle;
    double inv_total = 0.0;
    for (int i = 0; i < n; ++i) {
        const SignalTrace& v = run.signals[i];
        pr.elements.push_back({v.name, "source", input_energy[i], input_energy[i] / cycle,
                               rms_of_sum({v}, cycle), rms_of_sum(input_currents[i], cycle)});
        pr.total_energy += input_energy[i];
    }
    for (std::size_t j = 0; j < g.inverters.size(); ++j) {
        double e = inv_load[j] + g.inverter.transition_energy * inv_transitions[j] +
                   g.inverter.static_power * cycle;
        pr.elements.push_back({fmt::format("INV{}", j + 1), "inverter", e, e / cycle,
                               rms_of_sum({run.signals[inv_sig[j]]}, cycle),
                               rms_of_sum(inv_currents[j], cycle)});
        pr.total_energy += e;
        inv_total += e;
    }
    for (auto& d : devices) pr.elements.push_back(d);
    run.inverter_fraction = pr.total_energy > 0 ? inv_total / pr.total_energy : 0.0;

    for (const auto& r : g.outputs) run.output_signals.push_back(sig_of(r));

    run.pass = true;
    for (std::size_t k = 0; k < slots; ++k) {
        TruthRow row;
        for (int i = 0; i < n; ++i) row.inputs.push_back(level(i, k));
        row.expected = expected_outputs(g.kind, row.inputs);
        double ts = static_cast<double>(k + 1) * o.t_w - o.guard_fraction * o.t_w;
        row.pass = true;
        for (std::size_t m = 0; m < run.output_signals.size(); ++m) {
            const SignalTrace& s = run.signals[run.output_signals[m]];
            double v = interpolate(s.t, s.v, ts);
            int lvl = classify(v, run.bands);
            row.voltage.push_back(v);
            row.level.push_back(lvl);
            if (lvl != row.expected[m]) row.pass = false;
        }
        run.pass = run.pass && row.pass;
        run.rows.push_back(std::move(row));
    }
    return run;
}

GateRun run_truth_table(const GateCircuit& gate, double v_p, double t_w) {
    GateRunOptions o;
    o.v_p = v_p;
    o.t_w = t_w;
    return run_truth_table(gate, o);
}

HazardReport measure_hazards(const GateRun& run) {
    HazardReport rep;
    const double guard = run.rows.empty() ? 0.0 : 0.01 * run.t_w;
    for (std::size_t idx : run.output_signals) {
        const SignalTrace& s = run.signals[idx];
        auto runs = class_runs(s, 0.0, run.cycle, run.bands);
        for (std::size_t r = 1; r + 1 < runs.size(); ++r)
            if (runs[r].cls == -1 && runs[r - 1].cls != -1 && runs[r + 1].cls != -1) ++rep.excursions;
        for (std::size_t k = 0; k < run.rows.size(); ++k) {
            double t0 = static_cast<double>(k) * run.t_w;
            double ts = static_cast<double>(k + 1) * run.t_w - guard;
            int settled = classify(interpolate(s.t, s.v, ts), run.bands);
            double width = 0.0, start = -1.0;
            for (const auto& cr : runs) {
                double a = std::max(cr.start, t0), e = std::min(cr.end, ts);
                if (!(e > a) || cr.cls == settled) continue;
                width += e - a;
                if (start < 0) start = a;
            }
            if (width > 0) {
                rep.spikes.push_back({s.name, k, start, width});
                rep.worst = std::max(rep.worst, width);
            }
        }
    }
    return rep;
}

CmosReference cmos_reference(GateKind k, int arity, const InverterModel& inv, double cycle) {
    check_arity(k, arity);
    double eq = 0.0;
    switch (k) {
    case GateKind::Nand:
    case GateKind::Nor: eq = arity; break;
    case GateKind::And:
    case GateKind::Or: eq = arity + 1; break;
    case GateKind::Xor: eq = 6; break;
    case GateKind::FullAdder: eq = 14; break;
    }
    double slots = std::ldexp(1.0, arity);
    CmosReference r;
    r.equivalents = eq;
    r.energy = eq * (inv.static_power * cycle + inv.transition_energy * slots);
    r.average_power = cycle > 0 ? r.energy / cycle : 0.0;
    return r;
}

} // namespace memcap
