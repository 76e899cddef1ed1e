#include "memcap/cli.hpp"

#include "memcap/calibration.hpp"
#include "memcap/crossbar.hpp"
#include "memcap/csv.hpp"
#include "memcap/dataset.hpp"
#include "memcap/engine.hpp"
#include "memcap/logic.hpp"
#include "memcap/netlist.hpp"
#include "memcap/trainer.hpp"

#include <CLI11.hpp>
#include <fmt/format.h>
#include <json.hpp>

#include <algorithm>
#include <cctype>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <unistd.h>

#ifndef MEMCAP_DEFAULT_DATA_DIR
#define MEMCAP_DEFAULT_DATA_DIR "data/mnist-subset"
#endif

namespace memcap {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int k_ok = 0;
constexpr int k_failure = 1;
constexpr int k_usage = 2;

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct RunFailure : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::string utc_stamp() {
    std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y%m%dT%H%M%SZ", &tm);
    return buf;
}

/// Results are written to a hidden sibling directory and renamed into place
/// once the command finishes, so a run directory is either complete or absent.
class RunDir {
public:
    RunDir(fs::path final_dir, bool force, std::string command, std::string stamp)
        : final_(std::move(final_dir)), force_(force), stamp_(std::move(stamp)) {
        if (final_.empty()) throw UsageError("output directory must not be empty");
        if (fs::exists(final_) && !force_)
            throw UsageError(fmt::format("output directory '{}' already exists; pass --force to replace it",
                                         final_.string()));
        fs::path parent = final_.has_parent_path() ? final_.parent_path() : fs::path(".");
        fs::create_directories(parent);
        tmp_ = parent / fmt::format(".{}.tmp-{}", final_.filename().string(), ::getpid());
        fs::remove_all(tmp_);
        fs::create_directories(tmp_);
        manifest_["schema"] = 1;
        manifest_["command"] = std::move(command);
        manifest_["stamp"] = stamp_;
        manifest_["artifacts"] = json::array();
        manifest_["results"] = json::object();
    }
    RunDir(const RunDir&) = delete;
    RunDir& operator=(const RunDir&) = delete;
    ~RunDir() {
        if (!committed_) {
            std::error_code ec;
            fs::remove_all(tmp_, ec);
        }
    }

    /// Relative path `<experiment>/<model>/<stamp><suffix>`.
    fs::path path(const std::string& experiment, const std::string& model, const std::string& suffix) const {
        return fs::path(experiment) / model / (stamp_ + suffix);
    }

    std::ofstream open(const fs::path& rel, const std::string& experiment, const std::string& model,
                       const std::string& kind) {
        fs::path full = tmp_ / rel;
        fs::create_directories(full.parent_path());
        std::ofstream os(full);
        if (!os) throw std::runtime_error(fmt::format("cannot write {}", full.string()));
        manifest_["artifacts"].push_back(
            {{"experiment", experiment}, {"model", model}, {"kind", kind}, {"path", rel.generic_string()}});
        return os;
    }

    void copy_in(const fs::path& src, const std::string& name) { fs::copy_file(src, tmp_ / name); }

    json& results() { return manifest_["results"]; }

    void commit() {
        std::ofstream(tmp_ / "manifest.json") << manifest_.dump(2) << '\n';
        if (fs::exists(final_)) fs::remove_all(final_);
        fs::rename(tmp_, final_);
        committed_ = true;
    }

    [[nodiscard]] const fs::path& final_path() const { return final_; }

private:
    fs::path final_;
    fs::path tmp_;
    bool force_;
    std::string stamp_;
    json manifest_;
    bool committed_ = false;
};

struct GateSpec {
    GateKind kind;
    int arity;
    [[nodiscard]] std::string label() const {
        if (kind == GateKind::Xor || kind == GateKind::FullAdder) return std::string(gate_name(kind));
        return fmt::format("{}{}", gate_name(kind), arity);
    }
};

/// "AND3", "NOR2", "XOR", "FA"; a bare AND/OR/NAND/NOR means two inputs.
GateSpec parse_gate_spec(const std::string& s) {
    std::size_t k = 0;
    while (k < s.size() && std::isalpha(static_cast<unsigned char>(s[k]))) ++k;
    GateKind kind;
    try {
        kind = parse_gate_kind(s.substr(0, k));
    } catch (const LogicError&) {
        throw UsageError(fmt::format("unknown gate '{}'", s));
    }
    int arity = kind == GateKind::FullAdder ? 3 : 2;
    if (k < s.size()) {
        auto [p, ec] = std::from_chars(s.data() + k, s.data() + s.size(), arity);
        if (ec != std::errc{} || p != s.data() + s.size()) throw UsageError(fmt::format("unknown gate '{}'", s));
    }
    return {kind, arity};
}

std::vector<std::string> resolve_models(const std::vector<std::string>& names) {
    std::vector<std::string> out = names.empty() ? preset_names() : names;
    for (const auto& n : out) {
        if (n.empty()) throw UsageError("empty model name");
        preset(n); // throws ModelError listing the known names
    }
    return out;
}

std::string levels_text(const std::vector<int>& v) {
    std::string s;
    for (int b : v) s += b < 0 ? 'X' : static_cast<char>('0' + b);
    return s;
}

void write_gate_rows(std::ostream& os, const GateRun& run, const std::string& gate) {
    write_csv_row(os, {"gate", "slot", "inputs", "expected", "levels", "voltages", "pass"});
    for (std::size_t k = 0; k < run.rows.size(); ++k) {
        const auto& r = run.rows[k];
        std::string volts;
        for (std::size_t m = 0; m < r.voltage.size(); ++m) volts += (m ? " " : "") + format_number(r.voltage[m]);
        write_csv_row(os, {gate, std::to_string(k), levels_text(r.inputs), levels_text(r.expected),
                           levels_text(r.level), volts, r.pass ? "1" : "0"});
    }
}

/// t, V<input>..., V<output>... on the union of all sample times.
void write_gate_trace(std::ostream& os, const GateRun& run) {
    std::vector<std::size_t> cols;
    for (int i = 0; i < run.arity; ++i) cols.push_back(static_cast<std::size_t>(i));
    for (std::size_t s : run.output_signals) cols.push_back(s);
    std::vector<double> grid;
    for (std::size_t c : cols)
        for (double t : run.signals[c].t)
            if (t <= run.cycle) grid.push_back(t);
    std::sort(grid.begin(), grid.end());
    grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
    std::vector<std::string> row{"t"};
    for (std::size_t c : cols) row.push_back("V" + run.signals[c].name);
    write_csv_row(os, row);
    for (double t : grid) {
        row.assign(1, format_number(t));
        for (std::size_t c : cols) row.push_back(format_number(interpolate(run.signals[c].t, run.signals[c].v, t)));
        write_csv_row(os, row);
    }
}

void print_truth(std::ostream& out, const GateRun& run, const std::string& gate) {
    out << fmt::format("{} {} (v_p = {} V, t_w = {} s): {}\n", run.model, gate, run.v_p, run.t_w,
                       run.pass ? "PASS" : "FAIL");
    for (const auto& r : run.rows) {
        std::string volts;
        for (double v : r.voltage) volts += fmt::format(" {:8.4f}", v);
        out << fmt::format("  {} -> {} expected {} |{}{}\n", levels_text(r.inputs), levels_text(r.level),
                           levels_text(r.expected), volts, r.pass ? "" : "  <-- mismatch");
    }
}

void write_hazards(std::ostream& os, const HazardReport& h) {
    write_csv_row(os, {"output", "slot", "start_s", "width_s"});
    for (const auto& s : h.spikes)
        write_csv_row(os, {s.output, std::to_string(s.slot), format_number(s.start), format_number(s.width)});
}

void write_power(std::ostream& os, const PowerReport& p) {
    write_csv_row(os, {"element", "kind", "energy_J", "average_power_W", "v_rms_V", "i_rms_A"});
    for (const auto& e : p.elements)
        write_csv_row(os, {e.name, e.kind, format_number(e.energy), format_number(e.average_power),
                           format_number(e.v_rms), format_number(e.i_rms)});
    write_csv_row(os, {"total", "", format_number(p.total_energy), format_number(p.average_power()), "", ""});
}

// ---------------------------------------------------------------------------
// Subcommands

struct Common {
    std::string out = "runs/latest";
    bool force = false;
    std::string stamp;
    std::string config;
    double sample_dt = 0.0;
};

std::unique_ptr<RunDir> open_run(const Common& c, const std::string& command) {
    auto rd = std::make_unique<RunDir>(c.out, c.force, command, c.stamp.empty() ? utc_stamp() : c.stamp);
    if (!c.config.empty()) rd->copy_in(c.config, "config.txt");
    return rd;
}

int cmd_calibrate(const Common& c, const std::vector<std::string>& names, std::ostream& out) {
    auto models = resolve_models(names);
    auto rd = open_run(c, "calibrate");
    bool ok = true;
    out << fmt::format("{:<10} {:>14} {:>14} {:>14} {:>14} {:>9}\n", "model", "min->max", "target", "max->min",
                       "target", "error");
    for (const auto& m : models) {
        const auto& ref = reference_device(m);
        SwitchingTimes st = measure_switching(preset(m), ref.amplitude, ref.width);
        double err = calibration_error(st, ref);
        ok = ok && err <= 0.02;
        out << fmt::format("{:<10} {:>14.6g} {:>14.6g} {:>14.6g} {:>14.6g} {:>8.3f}%{}\n", m, st.min_to_max,
                           ref.min_to_max, st.max_to_min, ref.max_to_min, 100 * err, err <= 0.02 ? "" : "  FAIL");
        auto os = rd->open(rd->path("calibrate", m, ".csv"), "calibrate", m, "calibration");
        write_csv_row(os, {"direction", "amplitude_V", "target_s", "measured_s", "relative_error"});
        auto rel = [](double a, double b) { return std::abs(a - b) / b; };
        write_csv_row(os, {"min_to_max", format_number(ref.amplitude), format_number(ref.min_to_max),
                           format_number(st.min_to_max), format_number(rel(st.min_to_max, ref.min_to_max))});
        write_csv_row(os, {"max_to_min", format_number(-ref.amplitude), format_number(ref.max_to_min),
                           format_number(st.max_to_min), format_number(rel(st.max_to_min, ref.max_to_min))});
        rd->results()[m] = {{"min_to_max", st.min_to_max}, {"max_to_min", st.max_to_min}, {"error", err}};
    }
    rd->commit();
    return ok ? k_ok : k_failure;
}

GateRunOptions gate_options(const Common& c, const DeviceParams& p, std::optional<double> vp,
                            std::optional<double> tw, bool power_point) {
    OperatingPoint op = power_point ? power_operating_point(p) : truth_table_operating_point(p);
    GateRunOptions o;
    o.v_p = vp.value_or(op.v_p);
    o.t_w = tw.value_or(op.t_w);
    if (c.sample_dt > 0) o.transient.max_step = c.sample_dt;
    return o;
}

int cmd_truth_table(const Common& c, const std::vector<std::string>& gates, const std::vector<std::string>& names,
                    std::optional<double> vp, std::optional<double> tw, std::ostream& out) {
    auto models = resolve_models(names);
    std::vector<GateSpec> specs;
    for (const auto& g : gates) specs.push_back(parse_gate_spec(g));
    if (specs.empty()) throw UsageError("no gates given");
    auto rd = open_run(c, "truth-table");
    bool ok = true;
    for (const auto& m : models) {
        DeviceParams p = preset(m);
        auto rows = rd->open(rd->path("truth-table", m, ".csv"), "truth-table", m, "truth");
        bool header = true;
        for (const auto& s : specs) {
            GateCircuit g = build_gate(s.kind, p, s.arity);
            GateRun run = run_truth_table(g, gate_options(c, p, vp, tw, false));
            print_truth(out, run, s.label());
            std::ostringstream tmp;
            write_gate_rows(tmp, run, s.label());
            std::string text = tmp.str();
            rows << (header ? text : text.substr(text.find('\n') + 1));
            header = false;
            auto tr = rd->open(rd->path("truth-table", m, "-" + s.label() + "-trace.csv"), "truth-table", m, "trace");
            write_gate_trace(tr, run);
            rd->results()[m][s.label()] = run.pass;
            ok = ok && run.pass;
        }
    }
    rd->commit();
    return ok ? k_ok : k_failure;
}

int cmd_hazards(const Common& c, const std::string& gate, const std::vector<std::string>& names,
                std::optional<double> vp, double tw, std::ostream& out) {
    auto models = resolve_models(names);
    GateSpec s = parse_gate_spec(gate);
    auto rd = open_run(c, "hazards");
    bool ok = true;
    for (const auto& m : models) {
        DeviceParams p = preset(m);
        GateRun run = run_truth_table(build_gate(s.kind, p, s.arity), gate_options(c, p, vp, tw, false));
        HazardReport h = measure_hazards(run);
        ok = ok && run.pass;
        out << fmt::format("{} {}: worst spike {:.6g} s over {} spikes, {} undefined excursions{}\n", m,
                           s.label(), h.worst, h.spikes.size(), h.excursions, run.pass ? "" : " (truth table FAILED)");
        auto os = rd->open(rd->path("hazards", m, ".csv"), "hazards", m, "hazards");
        write_hazards(os, h);
        auto tr = rd->open(rd->path("hazards", m, "-trace.csv"), "hazards", m, "trace");
        write_gate_trace(tr, run);
        rd->results()[m] = {{"gate", s.label()}, {"worst_s", h.worst}, {"excursions", h.excursions}};
    }
    rd->commit();
    return ok ? k_ok : k_failure;
}

int cmd_power_compare(const Common& c, const std::vector<std::string>& gates, const std::vector<std::string>& names,
                      std::ostream& out) {
    auto models = resolve_models(names);
    std::vector<GateSpec> specs;
    for (const auto& g : gates) specs.push_back(parse_gate_spec(g));
    if (specs.empty()) throw UsageError("no gates given");
    std::string ref = std::find(models.begin(), models.end(), "mohamed") != models.end() ? "mohamed" : models.front();
    auto rd = open_run(c, "power-compare");
    auto os = rd->open(rd->path("power-compare", ref, ".csv"), "power-compare", ref, "power");
    write_csv_row(os, {"gate", "model", "average_power_W", "ratio_to_reference", "below_reference"});
    bool ok = true;
    for (const auto& s : specs) {
        std::vector<std::pair<std::string, GateRun>> runs;
        for (const auto& m : models) {
            DeviceParams p = preset(m);
            GateRun run =
                run_truth_table(build_gate(s.kind, p, s.arity), gate_options(c, p, std::nullopt, std::nullopt, true));
            ok = ok && run.pass;
            runs.emplace_back(m, std::move(run));
        }
        double pref = 0.0;
        for (const auto& [m, r] : runs)
            if (m == ref) pref = r.power.average_power();
        out << fmt::format("{} (reference {}):\n", s.label(), ref);
        for (const auto& [m, r] : runs) {
            double pw = r.power.average_power();
            double ratio = pw / pref;
            bool below = ratio < 1.0;
            out << fmt::format("  {:<10} {:>12.4e} W  x{:<10.4g}{}\n", m, pw, ratio, below ? "  below reference" : "");
            write_csv_row(os, {s.label(), m, format_number(pw), format_number(ratio), below ? "1" : "0"});
            rd->results()[s.label()][m] = {{"average_power_W", pw}, {"ratio", ratio}};
        }
        const auto& refrun = std::find_if(runs.begin(), runs.end(), [&](auto& x) { return x.first == ref; })->second;
        GateCircuit g = build_gate(s.kind, preset(ref), s.arity);
        CmosReference cm = cmos_reference(s.kind, s.arity, g.inverter, refrun.cycle);
        double ratio = cm.average_power / pref;
        out << fmt::format("  {:<10} {:>12.4e} W  x{:<10.4g}\n", "cmos", cm.average_power, ratio);
        write_csv_row(os, {s.label(), "cmos", format_number(cm.average_power), format_number(ratio), ratio < 1 ? "1" : "0"});
        rd->results()[s.label()]["cmos"] = {{"average_power_W", cm.average_power}, {"ratio", ratio}};
    }
    rd->commit();
    return ok ? k_ok : k_failure;
}

fs::path data_dir() {
    if (const char* env = std::getenv("MEMCAP_DATA_DIR"); env && *env) return env;
    return MEMCAP_DEFAULT_DATA_DIR;
}

EncodedSet load_split(std::string_view split, const Encoder& enc, std::size_t limit) {
    Dataset d = load_mnist_split(data_dir(), split);
    if (limit > 0 && limit < d.size()) {
        d.labels.resize(limit);
        d.pixels.resize(limit * d.image_size());
    }
    return encode(d, enc);
}

struct TrainArgs {
    std::string model = "biolek";
    TrainingConfig cfg;
    std::string encoder = "raw";
    std::size_t train_limit = 0;
    std::size_t test_limit = 0;
};

int cmd_train(const Common& c, const TrainArgs& a, std::ostream& out) {
    DeviceParams p = preset(a.model);
    Encoder enc = parse_encoder(a.encoder, a.cfg.input_scale);
    a.cfg.validate(p);
    EncodedSet train_set = load_split("train", enc, a.train_limit);
    EncodedSet test_set = load_split("test", enc, a.test_limit);
    std::size_t rows = train_set.x.empty() ? enc.dimension(Dataset{}) : train_set.x.front().size();
    auto rd = open_run(c, "train");

    IdealModel ideal(rows, 10);
    train(ideal, train_set, a.cfg);
    double baseline = evaluate(ideal, test_set).accuracy;

    Crossbar xb(rows, 10, p, a.cfg.t_read);
    TrainingRun run = train(xb, train_set, a.cfg);
    EvalResult ev = evaluate(xb, test_set);

    auto log = rd->open(rd->path("train", a.model, ".csv"), "train", a.model, "training-log");
    write_training_log(log, run);
    auto ck = rd->open(rd->path("train", a.model, "-crossbar.csv"), "train", a.model, "checkpoint");
    xb.save_csv(ck);

    double test_energy = ev.energy_per_image * static_cast<double>(test_set.size());
    double combined = (run.energy + test_energy) / static_cast<double>(run.presentations + test_set.size());
    json r = {{"model", a.model},
              {"accuracy", ev.accuracy},
              {"baseline_accuracy", baseline},
              {"train_energy_per_image_J", run.energy_per_image()},
              {"test_energy_per_image_J", ev.energy_per_image},
              {"combined_energy_per_image_J", combined},
              {"test_power_mW", 1e3 * ev.energy_per_image / a.cfg.t_read},
              {"epochs", static_cast<int>(run.epochs.size())},
              {"train_examples", train_set.size()},
              {"test_examples", test_set.size()}};
    rd->results()["classifier"][a.model] = r;
    auto js = rd->open(rd->path("train", a.model, ".json"), "train", a.model, "classifier");
    js << r.dump(2) << '\n';
    out << fmt::format("{}: test accuracy {:.2f}% (ideal-weight baseline {:.2f}%), inference energy {:.4g} J/image, "
                       "training energy {:.4g} J/image\n",
                       a.model, 100 * ev.accuracy, 100 * baseline, ev.energy_per_image, run.energy_per_image());
    rd->commit();
    return k_ok;
}

int cmd_evaluate(const Common& c, const std::string& model, const std::string& checkpoint, const std::string& encoder,
                 double scale, double t_read, std::size_t limit, std::ostream& out) {
    DeviceParams p = preset(model);
    Encoder enc = parse_encoder(encoder, scale);
    EncodedSet test_set = load_split("test", enc, limit);
    std::size_t rows = test_set.x.empty() ? 784 : test_set.x.front().size();
    Crossbar xb(rows, 10, p, t_read);
    std::ifstream in(checkpoint);
    if (!in) throw UsageError(fmt::format("cannot open checkpoint '{}'", checkpoint));
    xb.load_csv(in);
    EvalResult ev = evaluate(xb, test_set);
    auto rd = open_run(c, "evaluate");
    auto os = rd->open(rd->path("evaluate", model, ".csv"), "evaluate", model, "predictions");
    write_csv_row(os, {"index", "label", "prediction"});
    for (std::size_t k = 0; k < test_set.size(); ++k)
        write_csv_row(os, {std::to_string(k), std::to_string(test_set.y[k]), std::to_string(ev.predictions[k])});
    json r = {{"model", model},
              {"accuracy", ev.accuracy},
              {"test_energy_per_image_J", ev.energy_per_image},
              {"test_power_mW", 1e3 * ev.energy_per_image / t_read},
              {"test_examples", test_set.size()}};
    rd->results()["classifier"][model] = r;
    auto js = rd->open(rd->path("evaluate", model, ".json"), "evaluate", model, "classifier");
    js << r.dump(2) << '\n';
    out << fmt::format("{}: test accuracy {:.2f}%, inference energy {:.4g} J/image\n", model, 100 * ev.accuracy,
                       ev.energy_per_image);
    rd->commit();
    return k_ok;
}

int simulate_hysteresis(const Common& c, const std::vector<std::string>& names, double amplitude, double freq,
                        double periods, std::ostream& out) {
    std::vector<std::string> models = names.empty() ? std::vector<std::string>{"biolek", "mohamed"} : names;
    resolve_models(models);
    auto rd = open_run(c, "simulate");
    for (const auto& m : models) {
        DeviceParams p = preset(m);
        TransientOptions opt;
        if (c.sample_dt > 0) opt.max_step = c.sample_dt;
        TraceRecord tr = drive_device(p, minimum_state(p), SineSource{amplitude, freq, 0.0, 0.0}, periods / freq, opt);
        auto os = rd->open(rd->path("hysteresis", m, ".csv"), "hysteresis", m, "hysteresis");
        write_csv_row(os, {"t", "v", is_capacitive(p) ? "q" : "i", "rho"});
        const auto& y = is_capacitive(p) ? tr.device_charge[0] : tr.device_current[0];
        for (std::size_t k = 0; k < tr.samples(); ++k)
            write_csv_row(os, {format_number(tr.time[k]), format_number(tr.device_voltage[0][k]), format_number(y[k]),
                               format_number(tr.device_state[0][k])});
        out << fmt::format("{}: {} samples over {} s\n", m, tr.samples(), periods / freq);
    }
    rd->commit();
    return k_ok;
}

int simulate_deck(const Common& c, const std::string& file, std::ostream& out) {
    std::ifstream in(file, std::ios::binary);
    if (!in) throw UsageError(fmt::format("cannot open deck '{}'", file));
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    ElaboratedDeck e;
    try {
        e = elaborate(parse_deck(text));
    } catch (const DeckError& d) {
        throw UsageError(d.format(file));
    }
    auto rd = open_run(c, "simulate");
    bool ok = true;
    if (e.gate) {
        if (c.sample_dt > 0) e.gate_options.transient.max_step = c.sample_dt;
        GateRun run = run_truth_table(*e.gate, e.gate_options);
        std::string label = GateSpec{e.gate->kind, e.gate->arity}.label();
        auto tr = rd->open(rd->path("simulate", e.model, ".csv"), "simulate", e.model, "trace");
        write_gate_trace(tr, run);
        for (const auto& m : e.measures) {
            switch (m.kind) {
            case MeasureKind::Truth: {
                print_truth(out, run, label);
                auto os = rd->open(rd->path("simulate", e.model, "-truth.csv"), "simulate", e.model, "truth");
                write_gate_rows(os, run, label);
                ok = ok && run.pass;
                rd->results()["truth"] = run.pass;
                break;
            }
            case MeasureKind::Hazards: {
                HazardReport h = measure_hazards(run);
                out << fmt::format("hazards: worst spike {:.6g} s, {} undefined excursions\n", h.worst, h.excursions);
                auto os = rd->open(rd->path("simulate", e.model, "-hazards.csv"), "simulate", e.model, "hazards");
                write_hazards(os, h);
                rd->results()["hazards_worst_s"] = h.worst;
                break;
            }
            case MeasureKind::Power: {
                PowerReport p = run.power;
                if (m.from || m.to) {
                    double t0 = m.from.value_or(0.0), t1 = m.to.value_or(run.cycle);
                    p = PowerReport{};
                    p.duration = t1 - t0;
                    for (const auto& st : run.stage_traces) {
                        PowerReport part = average_power(st, t0, t1);
                        for (auto& el : part.elements) p.elements.push_back(el);
                        p.total_energy += part.total_energy;
                    }
                }
                out << fmt::format("power: {:.6g} W average, {:.6g} J over {:.6g} s\n", p.average_power(),
                                   p.total_energy, p.duration);
                auto os = rd->open(rd->path("simulate", e.model, "-power.csv"), "simulate", e.model, "power");
                write_power(os, p);
                rd->results()["average_power_W"] = p.average_power();
                break;
            }
            }
        }
    } else {
        const Crossbar& xb = *e.crossbar;
        std::vector<double> v = xb.infer(e.crossbar_input);
        PowerReport p = xb.energy_of_inference(e.crossbar_input);
        auto os = rd->open(rd->path("simulate", e.model, ".csv"), "simulate", e.model, "crossbar");
        write_csv_row(os, {"column", "output_V", "energy_J"});
        for (std::size_t j = 0; j < v.size(); ++j) {
            write_csv_row(os, {std::to_string(j), format_number(v[j]), format_number(p.elements[j].energy)});
            out << fmt::format("column {}: {:.9g} V\n", j, v[j]);
        }
        for (const auto& m : e.measures)
            if (m.kind == MeasureKind::Power)
                out << fmt::format("power: {:.6g} J per read ({:.6g} W over {:.6g} s)\n", p.total_energy,
                                   p.average_power(), p.duration);
        rd->results()["outputs_V"] = v;
        rd->results()["energy_J"] = p.total_energy;
    }
    rd->commit();
    return ok ? k_ok : k_failure;
}

/// Checks that every row of a CSV has the header's width.
void check_csv(const fs::path& p) {
    std::ifstream in(p);
    if (!in) throw RunFailure(fmt::format("missing artifact {}", p.string()));
    std::string line;
    if (!std::getline(in, line)) throw RunFailure(fmt::format("empty artifact {}", p.string()));
    bool comment = line.rfind("#", 0) == 0;
    std::size_t width = split_csv_line(line).size();
    std::size_t n = 0;
    while (std::getline(in, line)) {
        auto cells = split_csv_line(line);
        if (comment) {
            width = cells.size();
            comment = false;
        } else if (cells.size() != width) {
            throw RunFailure(fmt::format("{}:{}: expected {} fields, found {}", p.string(), n + 2, width, cells.size()));
        }
        ++n;
    }
}

int cmd_report(const Common& c, const std::string& run_dir, std::ostream& out) {
    fs::path root(run_dir);
    fs::path mpath = root / "manifest.json";
    if (!fs::is_directory(root)) throw RunFailure(fmt::format("run directory '{}' does not exist", run_dir));
    if (!fs::exists(mpath)) throw RunFailure(fmt::format("'{}' holds no manifest.json; not a completed run", run_dir));
    json m;
    try {
        std::ifstream(mpath) >> m;
    } catch (const json::exception& e) {
        throw RunFailure(fmt::format("corrupt manifest in '{}': {}", run_dir, e.what()));
    }
    if (!m.contains("artifacts") || !m["artifacts"].is_array() || m["artifacts"].empty())
        throw RunFailure(fmt::format("run '{}' lists no artifacts", run_dir));
    static const std::map<std::string, std::string> figure{{"hysteresis", "fig1-hysteresis"},
                                                           {"trace", "fig6-timing"},
                                                           {"hazards", "fig7-hazards"},
                                                           {"power", "fig8-gate-power"},
                                                           {"training-log", "fig9-training"}};
    auto rd = open_run(c, "report");
    json summary = {{"schema", 1}, {"source", fs::absolute(root).string()}, {"command", m.value("command", "")},
                    {"figures", json::array()}, {"results", m.value("results", json::object())}};
    json table4 = json::array();
    for (const auto& a : m["artifacts"]) {
        std::string kind = a.value("kind", ""), rel = a.value("path", ""), model = a.value("model", "");
        fs::path src = root / rel;
        if (rel.empty()) throw RunFailure("manifest entry without a path");
        if (fs::path(rel).extension() == ".csv") check_csv(src);
        else if (!fs::exists(src)) throw RunFailure(fmt::format("missing artifact {}", src.string()));
        if (kind == "classifier") {
            json r;
            try {
                std::ifstream(src) >> r;
            } catch (const json::exception& e) {
                throw RunFailure(fmt::format("corrupt artifact {}: {}", src.string(), e.what()));
            }
            table4.push_back(r);
            continue;
        }
        auto it = figure.find(kind);
        if (it == figure.end()) continue;
        std::string stem = fs::path(rel).stem().string();
        fs::path dst = fs::path("figures") / fmt::format("{}-{}-{}.csv", it->second, model, stem);
        auto os = rd->open(dst, "report", model, kind);
        std::ifstream in(src);
        os << in.rdbuf();
        summary["figures"].push_back({{"figure", it->second}, {"model", model}, {"path", dst.generic_string()}});
    }
    if (!table4.empty()) {
        auto os = rd->open("figures/table4-classifier.csv", "report", "all", "classifier-table");
        write_csv_row(os, {"model", "accuracy_percent", "baseline_percent", "crossbar_mW"});
        for (const auto& r : table4)
            write_csv_row(os, {r.value("model", ""), format_number(100 * r.value("accuracy", 0.0)),
                               r.contains("baseline_accuracy") ? format_number(100 * r.value("baseline_accuracy", 0.0)) : "",
                               format_number(r.value("test_power_mW", 0.0))});
        summary["figures"].push_back({{"figure", "table4-classifier"}, {"path", "figures/table4-classifier.csv"}});
    }
    auto js = rd->open("summary.json", "report", "all", "summary");
    js << summary.dump(2) << '\n';
    out << fmt::format("report: {} figure files written to {}\n", summary["figures"].size(), c.out);
    rd->commit();
    return k_ok;
}

} // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Memcapacitive and memristive circuit simulator"};
    app.require_subcommand(1);
    app.fallthrough();
    app.set_config("--config", "", "Flat key=value file with option values; copied into the output directory");

    Common common;
    auto add_common = [&](CLI::App* s) {
        s->add_option("-o,--out", common.out, "Output directory (created atomically)");
        s->add_flag("--force", common.force, "Replace an existing output directory");
        s->add_option("--stamp", common.stamp, "File stem for outputs (default: UTC time)");
        s->add_option("--sample-dt", common.sample_dt, "Largest integrator step (s)")->check(CLI::PositiveNumber);
    };

    std::vector<std::string> models, gates;
    std::optional<double> vp, tw;

    auto* cal = app.add_subcommand("calibrate", "Single-pulse switching times against the reference table");
    cal->add_option("models", models, "Model names (default: all)");
    add_common(cal);

    auto* tt = app.add_subcommand("truth-table", "Exhaustive gate truth tables");
    tt->add_option("--gates", gates, "Gates such as AND2,OR3,NAND2,XOR,FA")->delimiter(',');
    tt->add_option("--models", models, "Models (default: all)")->delimiter(',');
    tt->add_option("--vp", vp, "Pulse amplitude (V)");
    tt->add_option("--tw", tw, "Pulse width (s)");
    add_common(tt);

    std::string hz_gate = "AND3";
    double hz_tw = 500e-6;
    auto* hz = app.add_subcommand("hazards", "Dynamic hazard spike widths");
    hz->add_option("--gate", hz_gate, "Gate (default AND3)");
    hz->add_option("--models", models, "Models (default: biolek)")->delimiter(',');
    hz->add_option("--vp", vp, "Pulse amplitude (V)");
    hz->add_option("--tw", hz_tw, "Pulse width (s, default 500e-6)");
    add_common(hz);

    bool models_given = false;
    auto* pc = app.add_subcommand("power-compare", "Average gate power normalized to the Mohamed gate");
    pc->add_option("--gates", gates, "Gates (default AND2,OR2)")->delimiter(',');
    auto* pc_models = pc->add_option("--models", models, "Models (default: all)")->delimiter(',');
    pc_models->expected(0, -1);
    add_common(pc);

    TrainArgs ta;
    auto* tr = app.add_subcommand("train", "Train a crossbar classifier on the MNIST subset");
    tr->add_option("--model", ta.model, "Device model (default biolek)");
    tr->add_option("--epochs", ta.cfg.epochs, "Epochs")->check(CLI::NonNegativeNumber);
    tr->add_option("--seed", ta.cfg.seed, "Shuffle seed");
    tr->add_option("--alpha", ta.cfg.alpha, "Learning rate");
    tr->add_option("--v-offset", ta.cfg.v_offset, "Target offset (V)");
    tr->add_option("--margin", ta.cfg.margin, "Target margin (V)");
    tr->add_option("--vw", ta.cfg.v_w, "Largest update amplitude (V)");
    tr->add_option("--tw", ta.cfg.t_w, "Update pulse width (s)");
    tr->add_option("--input-scale", ta.cfg.input_scale, "Voltage of a full-intensity pixel");
    tr->add_option("--t-read", ta.cfg.t_read, "Memristive read window (s)");
    tr->add_option("--encoder", ta.encoder, "raw or patch<k>");
    tr->add_option("--train-limit", ta.train_limit, "Use only the first N training images");
    tr->add_option("--test-limit", ta.test_limit, "Use only the first N test images");
    add_common(tr);

    std::string ev_model = "biolek", ev_ckpt, ev_enc = "raw";
    double ev_scale = 0.5, ev_tread = 250e-6;
    std::size_t ev_limit = 0;
    auto* ev = app.add_subcommand("evaluate", "Evaluate a crossbar checkpoint on the test split");
    ev->add_option("--model", ev_model, "Device model of the checkpoint");
    ev->add_option("--checkpoint", ev_ckpt, "Crossbar checkpoint CSV")->required();
    ev->add_option("--encoder", ev_enc, "raw or patch<k>");
    ev->add_option("--input-scale", ev_scale, "Voltage of a full-intensity pixel");
    ev->add_option("--t-read", ev_tread, "Memristive read window (s)");
    ev->add_option("--test-limit", ev_limit, "Use only the first N test images");
    add_common(ev);

    std::string target;
    double hy_amp = 2.4, hy_freq = 1.0, hy_periods = 2.0;
    auto* sim = app.add_subcommand("simulate", "Run a deck file or the built-in 'hysteresis' experiment");
    sim->add_option("target", target, "Deck path or 'hysteresis'")->required();
    sim->add_option("--models", models, "Models for built-in experiments")->delimiter(',');
    sim->add_option("--amplitude", hy_amp, "Sine amplitude (V)");
    sim->add_option("--freq", hy_freq, "Sine frequency (Hz)")->check(CLI::PositiveNumber);
    sim->add_option("--periods", hy_periods, "Number of periods")->check(CLI::PositiveNumber);
    add_common(sim);

    std::string run_dir;
    auto* rep = app.add_subcommand("report", "Summarize a completed run into plot-ready CSV and JSON");
    rep->add_option("run", run_dir, "Run directory")->required();
    add_common(rep);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return k_ok;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return k_ok;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << '\n';
        if (auto* s = app.get_subcommands().empty() ? nullptr : app.get_subcommands().front())
            err << s->help();
        else
            err << app.help();
        return k_usage;
    }
    if (auto* opt = app.get_config_ptr(); opt && opt->count() > 0) common.config = opt->as<std::string>();
    models_given = pc_models->count() > 0;

    try {
        if (cal->parsed()) return cmd_calibrate(common, models, out);
        if (tt->parsed()) {
            if (gates.empty()) gates = {"AND2", "OR2", "AND3", "OR3", "NAND2", "NOR2", "NAND3", "NOR3", "XOR", "FA"};
            return cmd_truth_table(common, gates, models, vp, tw, out);
        }
        if (hz->parsed()) {
            if (models.empty()) models = {"biolek"};
            return cmd_hazards(common, hz_gate, models, vp, hz_tw, out);
        }
        if (pc->parsed()) {
            if (models_given && models.empty()) throw UsageError("--models needs at least one model");
            if (gates.empty()) gates = {"AND2", "OR2"};
            return cmd_power_compare(common, gates, models, out);
        }
        if (tr->parsed()) return cmd_train(common, ta, out);
        if (ev->parsed()) return cmd_evaluate(common, ev_model, ev_ckpt, ev_enc, ev_scale, ev_tread, ev_limit, out);
        if (sim->parsed()) {
            if (target == "hysteresis") return simulate_hysteresis(common, models, hy_amp, hy_freq, hy_periods, out);
            return simulate_deck(common, target, out);
        }
        if (rep->parsed()) return cmd_report(common, run_dir, out);
    } catch (const UsageError& e) {
        err << "error: " << e.what() << '\n';
        return k_usage;
    } catch (const ModelError& e) {
        err << "error: " << e.what() << '\n';
        return k_usage;
    } catch (const DatasetError& e) {
        err << "error: " << e.what() << '\n';
        return k_usage;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return k_failure;
    }
    return k_usage;
}

int run_cli(int argc, const char* const* argv) { return run_cli(argc, argv, std::cout, std::cerr); }

} // namespace memcap
