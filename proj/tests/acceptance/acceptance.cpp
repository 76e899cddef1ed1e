// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fail.

#include "oracles.hpp"

#include "memcap/calibration.hpp"
#include "memcap/crossbar.hpp"
#include "memcap/engine.hpp"
#include "memcap/logic.hpp"
#include "memcap/trainer.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

using namespace memcap;

namespace {

// Tolerances.
constexpr double kCalibrationTolerance = 0.02;   // relative
constexpr double kOriginCharge = 1e-15;          // C
constexpr double kHazardTolerance = 0.25;        // relative
constexpr double kAnd3Hazard = 0.8e-6;           // s
constexpr double kNor3Hazard = 0.6e-6;           // s
constexpr double kOracleTolerance = 1e-12;       // relative
constexpr int kOracleCrossbars = 100;
constexpr double kAccuracyGap = 0.05;            // fraction
constexpr double kBaselineFloor = 0.80;          // fraction
constexpr double kEnergyRatio = 100.0;
constexpr int kPropertyCases = 1000;

struct Outcome {
    bool pass = false;
    std::string detail;
};

using Rng = std::mt19937_64;
double uniform(Rng& r, double a, double b) { return std::uniform_real_distribution<double>(a, b)(r); }
std::size_t index(Rng& r, std::size_t n) { return std::uniform_int_distribution<std::size_t>(0, n - 1)(r); }

std::string checkpoint(const Crossbar& xb) {
    std::ostringstream os;
    xb.save_csv(os);
    return os.str();
}

Outcome calibration() {
    double worst = 0.0;
    std::string name;
    for (const auto& ref : reference_devices()) {
        double e = calibration_error(measure_switching(preset(ref.name), ref.amplitude, ref.width), ref);
        if (!(e <= worst)) {
            worst = e;
            name = ref.name;
        }
    }
    return {worst <= kCalibrationTolerance, fmt::format("worst relative error {:.3g}% ({})", 100 * worst, name)};
}

Outcome hysteresis() {
    bool ok = true;
    std::string detail;
    for (const char* m : {"biolek", "mohamed"}) {
        DeviceParams p = preset(m);
        TraceRecord tr = drive_device(p, minimum_state(p), SineSource{2.4, 1.0, 0.0, 0.0}, 2.0);
        const auto& v = tr.device_voltage[0];
        const auto& q = tr.device_charge[0];
        double area = 0.0, lobe = 0.0, worst_q = 0.0;
        int zeros = 0;
        for (std::size_t k = 1; k < tr.samples(); ++k) {
            lobe += 0.5 * (q[k] + q[k - 1]) * (v[k] - v[k - 1]);
            if (v[k] == 0.0 || (v[k - 1] != 0.0 && std::signbit(v[k]) != std::signbit(v[k - 1]))) {
                // Charge at the crossing, interpolated if it falls between samples.
                double qz = v[k] == 0.0 ? q[k] : q[k - 1] + (q[k] - q[k - 1]) * v[k - 1] / (v[k - 1] - v[k]);
                worst_q = std::max(worst_q, std::abs(qz));
                area += std::abs(lobe);
                lobe = 0.0;
                ++zeros;
            }
        }
        area += std::abs(lobe);
        // Both ends of the run sit on zero crossings of the drive as well.
        worst_q = std::max({worst_q, std::abs(q.front()), std::abs(q.back())});
        ok = ok && zeros == 3 && worst_q < kOriginCharge && area > 0.0;
        detail += fmt::format("{}: {} interior crossings, max |q| {:.2e} C, lobe area {:.4e} C*V; ", m, zeros, worst_q, area);
    }
    detail += fmt::format("ideal Biolek lobes {:.4e} C*V", 4 * oracle::biolek_lobe_area(biolek_default()));
    return {ok, detail};
}

struct GateCase {
    GateKind kind;
    int arity;
};
const std::vector<GateCase> kGates{{GateKind::And, 2}, {GateKind::And, 3}, {GateKind::Or, 2},
                                   {GateKind::Or, 3},  {GateKind::Nand, 2}, {GateKind::Nor, 2},
                                   {GateKind::Xor, 2}, {GateKind::FullAdder, 3}};

Outcome truth_tables() {
    int gates = 0, failed = 0;
    std::string first;
    for (const auto& m : preset_names()) {
        DeviceParams p = preset(m);
        OperatingPoint op = truth_table_operating_point(p);
        for (const auto& g : kGates) {
            GateRun run = run_truth_table(build_gate(g.kind, p, g.arity), op.v_p, op.t_w);
            bool ok = run.rows.size() == (1u << g.arity);
            for (const auto& row : run.rows) ok = ok && row.level == oracle::boolean(g.kind, row.inputs);
            ++gates;
            if (!ok) {
                ++failed;
                if (first.empty()) first = fmt::format(" first failure {}{} on {}", gate_name(g.kind), g.arity, m);
            }
        }
    }
    return {failed == 0, fmt::format("{} of {} gate/model tables exact{}", gates - failed, gates, first)};
}

Outcome hazards() {
    DeviceParams p = preset("biolek");
    double a = measure_hazards(run_truth_table(build_gate(GateKind::And, p, 3), 2.4, 500e-6)).worst;
    double n = measure_hazards(run_truth_table(build_gate(GateKind::Nor, p, 3), 2.4, 500e-6)).worst;
    bool ok = std::abs(a - kAnd3Hazard) <= kHazardTolerance * kAnd3Hazard &&
              std::abs(n - kNor3Hazard) <= kHazardTolerance * kNor3Hazard;
    return {ok, fmt::format("AND3 {:.3f} us (target 0.8), NOR3 {:.3f} us (target 0.6)", a * 1e6, n * 1e6)};
}

Outcome power_ordering() {
    bool ok = true;
    std::string detail;
    for (GateKind k : {GateKind::And, GateKind::Or}) {
        auto power = [&](const std::string& m) {
            DeviceParams p = preset(m);
            OperatingPoint op = power_operating_point(p);
            return run_truth_table(build_gate(k, p, 2), op.v_p, op.t_w).power.average_power();
        };
        double ref = power("mohamed");
        detail += fmt::format("{}2:", gate_name(k));
        for (const char* m : {"chang", "oblea", "sheridan"}) {
            double ratio = power(m) / ref;
            ok = ok && ratio > 1.0;
            detail += fmt::format(" {} x{:.4g}", m, ratio);
        }
        detail += "; ";
    }
    return {ok, detail};
}

Outcome crossbar_oracle() {
    Rng r(20240601);
    double worst = 0.0;
    bool zeros = true;
    auto names = preset_names();
    for (int k = 0; k < kOracleCrossbars; ++k) {
        DeviceParams p = preset(names[index(r, names.size())]);
        std::size_t rows = 1 + index(r, 16), cols = 1 + index(r, 8);
        Crossbar blank(rows, cols, p);
        Crossbar xb(rows, cols, p);
        for (std::size_t i = 0; i < rows; ++i)
            for (std::size_t j = 0; j < cols; ++j) xb.set_state(i, j, state_at(p, uniform(r, 0, 1)));
        std::vector<double> v(rows);
        for (double& x : v) x = uniform(r, -0.99, 0.99) * threshold(p);
        auto got = xb.infer(v);
        auto want = oracle::crossbar_outputs(xb, v);
        for (std::size_t j = 0; j < cols; ++j) {
            // Relative to the column full-scale swing so near-cancelling
            // sums are judged on their rounding scale.
            double scale = 0.0;
            for (std::size_t i = 0; i < rows; ++i) scale += std::abs(v[i]) * xb.kappa_max();
            scale /= xb.output_capacitance(j);
            worst = std::max(worst, std::abs(got[j] - want[j]) / std::max(std::abs(want[j]), scale));
        }
        for (double o : blank.infer(v)) zeros = zeros && o == 0.0;
    }
    return {worst <= kOracleTolerance && zeros,
            fmt::format("{} crossbars, worst relative error {:.2e}, all-minimum outputs {}", kOracleCrossbars, worst,
                        zeros ? "exactly 0" : "NONZERO")};
}

struct Classifier {
    double baseline = 0.0;
    double device = 0.0;
    WeightMatrix weights;
};

const Classifier& classifier() {
    static Classifier c = [] {
        Dataset tr = load_mnist_split(MEMCAP_TEST_DATA_DIR, "train");
        Dataset te = load_mnist_split(MEMCAP_TEST_DATA_DIR, "test");
        EncodedSet xtr = encode(tr, Encoder{}), xte = encode(te, Encoder{});
        TrainingConfig cfg;
        IdealModel ideal(784, 10);
        train(ideal, xtr, cfg);
        Crossbar xb(784, 10, preset("biolek"));
        train(xb, xtr, cfg);
        return Classifier{evaluate(ideal, xte).accuracy, evaluate(xb, xte).accuracy, ideal.w};
    }();
    return c;
}

Outcome classifier_accuracy() {
    const Classifier& c = classifier();
    bool ok = std::abs(c.device - c.baseline) <= kAccuracyGap && c.baseline > kBaselineFloor;
    return {ok, fmt::format("Biolek crossbar {:.1f}%, ideal baseline {:.1f}%", 100 * c.device, 100 * c.baseline)};
}

Outcome energy_ratio() {
    EncodedSet xte = encode(load_mnist_split(MEMCAP_TEST_DATA_DIR, "test"), Encoder{});
    const WeightMatrix& w = classifier().weights;
    Crossbar cap(784, 10, preset("biolek")), res(784, 10, preset("chang"));
    cap.program(w, 1e-3);
    res.program(w, 1e-3);
    double ec = evaluate(cap, xte).energy_per_image;
    double er = evaluate(res, xte).energy_per_image;
    return {er / ec >= kEnergyRatio,
            fmt::format("Chang {:.3e} J, Biolek {:.3e} J per image, ratio {:.0f}", er, ec, er / ec)};
}

Outcome properties() {
    auto names = preset_names();
    std::vector<std::pair<std::string, std::function<bool(Rng&)>>> props;
    auto random_xb = [&](Rng& r, const DeviceParams& p) {
        Crossbar xb(1 + index(r, 8), 1 + index(r, 6), p);
        for (std::size_t i = 0; i < xb.rows(); ++i)
            for (std::size_t j = 0; j < xb.cols(); ++j) xb.set_state(i, j, state_at(p, uniform(r, 0, 1)));
        return xb;
    };
    auto inputs = [](Rng& r, std::size_t n, double vth) {
        std::vector<double> v(n);
        for (double& x : v) x = uniform(r, -0.99, 0.99) * vth;
        return v;
    };
    props.emplace_back("state clamping", [&](Rng& r) {
        DeviceParams p = preset(names[index(r, names.size())]);
        double v = uniform(r, -4, 4) * threshold(p);
        double t = full_range_time(p, std::abs(v) > threshold(p) ? v : 2 * threshold(p)) * uniform(r, 0.01, 5);
        double rho = normalized_state(p, integrate(p, state_at(p, uniform(r, 0, 1)), v, t));
        return rho >= 0.0 && rho <= 1.0;
    });
    props.emplace_back("threshold inertness", [&](Rng& r) {
        DeviceParams p = preset(names[index(r, names.size())]);
        DeviceState s = state_at(p, uniform(r, 0, 1));
        return integrate(p, s, uniform(r, -1, 1) * threshold(p), uniform(r, 1e-9, 10)) == s;
    });
    props.emplace_back("inference non-mutation", [&](Rng& r) {
        DeviceParams p = preset(names[index(r, names.size())]);
        Crossbar xb = random_xb(r, p);
        std::string before = checkpoint(xb);
        auto v = inputs(r, xb.rows(), threshold(p));
        (void)xb.infer(v);
        (void)xb.energy_of_inference(v);
        return checkpoint(xb) == before;
    });
    props.emplace_back("update locality", [&](Rng& r) {
        DeviceParams p = preset(names[index(r, names.size())]);
        Crossbar xb = random_xb(r, p);
        Crossbar ref = xb;
        std::size_t ti = index(r, xb.rows()), tj = index(r, xb.cols());
        double v = (index(r, 2) ? 1 : -1) * uniform(r, 1.01, 3) * threshold(p);
        xb.apply_update(ti, tj, v, full_range_time(p, v) * uniform(r, 0.01, 2));
        for (std::size_t i = 0; i < xb.rows(); ++i) {
            if (xb.bias_state(i) != ref.bias_state(i)) return false;
            for (std::size_t j = 0; j < xb.cols(); ++j)
                if ((i != ti || j != tj) && xb.state(i, j) != ref.state(i, j)) return false;
        }
        return true;
    });
    props.emplace_back("bias-column exactness", [&](Rng& r) {
        DeviceParams p = preset(names[index(r, names.size())]);
        Crossbar xb(1 + index(r, 32), 1 + index(r, 10), p);
        for (double o : xb.infer(inputs(r, xb.rows(), threshold(p))))
            if (o != 0.0) return false;
        return true;
    });
    props.emplace_back("fixed-seed determinism", [&](Rng& r) {
        DeviceParams p = preset(names[index(r, names.size())]);
        std::size_t rows = 2 + index(r, 4), cols = 2 + index(r, 3);
        EncodedSet d;
        for (int k = 0; k < 6; ++k) {
            std::vector<double> x(rows);
            for (double& v : x) v = uniform(r, 0, 0.5);
            d.x.push_back(x);
            d.y.push_back(static_cast<int>(index(r, cols)));
        }
        TrainingConfig cfg;
        cfg.epochs = 2;
        cfg.seed = r();
        cfg.v_w = 1.5 * threshold(p);
        Crossbar a(rows, cols, p), b(rows, cols, p);
        TrainingRun ra = train(a, d, cfg), rb = train(b, d, cfg);
        return checkpoint(a) == checkpoint(b) && ra.energy == rb.energy;
    });

    bool ok = true;
    std::string detail;
    for (auto& [name, prop] : props) {
        int passed = 0;
        for (int k = 0; k < kPropertyCases; ++k) {
            Rng r(static_cast<std::uint64_t>(k) * 7919u + name.size());
            if (prop(r)) ++passed;
        }
        ok = ok && passed == kPropertyCases;
        detail += fmt::format("{} {}/{}; ", name, passed, kPropertyCases);
    }
    return {ok, detail};
}

} // namespace

int main() {
    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
        {"calibration", calibration},
        {"pinched hysteresis", hysteresis},
        {"truth tables", truth_tables},
        {"hazard widths", hazards},
        {"gate power ordering", power_ordering},
        {"crossbar oracle", crossbar_oracle},
        {"classifier accuracy", classifier_accuracy},
        {"inference energy ratio", energy_ratio},
        {"property suites", properties},
    };
    int failed = 0;
    for (std::size_t k = 0; k < criteria.size(); ++k) {
        auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = criteria[k].second();
        } catch (const std::exception& e) {
            o = {false, fmt::format("threw: {}", e.what())};
        }
        double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        fmt::print("{} {}. {}: {} [{:.1f} s]\n", o.pass ? "PASS" : "FAIL", k + 1, criteria[k].first, o.detail, secs);
        std::fflush(stdout);
        if (!o.pass) ++failed;
    }
    fmt::print("{} of {} criteria passed\n", criteria.size() - static_cast<std::size_t>(failed), criteria.size());
    return failed ? 1 : 0;
}
