#include "memcap/trainer.hpp"

#include "memcap/csv.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>

namespace memcap {

void TrainingConfig::validate(const DeviceParams& p) const {
    double vth = threshold(p);
    if (!(alpha >= 0 && std::isfinite(alpha))) throw TrainingError("alpha must be non-negative");
    if (!(t_w > 0 && std::isfinite(t_w))) throw TrainingError("update width must be positive");
    if (!(std::abs(v_w) > vth && std::isfinite(v_w)))
        throw TrainingError(fmt::format("update amplitude {} V must exceed the threshold {} V", v_w, vth));
    if (!(input_scale >= 0 && input_scale < vth))
        throw TrainingError(fmt::format("input scale {} V must stay below the threshold {} V", input_scale, vth));
    if (!(margin >= 0 && std::isfinite(v_offset))) throw TrainingError("invalid target offset or margin");
    if (epochs < 0) throw TrainingError("epoch count must be non-negative");
    if (!(t_read > 0)) throw TrainingError("read window must be positive");
    if (divergence_epochs < 1) throw TrainingError("divergence window must be at least 1");
}

EncodedSet encode(const Dataset& d, const Encoder& e) {
    e.validate(d);
    EncodedSet s;
    s.x.reserve(d.size());
    for (std::size_t k = 0; k < d.size(); ++k) {
        s.x.push_back(e.encode(d, k));
        s.y.push_back(d.labels[k]);
    }
    return s;
}

int argmax(const std::vector<double>& v) {
    int best = 0;
    for (std::size_t j = 1; j < v.size(); ++j)
        if (v[j] > v[static_cast<std::size_t>(best)]) best = static_cast<int>(j);
    return best;
}

std::vector<double> IdealModel::outputs(const std::vector<double>& x) const {
    std::vector<double> o(w.cols, 0.0);
    for (std::size_t i = 0; i < w.rows; ++i) {
        if (x[i] == 0.0) continue;
        for (std::size_t j = 0; j < w.cols; ++j) o[j] += x[i] * w(i, j);
    }
    for (double& v : o) v /= static_cast<double>(w.rows);
    return o;
}

namespace {

std::vector<double> crossbar_outputs(const Crossbar& xb, const std::vector<double>& x) {
    auto v = xb.infer(x);
    for (double& o : v) o = -o;
    return v;
}

void check_shape(std::size_t rows, std::size_t cols, const EncodedSet& data) {
    for (std::size_t k = 0; k < data.size(); ++k) {
        if (data.x[k].size() != rows)
            throw TrainingError(fmt::format("example {} has {} inputs, model has {} rows", k, data.x[k].size(), rows));
        if (data.y[k] < 0 || static_cast<std::size_t>(data.y[k]) >= cols)
            throw TrainingError(fmt::format("example {} has label {} but only {} columns", k, data.y[k], cols));
    }
}

/// Shared epoch loop. `read` returns outputs and the read energy; `update`
/// applies one desired weight change and returns (pulses, energy).
template <class Read, class Update>
EpochStats run_epoch(std::size_t rows, std::size_t cols, const EncodedSet& data, const TrainingConfig& cfg,
                     std::mt19937_64& rng, int epoch, Read read, Update update) {
    check_shape(rows, cols, data);
    std::vector<std::size_t> order(data.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::shuffle(order.begin(), order.end(), rng);
    EpochStats st;
    st.epoch = epoch;
    double err_sum = 0.0;
    std::size_t correct = 0;
    std::vector<double> e(cols);
    for (std::size_t k : order) {
        const auto& x = data.x[k];
        auto [o, read_energy] = read(x);
        st.inference_energy += read_energy;
        if (argmax(o) == data.y[k]) ++correct;
        for (std::size_t j = 0; j < cols; ++j) {
            double target = cfg.v_offset + (static_cast<int>(j) == data.y[k] ? cfg.margin : -cfg.margin);
            e[j] = target - o[j];
            err_sum += std::abs(e[j]);
        }
        if (cfg.alpha == 0.0) continue;
        for (std::size_t i = 0; i < rows; ++i) {
            if (x[i] == 0.0) continue;
            for (std::size_t j = 0; j < cols; ++j) {
                double dw = cfg.alpha * x[i] * e[j];
                if (dw == 0.0) continue;
                auto [pulses, energy] = update(i, j, dw);
                st.pulses += pulses;
                st.update_energy += energy;
            }
        }
    }
    std::size_t n = std::max<std::size_t>(data.size(), 1);
    st.mean_abs_error = err_sum / static_cast<double>(n * cols);
    st.accuracy = static_cast<double>(correct) / static_cast<double>(n);
    return st;
}

template <class Model>
TrainingRun train_loop(Model& m, const EncodedSet& data, const TrainingConfig& cfg) {
    std::mt19937_64 rng(cfg.seed);
    TrainingRun run;
    int rising = 0;
    for (int ep = 1; ep <= cfg.epochs; ++ep) {
        EpochStats st = train_epoch(m, data, cfg, rng, ep);
        run.energy += st.inference_energy + st.update_energy;
        run.presentations += data.size();
        st.cumulative_energy = run.energy;
        if (!std::isfinite(st.mean_abs_error))
            rising = cfg.divergence_epochs;
        else if (!run.epochs.empty() && st.mean_abs_error > run.epochs.back().mean_abs_error)
            ++rising;
        else
            rising = 0;
        run.epochs.push_back(st);
        if (rising >= cfg.divergence_epochs) {
            std::string hist;
            for (const auto& e : run.epochs) hist += fmt::format(" {}:{:.6g}", e.epoch, e.mean_abs_error);
            throw TrainingError(fmt::format(
                "training diverged: mean |e| rose or became non-finite (epoch:mean|e|{})", hist));
        }
    }
    return run;
}

} // namespace

EpochStats train_epoch(Crossbar& xb, const EncodedSet& data, const TrainingConfig& cfg, std::mt19937_64& rng,
                       int epoch) {
    cfg.validate(xb.params());
    const DeviceParams& p = xb.params();
    const double vth = threshold(p);
    const double vmax = std::abs(cfg.v_w);
    auto read = [&](const std::vector<double>& x) {
        return std::pair{crossbar_outputs(xb, x), xb.energy_of_inference(x).total_energy};
    };
    auto update = [&](std::size_t i, std::size_t j, double dw) -> std::pair<std::size_t, double> {
        double w = xb.weight(i, j);
        double goal = std::clamp(w + dw, 0.0, 1.0);
        if (goal == w) return {0, 0.0};
        double d = xb.state_for_weight(goal) - normalized_state(p, xb.state(i, j));
        if (d == 0.0) return {0, 0.0};
        double amp = std::min(vmax, vth + overdrive_for_change(p, d, cfg.t_w));
        return {1, xb.apply_update(i, j, d > 0 ? amp : -amp, cfg.t_w).energy};
    };
    return run_epoch(xb.rows(), xb.cols(), data, cfg, rng, epoch, read, update);
}

EpochStats train_epoch(IdealModel& m, const EncodedSet& data, const TrainingConfig& cfg, std::mt19937_64& rng,
                       int epoch) {
    auto read = [&](const std::vector<double>& x) { return std::pair{m.outputs(x), 0.0}; };
    auto update = [&](std::size_t i, std::size_t j, double dw) -> std::pair<std::size_t, double> {
        double& w = m.w(i, j);
        w += dw;
        if (m.clip) w = std::clamp(w, 0.0, 1.0);
        return {0, 0.0};
    };
    return run_epoch(m.w.rows, m.w.cols, data, cfg, rng, epoch, read, update);
}

TrainingRun train(Crossbar& xb, const EncodedSet& data, const TrainingConfig& cfg) {
    cfg.validate(xb.params());
    return train_loop(xb, data, cfg);
}

TrainingRun train(IdealModel& m, const EncodedSet& data, const TrainingConfig& cfg) {
    return train_loop(m, data, cfg);
}

EvalResult evaluate(const Crossbar& xb, const EncodedSet& data) {
    check_shape(xb.rows(), xb.cols(), data);
    EvalResult r;
    std::size_t correct = 0;
    double energy = 0.0;
    for (std::size_t k = 0; k < data.size(); ++k) {
        int c = argmax(crossbar_outputs(xb, data.x[k]));
        energy += xb.energy_of_inference(data.x[k]).total_energy;
        r.predictions.push_back(c);
        if (c == data.y[k]) ++correct;
    }
    if (data.size()) {
        r.accuracy = static_cast<double>(correct) / static_cast<double>(data.size());
        r.energy_per_image = energy / static_cast<double>(data.size());
    }
    return r;
}

EvalResult evaluate(const IdealModel& m, const EncodedSet& data) {
    check_shape(m.w.rows, m.w.cols, data);
    EvalResult r;
    std::size_t correct = 0;
    for (std::size_t k = 0; k < data.size(); ++k) {
        int c = argmax(m.outputs(data.x[k]));
        r.predictions.push_back(c);
        if (c == data.y[k]) ++correct;
    }
    if (data.size()) r.accuracy = static_cast<double>(correct) / static_cast<double>(data.size());
    return r;
}

void write_training_log(std::ostream& os, const TrainingRun& run) {
    write_csv_row(os, {"epoch", "mean_abs_error", "accuracy", "pulses", "cumulative_energy"});
    for (const auto& e : run.epochs)
        write_csv_row(os, {std::to_string(e.epoch), format_number(e.mean_abs_error), format_number(e.accuracy),
                           std::to_string(e.pulses), format_number(e.cumulative_energy)});
}

} // namespace memcap
