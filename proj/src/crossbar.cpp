#include "memcap/crossbar.hpp"

#include "memcap/csv.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <istream>
#include <ostream>
#include <string>

namespace memcap {

namespace {

double kappa_of(const DeviceParams& p, const DeviceState& s, double t_read) {
    double a = admittance(p, s);
    return is_capacitive(p) ? a : a * t_read;
}

DeviceState clamped(const DeviceParams& p, const DeviceState& s) {
    return unpack(p, clamp_state(p, pack(s)));
}

/// Every model's rate is independent of its state away from the bounds, so a
/// constant pulse moves the state linearly until it clamps.
DeviceState advance(const DeviceParams& p, const DeviceState& s, double v, double t) {
    StateVector x = pack(s);
    StateVector r = state_rate(p, x, v);
    for (std::size_t k = 0; k < x.size(); ++k) x[k] += r[k] * t;
    return unpack(p, clamp_state(p, x));
}

} // namespace

void WeightMatrix::validate() const {
    if (w.size() != rows * cols)
        throw CrossbarError(fmt::format("weight matrix holds {} values, expected {}x{}", w.size(), rows, cols));
    for (std::size_t k = 0; k < w.size(); ++k) {
        if (!(w[k] >= 0.0 && w[k] <= 1.0))
            throw CrossbarError(fmt::format("weight ({}, {}) = {} outside [0, 1]", k / cols, k % cols, w[k]));
    }
}

Crossbar::Crossbar(std::size_t rows, std::size_t cols, DeviceParams params, double t_read, double c_out)
    : rows_(rows), cols_(cols), params_(std::move(params)), t_read_(t_read) {
    if (rows == 0 || cols == 0) throw CrossbarError("crossbar needs at least one row and one column");
    memcap::validate(params_);
    if (!is_capacitive(params_) && !(t_read > 0 && std::isfinite(t_read)))
        throw CrossbarError("read window must be positive");
    if (!(c_out >= 0 && std::isfinite(c_out))) throw CrossbarError("output capacitance must be non-negative");
    DeviceState lo = minimum_state(params_);
    kappa_min_ = kappa_of(params_, lo, t_read_);
    kappa_max_ = kappa_of(params_, maximum_state(params_), t_read_);
    states_.assign(rows * cols, lo);
    bias_.assign(rows, lo);
    kappa_.assign(rows * cols, kappa_min_);
    double c = c_out > 0 ? c_out : static_cast<double>(rows) * (kappa_max_ - kappa_min_);
    c_out_.assign(cols, c);
}

void Crossbar::check_index(std::size_t i, std::size_t j) const {
    if (i >= rows_) throw CrossbarError(fmt::format("row {} out of range (rows = {})", i, rows_));
    if (j == cols_) throw CrossbarError(fmt::format("column {} is the bias column", j));
    if (j > cols_) throw CrossbarError(fmt::format("column {} out of range (cols = {})", j, cols_));
}

const DeviceState& Crossbar::state(std::size_t i, std::size_t j) const {
    if (i < rows_ && j == cols_) return bias_[i];
    check_index(i, j);
    return states_[i * cols_ + j];
}

const DeviceState& Crossbar::bias_state(std::size_t i) const {
    if (i >= rows_) throw CrossbarError(fmt::format("row {} out of range (rows = {})", i, rows_));
    return bias_[i];
}

void Crossbar::set_state(std::size_t i, std::size_t j, const DeviceState& s) {
    check_index(i, j);
    if (s.index() != minimum_state(params_).index()) throw CrossbarError("state does not match the device model");
    states_[i * cols_ + j] = clamped(params_, s);
    refresh(i, j);
}

void Crossbar::refresh(std::size_t i, std::size_t j) {
    kappa_[i * cols_ + j] = kappa_of(params_, states_[i * cols_ + j], t_read_);
}

void Crossbar::set_output_capacitance(std::size_t j, double c) {
    if (j >= cols_) throw CrossbarError(fmt::format("column {} out of range (cols = {})", j, cols_));
    if (!(c > 0 && std::isfinite(c))) throw CrossbarError("output capacitance must be positive");
    c_out_[j] = c;
}

double Crossbar::weight(std::size_t i, std::size_t j) const {
    check_index(i, j);
    return (kappa(i, j) - kappa_min_) / (kappa_max_ - kappa_min_);
}

WeightMatrix Crossbar::weights() const {
    WeightMatrix w(rows_, cols_);
    for (std::size_t k = 0; k < kappa_.size(); ++k) w.w[k] = (kappa_[k] - kappa_min_) / (kappa_max_ - kappa_min_);
    return w;
}

double Crossbar::state_for_weight(double w) const {
    w = std::clamp(w, 0.0, 1.0);
    double target = kappa_min_ + w * (kappa_max_ - kappa_min_);
    switch (kind_of(params_)) {
    case DeviceKind::Biolek:
        return w;
    case DeviceKind::Memristor: {
        const auto& q = std::get<MemristorParams>(params_);
        double r = t_read_ / target;
        return std::clamp((q.r_off - r) / (q.r_off - q.r_on), 0.0, 1.0);
    }
    case DeviceKind::Mohamed:
        break;
    }
    // kappa is monotone in rho for every model; bisection keeps this uniform.
    double lo = 0.0, hi = 1.0;
    for (int it = 0; it < 80; ++it) {
        double mid = 0.5 * (lo + hi);
        if (kappa_of(params_, state_at(params_, mid), t_read_) < target)
            lo = mid;
        else
            hi = mid;
    }
    return 0.5 * (lo + hi);
}

std::vector<double> Crossbar::infer(std::span<const double> v) const {
    if (v.size() != rows_)
        throw CrossbarError(fmt::format("input vector has {} entries, crossbar has {} rows", v.size(), rows_));
    double vth = threshold(params_);
    for (std::size_t i = 0; i < rows_; ++i) {
        if (!std::isfinite(v[i]) || std::abs(v[i]) >= vth)
            throw CrossbarError(
                fmt::format("input {} = {} V is not below the device threshold {} V", i, v[i], vth));
    }
    std::vector<double> out(cols_, 0.0);
    for (std::size_t i = 0; i < rows_; ++i) {
        if (v[i] == 0.0) continue;
        double bias = kappa_of(params_, bias_[i], t_read_);
        const double* row = &kappa_[i * cols_];
        for (std::size_t j = 0; j < cols_; ++j) out[j] += v[i] * (row[j] - bias);
    }
    for (std::size_t j = 0; j < cols_; ++j) out[j] = -out[j] / c_out_[j];
    return out;
}

PowerReport Crossbar::energy_of_inference(std::span<const double> v, std::span<const double> previous) const {
    if (v.size() != rows_)
        throw CrossbarError(fmt::format("input vector has {} entries, crossbar has {} rows", v.size(), rows_));
    if (!previous.empty() && previous.size() != rows_)
        throw CrossbarError("previous input vector has the wrong length");
    PowerReport rep;
    rep.duration = t_read_;
    std::vector<double> col(cols_ + 1, 0.0);
    bool cap = is_capacitive(params_);
    for (std::size_t i = 0; i < rows_; ++i) {
        double vi = v[i];
        double v0 = previous.empty() ? 0.0 : previous[i];
        if (vi == 0.0 && v0 == 0.0) continue;
        auto term = [&](double k) {
            // Capacitive: the driver moves C*(vi - v0) at vi. Resistive: vi^2*G*t.
            return cap ? vi * k * (vi - v0) : vi * vi * k;
        };
        const double* row = &kappa_[i * cols_];
        for (std::size_t j = 0; j < cols_; ++j) col[j] += term(row[j]);
        col[cols_] += term(kappa_of(params_, bias_[i], t_read_));
    }
    for (std::size_t j = 0; j <= cols_; ++j) {
        ElementPower e;
        e.name = j < cols_ ? fmt::format("col{}", j) : std::string("bias");
        e.kind = "source";
        e.energy = col[j];
        e.average_power = col[j] / t_read_;
        rep.total_energy += col[j];
        rep.elements.push_back(std::move(e));
    }
    return rep;
}

UpdateResult Crossbar::apply_update(std::size_t i, std::size_t j, double v_w, double t_w) {
    check_index(i, j);
    if (!std::isfinite(v_w)) throw CrossbarError("update amplitude must be finite");
    if (!(t_w > 0 && std::isfinite(t_w))) throw CrossbarError("update width must be positive");
    UpdateResult r;
    r.weight_before = weight(i, j);
    DeviceState& s = states_[i * cols_ + j];
    if (is_capacitive(params_)) {
        s = advance(params_, s, v_w, t_w);
        // The driver moves C_end * v_w at v_w.
        r.energy = v_w * v_w * admittance(params_, s);
    } else {
        const auto& q = std::get<MemristorParams>(params_);
        double rho0 = std::get<MemristorState>(s).rho;
        double rate = state_rate(params_, pack(s), v_w)[0];
        s = advance(params_, s, v_w, t_w);
        double rho1 = std::get<MemristorState>(s).rho;
        // rho moves linearly until it clamps; integrate v^2/R in closed form.
        double t_move = rate != 0.0 ? std::min(t_w, (rho1 - rho0) / rate) : 0.0;
        double b = q.r_on - q.r_off;
        double moving = 0.0;
        if (t_move > 0 && rho1 != rho0)
            moving = std::log((q.r_off + b * rho1) / (q.r_off + b * rho0)) / (b * rate);
        else
            t_move = 0.0;
        r.energy = v_w * v_w * (moving + (t_w - t_move) / memristor_resistance(std::get<MemristorState>(s), q));
    }
    refresh(i, j);
    r.weight_after = weight(i, j);
    return r;
}

ProgramResult Crossbar::program(const WeightMatrix& target, double tolerance, double t_w,
                                std::size_t max_pulses_per_device) {
    if (target.rows != rows_ || target.cols != cols_)
        throw CrossbarError(fmt::format("target is {}x{}, crossbar is {}x{}", target.rows, target.cols, rows_, cols_));
    target.validate();
    if (!(tolerance > 0)) throw CrossbarError("programming tolerance must be positive");
    ProgramResult res;
    double vth = threshold(params_);
    double worst = 0.0;
    std::size_t wi = 0, wj = 0;
    for (std::size_t i = 0; i < rows_; ++i) {
        for (std::size_t j = 0; j < cols_; ++j) {
            double goal = target(i, j);
            double rho_goal = state_for_weight(goal);
            for (std::size_t n = 0; n < max_pulses_per_device; ++n) {
                if (std::abs(weight(i, j) - goal) <= tolerance) break;
                double d = rho_goal - normalized_state(params_, states_[i * cols_ + j]);
                double amp = vth + overdrive_for_change(params_, d, t_w);
                res.energy += apply_update(i, j, d > 0 ? amp : -amp, t_w).energy;
                ++res.pulses;
            }
            double err = std::abs(weight(i, j) - goal);
            if (err > worst) {
                worst = err;
                wi = i;
                wj = j;
            }
        }
    }
    res.worst_error = worst;
    if (worst > tolerance)
        throw CrossbarError(fmt::format("programming did not converge: device ({}, {}) is off by {} (tolerance {})",
                                        wi, wj, worst, tolerance));
    return res;
}

double Crossbar::checkpoint_value(const DeviceState& s) const {
    double a = admittance(params_, s);
    return is_capacitive(params_) ? a : 1.0 / a;
}

DeviceState Crossbar::state_from_checkpoint(double value) const {
    if (!(value > 0 && std::isfinite(value))) throw CrossbarError(fmt::format("invalid checkpoint value {}", value));
    switch (kind_of(params_)) {
    case DeviceKind::Biolek:
        return clamped(params_, BiolekState{value});
    case DeviceKind::Memristor: {
        const auto& q = std::get<MemristorParams>(params_);
        return clamped(params_, MemristorState{(q.r_off - value) / (q.r_off - q.r_on)});
    }
    case DeviceKind::Mohamed:
        break;
    }
    double lo = 0.0, hi = 1.0;
    for (int it = 0; it < 80; ++it) {
        double mid = 0.5 * (lo + hi);
        if (admittance(params_, state_at(params_, mid)) < value)
            lo = mid;
        else
            hi = mid;
    }
    return state_at(params_, 0.5 * (lo + hi));
}

void Crossbar::save_csv(std::ostream& os) const {
    os << "# crossbar," << model_name(params_) << ',' << rows_ << ',' << cols_ << ','
       << (is_capacitive(params_) ? "F" : "Ohm") << '\n';
    std::vector<std::string> row(cols_ + 1);
    for (std::size_t i = 0; i < rows_; ++i) {
        for (std::size_t j = 0; j < cols_; ++j) row[j] = format_number(checkpoint_value(states_[i * cols_ + j]));
        row[cols_] = format_number(checkpoint_value(bias_[i]));
        write_csv_row(os, row);
    }
}

void Crossbar::load_csv(std::istream& is) {
    std::string line;
    if (!std::getline(is, line) || line.rfind("# crossbar,", 0) != 0)
        throw CrossbarError("checkpoint is missing its header line");
    auto head = split_csv_line(line);
    if (head.size() != 5) throw CrossbarError("malformed checkpoint header");
    if (head[1] != model_name(params_))
        throw CrossbarError(fmt::format("checkpoint is for model '{}', crossbar uses '{}'", head[1], model_name(params_)));
    if (head[2] != std::to_string(rows_) || head[3] != std::to_string(cols_))
        throw CrossbarError(fmt::format("checkpoint shape {}x{} does not match {}x{}", head[2], head[3], rows_, cols_));
    std::vector<DeviceState> states(rows_ * cols_);
    for (std::size_t i = 0; i < rows_; ++i) {
        if (!std::getline(is, line)) throw CrossbarError(fmt::format("checkpoint ends after {} rows", i));
        auto cells = split_csv_line(line);
        if (cells.size() != cols_ + 1)
            throw CrossbarError(fmt::format("checkpoint row {} has {} values, expected {}", i + 1, cells.size(), cols_ + 1));
        for (std::size_t j = 0; j < cols_; ++j) {
            double v = 0.0;
            const auto& c = cells[j];
            auto [p, ec] = std::from_chars(c.data(), c.data() + c.size(), v);
            if (ec != std::errc{} || p != c.data() + c.size())
                throw CrossbarError(fmt::format("checkpoint row {} column {}: bad number '{}'", i + 1, j + 1, c));
            states[i * cols_ + j] = state_from_checkpoint(v);
        }
    }
    states_ = std::move(states);
    for (std::size_t i = 0; i < rows_; ++i)
        for (std::size_t j = 0; j < cols_; ++j) refresh(i, j);
}

} // namespace memcap
