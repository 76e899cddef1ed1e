#include "memcap/netlist.hpp"

#include "memcap/csv.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <map>
#include <set>

namespace memcap {

DeckError::DeckError(Location loc, const std::string& message)
    : std::runtime_error(fmt::format("{}:{}: {}", loc.line, loc.column, message)), loc_(loc), message_(message) {}

std::string DeckError::format(std::string_view file) const {
    return fmt::format("{}:{}:{}: {}", file, loc_.line, loc_.column, message_);
}

std::optional<double> parse_quantity(std::string_view text) {
    double v = 0.0;
    const char* b = text.data();
    const char* e = b + text.size();
    auto [p, ec] = std::from_chars(b, e, v);
    if (ec != std::errc{} || p == b || !std::isfinite(v)) return std::nullopt;
    std::string_view rest(p, static_cast<std::size_t>(e - p));
    static constexpr std::array<std::string_view, 9> units{"s", "V", "F", "ohm", "Ohm", "Hz", "A", "J", "W"};
    auto is_unit = [](std::string_view u) {
        return u.empty() || std::find(units.begin(), units.end(), u) != units.end();
    };
    struct Prefix {
        std::string_view text;
        double scale;
    };
    static constexpr std::array<Prefix, 11> prefixes{{{"f", 1e-15},
                                                      {"p", 1e-12},
                                                      {"n", 1e-9},
                                                      {"u", 1e-6},
                                                      {"\xC2\xB5", 1e-6},
                                                      {"\xCE\xBC", 1e-6},
                                                      {"m", 1e-3},
                                                      {"k", 1e3},
                                                      {"M", 1e6},
                                                      {"G", 1e9},
                                                      {"", 1.0}}};
    for (const auto& pre : prefixes) {
        if (rest.substr(0, pre.text.size()) != pre.text) continue;
        if (!is_unit(rest.substr(pre.text.size()))) continue;
        double r = v * pre.scale;
        if (!std::isfinite(r)) return std::nullopt;
        return r;
    }
    return std::nullopt;
}

namespace {

struct Token {
    std::string_view text;
    Location loc;
};

std::vector<Token> tokenize(std::string_view line, int line_no) {
    std::vector<Token> out;
    std::size_t i = 0;
    while (i < line.size()) {
        char c = line[i];
        if (c == '#') break;
        if (c == ' ' || c == '\t' || c == '\r' || c == '\v' || c == '\f') {
            ++i;
            continue;
        }
        std::size_t j = i;
        while (j < line.size() && line[j] != '#' && line[j] != ' ' && line[j] != '\t' && line[j] != '\r' &&
               line[j] != '\v' && line[j] != '\f')
            ++j;
        out.push_back({line.substr(i, j - i), {line_no, static_cast<int>(i) + 1}});
        i = j;
    }
    return out;
}

std::string printable(std::string_view s) {
    std::string r;
    for (unsigned char c : s) {
        if (c >= 0x20 && c < 0x7f)
            r += static_cast<char>(c);
        else
            r += fmt::format("\\x{:02x}", c);
    }
    return r;
}

bool is_identifier(std::string_view s) {
    if (s.empty() || s.size() > 64) return false;
    auto ok0 = [](char c) { return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_'; };
    if (!ok0(s[0])) return false;
    for (char c : s)
        if (!ok0(c) && !(c >= '0' && c <= '9') && c != '.' && c != '-') return false;
    return true;
}

double number(const Token& t, std::string_view what) {
    auto v = parse_quantity(t.text);
    if (!v) throw DeckError(t.loc, fmt::format("malformed number '{}' for {}", printable(t.text), what));
    return *v;
}

int integer(const Token& t, std::string_view what, int lo, int hi) {
    int v = 0;
    auto [p, ec] = std::from_chars(t.text.data(), t.text.data() + t.text.size(), v);
    if (ec != std::errc{} || p != t.text.data() + t.text.size())
        throw DeckError(t.loc, fmt::format("malformed number '{}' for {}", printable(t.text), what));
    if (v < lo || v > hi) throw DeckError(t.loc, fmt::format("{} must lie in [{}, {}], got {}", what, lo, hi, v));
    return v;
}

/// key=value options after the positional arguments.
std::map<std::string, std::pair<double, Location>> options(const std::vector<Token>& toks, std::size_t first,
                                                           std::initializer_list<std::string_view> allowed) {
    std::map<std::string, std::pair<double, Location>> out;
    for (std::size_t k = first; k < toks.size(); ++k) {
        const Token& t = toks[k];
        auto eq = t.text.find('=');
        if (eq == std::string_view::npos)
            throw DeckError(t.loc, fmt::format("unexpected argument '{}' (expected key=value)", printable(t.text)));
        std::string key(t.text.substr(0, eq));
        if (std::find(allowed.begin(), allowed.end(), key) == allowed.end())
            throw DeckError(t.loc, fmt::format("unknown option '{}'", printable(key)));
        if (out.count(key)) throw DeckError(t.loc, fmt::format("option '{}' given twice", key));
        Token val{t.text.substr(eq + 1), {t.loc.line, t.loc.column + static_cast<int>(eq) + 1}};
        out[key] = {number(val, key), t.loc};
    }
    return out;
}

std::optional<double> opt(const std::map<std::string, std::pair<double, Location>>& m, const std::string& key) {
    auto it = m.find(key);
    if (it == m.end()) return std::nullopt;
    return it->second.first;
}

double* override_slot(DeviceParams& p, const std::string& key) {
    return std::visit(
        [&](auto& q) -> double* {
            using T = std::decay_t<decltype(q)>;
            if constexpr (std::is_same_v<T, BiolekParams>) {
                if (key == "c_low") return &q.c_low;
                if (key == "c_high") return &q.c_high;
                if (key == "beta") return &q.beta;
                if (key == "v_th") return &q.v_th;
            } else if constexpr (std::is_same_v<T, MohamedParams>) {
                if (key == "k_g") return &q.k_g;
                if (key == "k_s") return &q.k_s;
                if (key == "b_g") return &q.b_g;
                if (key == "b_s") return &q.b_s;
                if (key == "x_min") return &q.x_min;
                if (key == "x_max") return &q.x_max;
                if (key == "m_min") return &q.m_min;
                if (key == "m_max") return &q.m_max;
                if (key == "d1") return &q.d1;
                if (key == "d2") return &q.d2;
                if (key == "epsilon") return &q.epsilon;
                if (key == "area") return &q.area;
                if (key == "v_th") return &q.v_th;
            } else {
                if (key == "r_on") return &q.r_on;
                if (key == "r_off") return &q.r_off;
                if (key == "k_on") return &q.k_on;
                if (key == "k_off") return &q.k_off;
                if (key == "v_th") return &q.v_th;
            }
            return nullptr;
        },
        p);
}

bool is_builtin(std::string_view name) {
    auto names = preset_names();
    return std::find(names.begin(), names.end(), name) != names.end();
}

std::optional<DeviceParams> lookup(const Deck& d, std::string_view name) {
    for (const auto& m : d.models) {
        if (m.name != name) continue;
        auto base = lookup(d, m.base);
        if (!base) return std::nullopt;
        DeviceParams p = *base;
        for (const auto& [k, v] : m.overrides) *override_slot(p, k) = v;
        return p;
    }
    if (is_builtin(name)) return preset(name);
    return std::nullopt;
}

std::vector<std::string> device_names(const GateCircuit& g) {
    std::vector<std::string> out;
    bool multi = g.stages.size() > 1;
    for (std::size_t s = 0; s < g.stages.size(); ++s)
        for (std::size_t j = 0; j < g.stages[s].inputs.size(); ++j)
            out.push_back(multi ? fmt::format("X{}.M{}", s + 1, j + 1) : fmt::format("M{}", j + 1));
    return out;
}

/// Crossbar device "M<i>.<j>", 1-based.
std::optional<std::pair<std::size_t, std::size_t>> crossbar_cell(std::string_view name, int rows, int cols) {
    if (name.size() < 4 || name[0] != 'M') return std::nullopt;
    auto dot = name.find('.');
    if (dot == std::string_view::npos) return std::nullopt;
    int i = 0, j = 0;
    auto a = name.substr(1, dot - 1), b = name.substr(dot + 1);
    auto r1 = std::from_chars(a.data(), a.data() + a.size(), i);
    auto r2 = std::from_chars(b.data(), b.data() + b.size(), j);
    if (r1.ec != std::errc{} || r1.ptr != a.data() + a.size() || r2.ec != std::errc{} ||
        r2.ptr != b.data() + b.size())
        return std::nullopt;
    if (i < 1 || i > rows || j < 1 || j > cols) return std::nullopt;
    return std::pair<std::size_t, std::size_t>(i - 1, j - 1);
}

/// Applies one init override to a state; throws DeckError when out of range.
DeviceState apply_init(const DeviceParams& p, DeviceState s, const InitDecl& in) {
    auto range_error = [&](double lo, double hi) {
        return DeckError(in.loc, fmt::format("init {} {}={} outside [{}, {}]", in.device, in.key,
                                             format_number(in.value), format_number(lo), format_number(hi)));
    };
    if (in.key == "rho") {
        if (!(in.value >= 0 && in.value <= 1)) throw range_error(0, 1);
        return state_at(p, in.value);
    }
    return std::visit(
        [&](const auto& q) -> DeviceState {
            using T = std::decay_t<decltype(q)>;
            if constexpr (std::is_same_v<T, BiolekParams>) {
                if (in.key == "c") {
                    if (!(in.value >= q.c_low && in.value <= q.c_high)) throw range_error(q.c_low, q.c_high);
                    return BiolekState{in.value};
                }
            } else if constexpr (std::is_same_v<T, MohamedParams>) {
                auto st = std::get<MohamedState>(s);
                if (in.key == "x") {
                    if (!(in.value >= q.x_min && in.value <= q.x_max)) throw range_error(q.x_min, q.x_max);
                    st.x = in.value;
                    return st;
                }
                if (in.key == "m") {
                    if (!(in.value >= q.m_min && in.value <= q.m_max)) throw range_error(q.m_min, q.m_max);
                    st.m = in.value;
                    return st;
                }
            } else {
                if (in.key == "r") {
                    if (!(in.value >= q.r_on && in.value <= q.r_off)) throw range_error(q.r_on, q.r_off);
                    return MemristorState{(q.r_off - in.value) / (q.r_off - q.r_on)};
                }
            }
            throw DeckError(in.loc, fmt::format("init key '{}' does not apply to model {}", in.key, model_name(p)));
        },
        p);
}

void check_deck(const Deck& d, Location first) {
    if (!d.gate && !d.crossbar) throw DeckError(first, "deck declares no gate or crossbar");
    if (d.gate) {
        const auto& g = *d.gate;
        if (d.input) throw DeckError(d.input->loc, "input vectors apply to crossbar decks only");
        if (!d.pulses.empty() && d.pulses.size() != static_cast<std::size_t>(g.arity))
            throw DeckError(g.loc, fmt::format("arity mismatch: {}-input {} gate with {} pulse lines", g.arity,
                                               gate_name(g.kind), d.pulses.size()));
        std::optional<std::size_t> len;
        bool any_auto = false, any_bits = false;
        std::optional<double> tw, vp, edge;
        std::set<std::string> names;
        for (const auto& p : d.pulses) {
            if (!names.insert(p.input).second)
                throw DeckError(p.loc, fmt::format("input '{}' has two pulse lines", p.input));
            (p.automatic ? any_auto : any_bits) = true;
            if (any_auto && any_bits) throw DeckError(p.loc, "cannot mix 'auto' and explicit bit sequences");
            if (!p.automatic) {
                if (len && *len != p.levels.size())
                    throw DeckError(p.loc, fmt::format("pulse '{}' has {} slots, earlier pulses have {}", p.input,
                                                       p.levels.size(), *len));
                len = p.levels.size();
            }
            auto agree = [&](std::optional<double>& seen, const std::optional<double>& v, std::string_view key) {
                if (!v) return;
                if (seen && *seen != *v)
                    throw DeckError(p.loc, fmt::format("pulses disagree on {}", key));
                seen = v;
            };
            agree(tw, p.tw, "tw");
            agree(vp, p.vp, "vp");
            agree(edge, p.edge, "edge");
        }
        DeviceParams dev = *lookup(d, g.model);
        GateCircuit gc = build_gate(g.kind, dev, g.arity);
        auto names_ok = device_names(gc);
        std::set<std::pair<std::string, std::string>> seen;
        for (const auto& in : d.inits) {
            if (std::find(names_ok.begin(), names_ok.end(), in.device) == names_ok.end())
                throw DeckError(in.loc, fmt::format("no device named '{}' in the gate", in.device));
            if (!seen.insert({in.device, in.key}).second)
                throw DeckError(in.loc, fmt::format("{} {} initialized twice", in.device, in.key));
            apply_init(dev, minimum_state(dev), in);
        }
    } else {
        const auto& c = *d.crossbar;
        if (!d.pulses.empty()) throw DeckError(d.pulses.front().loc, "pulse trains apply to gate decks only");
        if (d.input && d.input->volts.size() != static_cast<std::size_t>(c.rows))
            throw DeckError(d.input->loc, fmt::format("arity mismatch: input has {} values for {} crossbar rows",
                                                      d.input->volts.size(), c.rows));
        DeviceParams dev = *lookup(d, c.model);
        std::set<std::pair<std::string, std::string>> seen;
        for (const auto& in : d.inits) {
            if (!crossbar_cell(in.device, c.rows, c.cols))
                throw DeckError(in.loc, fmt::format("no device named '{}' in the crossbar", in.device));
            if (!seen.insert({in.device, in.key}).second)
                throw DeckError(in.loc, fmt::format("{} {} initialized twice", in.device, in.key));
            apply_init(dev, minimum_state(dev), in);
        }
    }
    for (const auto& m : d.measures) {
        if (m.kind != MeasureKind::Power && !d.gate)
            throw DeckError(m.loc, "truth and hazard measurements need a gate");
        if (m.from && *m.from < 0) throw DeckError(m.loc, "measurement window starts before 0 s");
        if (m.from && m.to && !(*m.to > *m.from)) throw DeckError(m.loc, "measurement window is empty");
        if (m.to && !(*m.to > 0)) throw DeckError(m.loc, "measurement window is empty");
    }
}

} // namespace

DeviceParams resolve_model(const Deck& d, std::string_view name) {
    auto p = lookup(d, name);
    if (!p) throw ModelError(fmt::format("undeclared model '{}'", name));
    return *p;
}

Deck parse_deck(std::string_view text) {
    Deck d;
    std::optional<Location> first;
    int line_no = 0;
    std::size_t pos = 0;
    auto declared = [&](std::string_view name) {
        if (is_builtin(name)) return true;
        for (const auto& m : d.models)
            if (m.name == name) return true;
        return false;
    };
    auto need_model = [&](const Token& t) {
        if (!declared(t.text)) throw DeckError(t.loc, fmt::format("undeclared model '{}'", printable(t.text)));
    };
    auto need_circuit_slot = [&](const Token& t) {
        if (d.gate || d.crossbar) throw DeckError(t.loc, "deck already declares a circuit");
    };
    while (pos <= text.size()) {
        auto nl = text.find('\n', pos);
        std::string_view line = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
        pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
        ++line_no;
        auto toks = tokenize(line, line_no);
        if (toks.empty()) continue;
        const Token& kw = toks[0];
        if (!first) first = kw.loc;
        auto need_args = [&](std::size_t n, std::string_view usage) {
            if (toks.size() < n + 1)
                throw DeckError(kw.loc, fmt::format("{} needs {}", kw.text, usage));
        };
        if (kw.text == "model") {
            need_args(2, "a name and a base model");
            const Token& name = toks[1];
            const Token& base = toks[2];
            if (!is_identifier(name.text))
                throw DeckError(name.loc, fmt::format("invalid model name '{}'", printable(name.text)));
            if (declared(name.text))
                throw DeckError(name.loc, fmt::format("duplicate model name '{}'", name.text));
            need_model(base);
            ModelDecl m{std::string(name.text), std::string(base.text), {}, name.loc};
            DeviceParams p = *lookup(d, base.text);
            for (std::size_t k = 3; k < toks.size(); ++k) {
                const Token& t = toks[k];
                auto eq = t.text.find('=');
                if (eq == std::string_view::npos)
                    throw DeckError(t.loc, fmt::format("unexpected argument '{}' (expected key=value)", printable(t.text)));
                std::string key(t.text.substr(0, eq));
                double* slot = override_slot(p, key);
                if (!slot)
                    throw DeckError(t.loc, fmt::format("unknown parameter '{}' for a {} model", printable(key),
                                                       kind_name(kind_of(p))));
                for (const auto& o : m.overrides)
                    if (o.first == key) throw DeckError(t.loc, fmt::format("parameter '{}' given twice", key));
                Token val{t.text.substr(eq + 1), {t.loc.line, t.loc.column + static_cast<int>(eq) + 1}};
                *slot = number(val, key);
                m.overrides.emplace_back(key, *slot);
            }
            try {
                memcap::validate(p);
            } catch (const std::exception& e) {
                throw DeckError(name.loc, fmt::format("model '{}': {}", name.text, e.what()));
            }
            d.models.push_back(std::move(m));
        } else if (kw.text == "gate") {
            need_args(3, "a kind, an arity and a model");
            need_circuit_slot(kw);
            GateDecl g;
            g.loc = kw.loc;
            try {
                g.kind = parse_gate_kind(toks[1].text);
            } catch (const LogicError&) {
                throw DeckError(toks[1].loc, fmt::format("unknown gate kind '{}'", printable(toks[1].text)));
            }
            g.arity = integer(toks[2], "gate arity", 1, 64);
            need_model(toks[3]);
            g.model = std::string(toks[3].text);
            try {
                build_gate(g.kind, preset("biolek"), g.arity);
            } catch (const LogicError& e) {
                throw DeckError(toks[2].loc, fmt::format("arity mismatch: {}", e.what()));
            }
            auto o = options(toks, 4, {"vp", "tw", "vlh", "vhl"});
            g.vp = opt(o, "vp");
            g.tw = opt(o, "tw");
            g.vlh = opt(o, "vlh");
            g.vhl = opt(o, "vhl");
            for (const auto& [k, v] : o)
                if (!(v.first > 0)) throw DeckError(v.second, fmt::format("{} must be positive", k));
            d.gate = std::move(g);
        } else if (kw.text == "crossbar") {
            need_args(3, "rows, columns and a model");
            need_circuit_slot(kw);
            CrossbarDecl c;
            c.loc = kw.loc;
            c.rows = integer(toks[1], "crossbar rows", 1, 100000);
            c.cols = integer(toks[2], "crossbar columns", 1, 100000);
            if (static_cast<long long>(c.rows) * c.cols > 10'000'000)
                throw DeckError(toks[1].loc, "crossbar exceeds 10^7 devices");
            need_model(toks[3]);
            c.model = std::string(toks[3].text);
            auto o = options(toks, 4, {"cout", "tread"});
            c.cout = opt(o, "cout");
            c.tread = opt(o, "tread");
            for (const auto& [k, v] : o)
                if (!(v.first > 0)) throw DeckError(v.second, fmt::format("{} must be positive", k));
            d.crossbar = std::move(c);
        } else if (kw.text == "pulse") {
            need_args(2, "an input name and a bit sequence or 'auto'");
            PulseDecl p;
            p.loc = kw.loc;
            if (!is_identifier(toks[1].text))
                throw DeckError(toks[1].loc, fmt::format("invalid input name '{}'", printable(toks[1].text)));
            p.input = std::string(toks[1].text);
            if (toks[2].text == "auto") {
                p.automatic = true;
            } else {
                if (toks[2].text.size() > 4096) throw DeckError(toks[2].loc, "bit sequence longer than 4096 slots");
                for (std::size_t k = 0; k < toks[2].text.size(); ++k) {
                    char c = toks[2].text[k];
                    if (c != '0' && c != '1')
                        throw DeckError({toks[2].loc.line, toks[2].loc.column + static_cast<int>(k)},
                                        fmt::format("expected 0, 1 or 'auto' in bit sequence, found '{}'",
                                                    printable(std::string_view(&c, 1))));
                    p.levels.push_back(c - '0');
                }
            }
            auto o = options(toks, 3, {"vp", "tw", "edge"});
            p.vp = opt(o, "vp");
            p.tw = opt(o, "tw");
            p.edge = opt(o, "edge");
            for (const auto& [k, v] : o)
                if (!(v.first > 0)) throw DeckError(v.second, fmt::format("{} must be positive", k));
            d.pulses.push_back(std::move(p));
        } else if (kw.text == "input") {
            need_args(1, "at least one voltage");
            if (d.input) throw DeckError(kw.loc, "input vector given twice");
            InputDecl in;
            in.loc = kw.loc;
            for (std::size_t k = 1; k < toks.size(); ++k) in.volts.push_back(number(toks[k], "input voltage"));
            d.input = std::move(in);
        } else if (kw.text == "init") {
            need_args(2, "a device name and key=value");
            if (toks.size() > 3) throw DeckError(toks[3].loc, "init takes one key=value");
            InitDecl in;
            in.loc = kw.loc;
            if (!is_identifier(toks[1].text))
                throw DeckError(toks[1].loc, fmt::format("invalid device name '{}'", printable(toks[1].text)));
            in.device = std::string(toks[1].text);
            auto o = options(toks, 2, {"rho", "c", "x", "m", "r"});
            in.key = o.begin()->first;
            in.value = o.begin()->second.first;
            d.inits.push_back(std::move(in));
        } else if (kw.text == "measure") {
            need_args(1, "power, truth or hazards");
            MeasureDecl m;
            m.loc = kw.loc;
            if (toks[1].text == "power")
                m.kind = MeasureKind::Power;
            else if (toks[1].text == "truth")
                m.kind = MeasureKind::Truth;
            else if (toks[1].text == "hazards")
                m.kind = MeasureKind::Hazards;
            else
                throw DeckError(toks[1].loc, fmt::format("unknown measurement '{}'", printable(toks[1].text)));
            auto o = options(toks, 2, {"from", "to"});
            m.from = opt(o, "from");
            m.to = opt(o, "to");
            d.measures.push_back(std::move(m));
        } else {
            throw DeckError(kw.loc, fmt::format("unknown keyword '{}'", printable(kw.text)));
        }
    }
    if (!first) throw DeckError({1, 1}, "empty deck");
    check_deck(d, *first);
    return d;
}

std::string print_deck(const Deck& d) {
    std::string out;
    auto num = [](double v) { return format_number(v); };
    auto kv = [&](std::string_view k, const std::optional<double>& v) {
        if (v) out += fmt::format(" {}={}", k, num(*v));
    };
    for (const auto& m : d.models) {
        out += fmt::format("model {} {}", m.name, m.base);
        for (const auto& [k, v] : m.overrides) out += fmt::format(" {}={}", k, num(v));
        out += '\n';
    }
    if (d.gate) {
        const auto& g = *d.gate;
        out += fmt::format("gate {} {} {}", gate_name(g.kind), g.arity, g.model);
        kv("vp", g.vp);
        kv("tw", g.tw);
        kv("vlh", g.vlh);
        kv("vhl", g.vhl);
        out += '\n';
    }
    if (d.crossbar) {
        const auto& c = *d.crossbar;
        out += fmt::format("crossbar {} {} {}", c.rows, c.cols, c.model);
        kv("cout", c.cout);
        kv("tread", c.tread);
        out += '\n';
    }
    for (const auto& p : d.pulses) {
        out += fmt::format("pulse {} ", p.input);
        if (p.automatic)
            out += "auto";
        else
            for (int b : p.levels) out += static_cast<char>('0' + b);
        kv("vp", p.vp);
        kv("tw", p.tw);
        kv("edge", p.edge);
        out += '\n';
    }
    if (d.input) {
        out += "input";
        for (double v : d.input->volts) out += " " + num(v);
        out += '\n';
    }
    for (const auto& in : d.inits) out += fmt::format("init {} {}={}\n", in.device, in.key, num(in.value));
    for (const auto& m : d.measures) {
        static constexpr std::array<std::string_view, 3> names{"power", "truth", "hazards"};
        out += fmt::format("measure {}", names[static_cast<int>(m.kind)]);
        kv("from", m.from);
        kv("to", m.to);
        out += '\n';
    }
    return out;
}

ElaboratedDeck elaborate(const Deck& d) {
    ElaboratedDeck e;
    e.measures = d.measures;
    if (d.gate) {
        const auto& g = *d.gate;
        e.model = g.model;
        e.device = resolve_model(d, g.model);
        GateCircuit gc = build_gate(g.kind, e.device, g.arity);
        if (g.vlh || g.vhl) {
            OperatingPoint op = truth_table_operating_point(e.device);
            double vp = g.vp.value_or(op.v_p);
            LogicBands b = default_bands(vp);
            if (g.vlh) b.v_lh = *g.vlh;
            if (g.vhl) b.v_hl = *g.vhl;
            gc.bands = b;
        }
        OperatingPoint op = truth_table_operating_point(e.device);
        GateRunOptions& o = e.gate_options;
        o.v_p = g.vp.value_or(op.v_p);
        o.t_w = g.tw.value_or(op.t_w);
        for (const auto& p : d.pulses) {
            if (p.vp) o.v_p = *p.vp;
            if (p.tw) o.t_w = *p.tw;
            if (p.edge) o.edge = *p.edge;
            if (!p.automatic) o.levels.push_back(p.levels);
            e.input_names.push_back(p.input);
        }
        for (int i = static_cast<int>(e.input_names.size()); i < g.arity; ++i)
            e.input_names.push_back(std::string(1, static_cast<char>('a' + i)));
        for (const auto& in : d.inits) {
            auto it = o.initial_states.find(in.device);
            DeviceState s = it == o.initial_states.end() ? minimum_state(e.device) : it->second;
            o.initial_states[in.device] = apply_init(e.device, s, in);
        }
        e.gate = std::move(gc);
    } else if (d.crossbar) {
        const auto& c = *d.crossbar;
        e.model = c.model;
        e.device = resolve_model(d, c.model);
        Crossbar xb(static_cast<std::size_t>(c.rows), static_cast<std::size_t>(c.cols), e.device,
                    c.tread.value_or(250e-6), c.cout.value_or(0.0));
        for (const auto& in : d.inits) {
            auto cell = crossbar_cell(in.device, c.rows, c.cols);
            if (!cell) throw DeckError(in.loc, fmt::format("no device named '{}' in the crossbar", in.device));
            xb.set_state(cell->first, cell->second, apply_init(e.device, xb.state(cell->first, cell->second), in));
        }
        if (d.input)
            e.crossbar_input = d.input->volts;
        else
            e.crossbar_input.assign(static_cast<std::size_t>(c.rows), 0.0);
        e.crossbar = std::move(xb);
    } else {
        throw DeckError({1, 1}, "deck declares no gate or crossbar");
    }
    return e;
}

} // namespace memcap
