#pragma once

// Line-oriented circuit deck.
//
//   model <name> <base> [key=value ...]
//   gate <KIND> <arity> <model> [vp=] [tw=] [vlh=] [vhl=]
//   crossbar <rows> <cols> <model> [cout=] [tread=]
//   pulse <input> <bits|auto> [vp=] [tw=] [edge=]
//   input <v1> <v2> ...
//   init <device> <key>=<value>
//   measure <power|truth|hazards> [from=] [to=]
//
// `#` starts a comment. The grammar is documented in docs/deck-format.md.

#include "memcap/crossbar.hpp"
#include "memcap/device.hpp"
#include "memcap/logic.hpp"

#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace memcap {

/// 1-based line and byte column. Locations never take part in equality, so
/// a re-parsed deck compares equal to the original.
struct Location {
    int line = 0;
    int column = 0;
    friend bool operator==(const Location&, const Location&) { return true; }
};

class DeckError : public std::runtime_error {
public:
    DeckError(Location loc, const std::string& message);
    [[nodiscard]] Location location() const { return loc_; }
    [[nodiscard]] const std::string& message() const { return message_; }
    /// "file:line:col: message"
    [[nodiscard]] std::string format(std::string_view file) const;

private:
    Location loc_;
    std::string message_;
};

/// Parses a number with an optional SI prefix (f p n u µ μ m k M G) and an
/// optional unit (s V F ohm Ohm Hz A J W). Returns nullopt when malformed.
std::optional<double> parse_quantity(std::string_view text);

struct ModelDecl {
    std::string name;
    std::string base;
    std::vector<std::pair<std::string, double>> overrides;
    Location loc;
    friend bool operator==(const ModelDecl&, const ModelDecl&) = default;
};

struct GateDecl {
    GateKind kind = GateKind::And;
    int arity = 2;
    std::string model;
    std::optional<double> vp, tw, vlh, vhl;
    Location loc;
    friend bool operator==(const GateDecl&, const GateDecl&) = default;
};

struct CrossbarDecl {
    int rows = 1;
    int cols = 1;
    std::string model;
    std::optional<double> cout, tread;
    Location loc;
    friend bool operator==(const CrossbarDecl&, const CrossbarDecl&) = default;
};

struct PulseDecl {
    std::string input;
    bool automatic = false;
    std::vector<int> levels; // empty when automatic
    std::optional<double> vp, tw, edge;
    Location loc;
    friend bool operator==(const PulseDecl&, const PulseDecl&) = default;
};

struct InputDecl {
    std::vector<double> volts;
    Location loc;
    friend bool operator==(const InputDecl&, const InputDecl&) = default;
};

struct InitDecl {
    std::string device;
    std::string key; // rho, c, x, m or r
    double value = 0.0;
    Location loc;
    friend bool operator==(const InitDecl&, const InitDecl&) = default;
};

enum class MeasureKind { Power, Truth, Hazards };

struct MeasureDecl {
    MeasureKind kind = MeasureKind::Power;
    std::optional<double> from, to;
    Location loc;
    friend bool operator==(const MeasureDecl&, const MeasureDecl&) = default;
};

struct Deck {
    std::vector<ModelDecl> models; // user declarations only
    std::optional<GateDecl> gate;
    std::optional<CrossbarDecl> crossbar;
    std::vector<PulseDecl> pulses;
    std::optional<InputDecl> input;
    std::vector<InitDecl> inits;
    std::vector<MeasureDecl> measures;
    friend bool operator==(const Deck&, const Deck&) = default;
};

/// Throws DeckError with the location of the first problem.
Deck parse_deck(std::string_view text);
/// Canonical text; parse_deck(print_deck(d)) == d.
std::string print_deck(const Deck& d);

/// Resolves a model name against the built-in presets and the deck's own
/// declarations.
DeviceParams resolve_model(const Deck& d, std::string_view name);

struct ElaboratedDeck {
    std::string model;
    DeviceParams device;
    std::optional<GateCircuit> gate;
    GateRunOptions gate_options;       // levels and starting states bound
    std::vector<std::string> input_names;
    std::optional<Crossbar> crossbar;  // starting states bound
    std::vector<double> crossbar_input;
    std::vector<MeasureDecl> measures;
};

ElaboratedDeck elaborate(const Deck& d);

} // namespace memcap
