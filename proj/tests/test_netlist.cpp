#include "doctest.h"

#include "memcap/netlist.hpp"

#include <string>

using namespace memcap;

namespace {

DeckError error_of(const std::string& text) {
    try {
        parse_deck(text);
    } catch (const DeckError& e) {
        return e;
    }
    FAIL("deck parsed without error: " << text);
    return DeckError({0, 0}, "");
}

} // namespace

TEST_CASE("SI quantities") {
    CHECK(*parse_quantity("2.4") == 2.4);
    CHECK(*parse_quantity("2.4V") == 2.4);
    CHECK(*parse_quantity("1p") == doctest::Approx(1e-12));
    CHECK(*parse_quantity("12pF") == doctest::Approx(12e-12));
    CHECK(*parse_quantity("500us") == doctest::Approx(500e-6));
    CHECK(*parse_quantity("500\xC2\xB5s") == doctest::Approx(500e-6));
    CHECK(*parse_quantity("500\xCE\xBCs") == doctest::Approx(500e-6));
    CHECK(*parse_quantity("3ms") == doctest::Approx(3e-3));
    CHECK(*parse_quantity("1Mohm") == doctest::Approx(1e6));
    CHECK(*parse_quantity("10kOhm") == doctest::Approx(1e4));
    CHECK(*parse_quantity("2F") == 2.0);
    CHECK(*parse_quantity("5fF") == doctest::Approx(5e-15));
    CHECK(*parse_quantity("1e-3") == doctest::Approx(1e-3));
    CHECK(*parse_quantity("-0.3") == -0.3);
    CHECK(*parse_quantity("1GHz") == doctest::Approx(1e9));
    CHECK_FALSE(parse_quantity("").has_value());
    CHECK_FALSE(parse_quantity("abc").has_value());
    CHECK_FALSE(parse_quantity("1e").has_value());
    CHECK_FALSE(parse_quantity("1x").has_value());
    CHECK_FALSE(parse_quantity("inf").has_value());
    CHECK_FALSE(parse_quantity("nan").has_value());
    CHECK_FALSE(parse_quantity("1e999").has_value());
    CHECK_FALSE(parse_quantity("2.4VV").has_value());
}

TEST_CASE("2-input AND deck") {
    Deck d = parse_deck("gate AND 2 biolek\npulse a 0011\npulse b 0101\n");
    REQUIRE(d.gate);
    CHECK(d.gate->kind == GateKind::And);
    CHECK(d.gate->arity == 2);
    CHECK(d.gate->model == "biolek");
    REQUIRE(d.pulses.size() == 2);
    CHECK(d.pulses[1].levels == std::vector<int>{0, 1, 0, 1});
    ElaboratedDeck e = elaborate(d);
    REQUIRE(e.gate);
    CHECK(e.gate->device_count() == 2);
    CHECK(e.gate_options.levels.size() == 2);
    CHECK(e.input_names == std::vector<std::string>{"a", "b"});
    GateRun run = run_truth_table(*e.gate, e.gate_options);
    CHECK(run.pass);
}

TEST_CASE("empty deck") {
    for (const char* text : {"", "\n\n", "# only a comment\n   \n"}) {
        DeckError e = error_of(text);
        CHECK(e.message() == "empty deck");
    }
}

TEST_CASE("diagnostics carry line and column") {
    DeckError e = error_of("# header\ngate AND 2 foo\n");
    CHECK(e.location().line == 2);
    CHECK(e.location().column == 12);
    CHECK(e.message().find("foo") != std::string::npos);
    CHECK(e.format("deck.txt") == "deck.txt:2:12: undeclared model 'foo'");

    e = error_of("gate AND 2 biolek\nfrobnicate 3\n");
    CHECK(e.location().line == 2);
    CHECK(e.message().find("unknown keyword") != std::string::npos);

    e = error_of("model fast biolek beta=1\nmodel fast biolek\ngate AND 2 fast\n");
    CHECK(e.location().line == 2);
    CHECK(e.message().find("duplicate model name") != std::string::npos);

    e = error_of("model biolek biolek\n");
    CHECK(e.message().find("duplicate model name") != std::string::npos);

    e = error_of("gate AND 2 biolek\npulse a 01\npulse b 01\npulse c 01\n");
    CHECK(e.location().line == 1);
    CHECK(e.message().find("arity mismatch") != std::string::npos);

    e = error_of("gate XOR 3 biolek\n");
    CHECK(e.location().column == 10);
    CHECK(e.message().find("arity mismatch") != std::string::npos);

    e = error_of("gate AND 2 biolek vp=2.4Q\n");
    CHECK(e.location().column == 22);
    CHECK(e.message().find("malformed number") != std::string::npos);

    e = error_of("crossbar 4 x biolek\n");
    CHECK(e.location().column == 12);

    e = error_of("gate AND 2 biolek\npulse a 0121\n");
    CHECK(e.location().column == 11);

    e = error_of("model m chang r_on=-5\ngate AND 2 m\n");
    CHECK(e.location().line == 1);

    e = error_of("model m chang beta=1\n");
    CHECK(e.message().find("unknown parameter") != std::string::npos);
}

TEST_CASE("deck-level consistency checks") {
    CHECK_THROWS_AS(parse_deck("pulse a 01\n"), DeckError);
    CHECK_THROWS_AS(parse_deck("gate AND 2 biolek\ncrossbar 2 2 biolek\n"), DeckError);
    CHECK_THROWS_AS(parse_deck("gate AND 2 biolek\npulse a 01\npulse b 011\n"), DeckError);
    CHECK_THROWS_AS(parse_deck("gate AND 2 biolek\npulse a auto\npulse b 01\n"), DeckError);
    CHECK_THROWS_AS(parse_deck("gate AND 2 biolek\npulse a 01 tw=1u\npulse b 01 tw=2u\n"), DeckError);
    CHECK_THROWS_AS(parse_deck("crossbar 2 2 biolek\ninput 0.1\n"), DeckError);
    CHECK_THROWS_AS(parse_deck("crossbar 2 2 biolek\nmeasure truth\n"), DeckError);
    CHECK_THROWS_AS(parse_deck("gate AND 2 biolek\ninit M3 rho=1\n"), DeckError);
    CHECK_THROWS_AS(parse_deck("gate AND 2 biolek\ninit M1 rho=2\n"), DeckError);
    CHECK_THROWS_AS(parse_deck("gate AND 2 biolek\ninit M1 r=1e5\n"), DeckError);
    CHECK_THROWS_AS(parse_deck("gate AND 2 biolek\nmeasure power from=2u to=1u\n"), DeckError);
}

TEST_CASE("3-input OR deck elaborates to three series devices") {
    ElaboratedDeck e = elaborate(parse_deck("gate OR 3 oblea\npulse a auto\npulse b auto\npulse c auto\n"));
    REQUIRE(e.gate);
    CHECK(e.gate->stages.size() == 1);
    CHECK(e.gate->stages[0].base == GateKind::Or);
    CHECK(e.gate->device_count() == 3);
    CHECK(e.gate_options.levels.empty());
    CHECK(e.gate_options.t_w == doctest::Approx(500e-6));
}

TEST_CASE("4x3 crossbar deck") {
    ElaboratedDeck e = elaborate(parse_deck("crossbar 4 3 biolek\ninput 0.1 0.2 0.3 0.4\nmeasure power\n"));
    REQUIRE(e.crossbar);
    CHECK(e.crossbar->rows() == 4);
    CHECK(e.crossbar->cols() == 3);
    for (std::size_t i = 0; i < 4; ++i) CHECK(e.crossbar->bias_state(i) == minimum_state(e.device));
    for (std::size_t j = 0; j < 3; ++j) CHECK(e.crossbar->output_capacitance(j) == doctest::Approx(4 * 11e-12));
    CHECK(e.crossbar_input == std::vector<double>{0.1, 0.2, 0.3, 0.4});
}

TEST_CASE("initial state overrides are applied verbatim") {
    ElaboratedDeck g = elaborate(parse_deck("gate XOR 2 biolek\ninit X1.M2 c=5p\n"));
    REQUIRE(g.gate_options.initial_states.count("X1.M2") == 1);
    CHECK(std::get<BiolekState>(g.gate_options.initial_states["X1.M2"]).c == doctest::Approx(5e-12));

    ElaboratedDeck x = elaborate(parse_deck("crossbar 2 2 chang\ninit M2.1 r=50k\ninit M1.2 rho=0.25\n"));
    CHECK(memristor_resistance(std::get<MemristorState>(x.crossbar->state(1, 0)), chang_default()) ==
          doctest::Approx(50e3));
    CHECK(std::get<MemristorState>(x.crossbar->state(0, 1)).rho == 0.25);
    CHECK(std::get<MemristorState>(x.crossbar->state(0, 0)).rho == 0.0);

    ElaboratedDeck m = elaborate(parse_deck("gate AND 2 mohamed\ninit M1 x=0.6\ninit M1 m=0.5\n"));
    auto s = std::get<MohamedState>(m.gate_options.initial_states["M1"]);
    CHECK(s.x == 0.6);
    CHECK(s.m == 0.5);
}

TEST_CASE("custom models inherit from their base") {
    Deck d = parse_deck("model slow biolek beta=1e-6 v_th=0.5\nmodel slower slow beta=5e-7\ngate AND 2 slower\n");
    auto p = std::get<BiolekParams>(resolve_model(d, "slower"));
    CHECK(p.beta == 5e-7);
    CHECK(p.v_th == 0.5);
    CHECK(p.c_high == biolek_default().c_high);
}

TEST_CASE("pretty-printing round-trips") {
    const char* text = "model m1 chang r_on=20k v_th=0.7   # comment\n"
                       "\n"
                       "gate NOR 3 m1 vp=2.4V tw=500us vlh=1 vhl=1.5\n"
                       "pulse x 00001111 edge=1n\n"
                       "pulse y 00110011\n"
                       "pulse z 01010101\n"
                       "init M2 rho=0.5\n"
                       "measure truth\n"
                       "measure power from=0 to=2ms\n"
                       "measure hazards\n";
    Deck d = parse_deck(text);
    std::string printed = print_deck(d);
    Deck again = parse_deck(printed);
    CHECK(again == d);
    CHECK(print_deck(again) == printed);
}
