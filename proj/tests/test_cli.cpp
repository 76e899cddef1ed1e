#include "doctest.h"

#include "memcap/cli.hpp"

#include "json.hpp"

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

struct Result {
    int code;
    std::string out;
    std::string err;
};

Result run(std::vector<std::string> args) {
    args.insert(args.begin(), "memcapsim");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out, err;
    int code = memcap::run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
    return {code, out.str(), err.str()};
}

struct Scratch {
    fs::path dir;
    explicit Scratch(const std::string& tag) {
        dir = fs::temp_directory_path() / ("memcap-cli-" + tag);
        fs::remove_all(dir);
        fs::create_directories(dir);
    }
    ~Scratch() { fs::remove_all(dir); }
    [[nodiscard]] std::string at(const std::string& name) const { return (dir / name).string(); }
};

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

json manifest(const std::string& dir) { return json::parse(slurp(fs::path(dir) / "manifest.json")); }

std::string artifact(const json& m, const std::string& kind) {
    for (const auto& a : m["artifacts"])
        if (a["kind"] == kind) return a["path"];
    return "";
}

} // namespace

TEST_CASE("calibrate writes a manifest") {
    Scratch s("cal");
    Result r = run({"calibrate", "biolek", "-o", s.at("run"), "--stamp", "t0"});
    CHECK(r.code == 0);
    CHECK(r.out.find("biolek") != std::string::npos);
    json m = manifest(s.at("run"));
    CHECK(m["schema"] == 1);
    CHECK(m["command"] == "calibrate");
    CHECK(artifact(m, "calibration") == "calibrate/biolek/t0.csv");
    CHECK(fs::exists(s.dir / "run/calibrate/biolek/t0.csv"));
}

TEST_CASE("unknown models are usage errors listing the valid names") {
    Scratch s("unknown");
    Result r = run({"calibrate", "biolec", "-o", s.at("run")});
    CHECK(r.code == 2);
    for (const char* n : {"biolek", "mohamed", "chang", "oblea", "sheridan"})
        CHECK(r.err.find(n) != std::string::npos);
    CHECK_FALSE(fs::exists(s.dir / "run"));
}

TEST_CASE("bad invocations exit with 2") {
    CHECK(run({}).code == 2);
    CHECK(run({"frobnicate"}).code == 2);
    CHECK(run({"truth-table", "--vp", "abc"}).code == 2);
    CHECK(run({"evaluate"}).code == 2);
    CHECK(run({"--help"}).code == 0);
}

TEST_CASE("power comparison against a single model has unit ratio") {
    Scratch s("pc");
    Result r = run({"power-compare", "--gates", "AND2", "--models", "biolek", "-o", s.at("run"), "--stamp", "p"});
    REQUIRE(r.code == 0);
    json m = manifest(s.at("run"));
    CHECK(m["results"]["AND2"]["biolek"]["ratio"].get<double>() == doctest::Approx(1.0));
    std::string csv = slurp(s.dir / "run" / artifact(m, "power"));
    CHECK(csv.find("AND2,biolek,") != std::string::npos);
    CHECK(csv.find("cmos") != std::string::npos);

    Result empty = run({"power-compare", "--models", "", "-o", s.at("run2")});
    CHECK(empty.code == 2);
}

TEST_CASE("existing output directories need --force") {
    Scratch s("force");
    REQUIRE(run({"calibrate", "biolek", "-o", s.at("run")}).code == 0);
    Result again = run({"calibrate", "biolek", "-o", s.at("run")});
    CHECK(again.code == 2);
    CHECK(again.err.find("--force") != std::string::npos);
    CHECK(run({"calibrate", "biolek", "-o", s.at("run"), "--force"}).code == 0);
    // No temporaries are left next to the run.
    std::size_t entries = 0;
    for ([[maybe_unused]] const auto& e : fs::directory_iterator(s.dir)) ++entries;
    CHECK(entries == 1);
}

TEST_CASE("report needs a completed run") {
    Scratch s("report");
    fs::create_directories(s.dir / "empty");
    CHECK(run({"report", s.at("empty"), "-o", s.at("rep0")}).code != 0);
    CHECK(run({"report", s.at("nowhere"), "-o", s.at("rep1")}).code != 0);

    REQUIRE(run({"hazards", "--gate", "AND2", "-o", s.at("hz"), "--stamp", "h"}).code == 0);
    Result r = run({"report", s.at("hz"), "-o", s.at("rep")});
    CHECK(r.code == 0);
    json sum = json::parse(slurp(s.dir / "rep/summary.json"));
    bool fig7 = false;
    for (const auto& f : sum["figures"]) fig7 = fig7 || f["figure"] == "fig7-hazards";
    CHECK(fig7);
}

TEST_CASE("deck errors point at file, line and column") {
    Scratch s("deck");
    std::string deck = s.at("bad.deck");
    std::ofstream(deck) << "gate AND 2 biolek\npulse a 01x1\npulse b 0101\n";
    Result r = run({"simulate", deck, "-o", s.at("run")});
    CHECK(r.code == 2);
    CHECK(r.err.find(deck + ":2:11:") != std::string::npos);
}

TEST_CASE("deck simulation writes a trace with one column per node") {
    Scratch s("sim");
    std::string deck = s.at("and3.deck");
    std::ofstream(deck) << "gate AND 3 biolek tw=2u\npulse a auto\npulse b auto\npulse c auto\nmeasure truth\n";
    Result r = run({"simulate", deck, "-o", s.at("run"), "--stamp", "d"});
    REQUIRE(r.code == 0);
    json m = manifest(s.at("run"));
    std::string trace = slurp(s.dir / "run" / artifact(m, "trace"));
    std::string head = trace.substr(0, trace.find('\n'));
    CHECK(head.rfind("t,Va,Vb,Vc,", 0) == 0);
    // Every cell is a complete number.
    std::istringstream lines(trace);
    std::string line;
    std::getline(lines, line);
    int checked = 0;
    while (std::getline(lines, line) && checked < 50) {
        std::istringstream cells(line);
        std::string cell;
        while (std::getline(cells, cell, ',')) {
            char* end = nullptr;
            double v = std::strtod(cell.c_str(), &end);
            CHECK(*end == '\0');
            CHECK(std::isfinite(v));
        }
        ++checked;
    }
    CHECK(checked > 0);
}

TEST_CASE("configuration files are copied verbatim") {
    Scratch s("config");
    std::string cfg = s.at("run.ini");
    std::string text = "# calibration settings\ncalibrate.stamp=c1\n";
    std::ofstream(cfg) << text;
    Result r = run({"calibrate", "biolek", "--config", cfg, "-o", s.at("run")});
    CHECK(r.code == 0);
    CHECK(slurp(s.dir / "run/config.txt") == text);
    CHECK(fs::exists(s.dir / "run/calibrate/biolek/c1.csv"));
}

TEST_CASE("bundled sample decks simulate cleanly") {
    Scratch s("samples");
    int n = 0;
    for (const auto& e : fs::directory_iterator(fs::path(MEMCAP_SOURCE_DIR) / "decks")) {
        if (e.path().extension() != ".deck") continue;
        CAPTURE(e.path().string());
        Result r = run({"simulate", e.path().string(), "-o", s.at(e.path().stem().string())});
        CHECK(r.code == 0);
        CHECK(r.err.empty());
        ++n;
    }
    CHECK(n >= 3);
}
