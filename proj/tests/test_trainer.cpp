#include "doctest.h"

#include "memcap/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace memcap;
namespace fs = std::filesystem;

namespace {

void put32(std::string& s, std::uint32_t v) {
    for (int k = 3; k >= 0; --k) s.push_back(static_cast<char>((v >> (8 * k)) & 0xff));
}

struct IdxFiles {
    fs::path dir, images, labels;
    explicit IdxFiles(const std::string& tag) {
        dir = fs::temp_directory_path() / ("memcap-idx-" + tag);
        fs::create_directories(dir);
        images = dir / "img";
        labels = dir / "lbl";
    }
    ~IdxFiles() { fs::remove_all(dir); }
    void write(std::uint32_t img_magic, std::uint32_t n_img, std::size_t pixels, std::uint32_t lbl_magic,
               std::uint32_t n_lbl, std::size_t label_bytes) const {
        std::string a, b;
        put32(a, img_magic);
        put32(a, n_img);
        put32(a, 28);
        put32(a, 28);
        a.append(pixels, '\x10');
        put32(b, lbl_magic);
        put32(b, n_lbl);
        b.append(label_bytes, '\x03');
        std::ofstream(images, std::ios::binary) << a;
        std::ofstream(labels, std::ios::binary) << b;
    }
};

std::string load_error(const IdxFiles& f) {
    try {
        load_mnist(f.images, f.labels);
    } catch (const DatasetError& e) {
        return e.what();
    }
    return "";
}

const Dataset& train_set() {
    static Dataset d = load_mnist_split(MEMCAP_TEST_DATA_DIR, "train");
    return d;
}

const Dataset& test_set() {
    static Dataset d = load_mnist_split(MEMCAP_TEST_DATA_DIR, "test");
    return d;
}

EncodedSet first(const EncodedSet& s, std::size_t n) {
    EncodedSet r;
    r.x.assign(s.x.begin(), s.x.begin() + static_cast<std::ptrdiff_t>(n));
    r.y.assign(s.y.begin(), s.y.begin() + static_cast<std::ptrdiff_t>(n));
    return r;
}

std::string checkpoint(const Crossbar& xb) {
    std::ostringstream os;
    xb.save_csv(os);
    return os.str();
}

} // namespace

TEST_CASE("IDX reader accepts well-formed files") {
    IdxFiles f("ok");
    f.write(2051, 3, 3 * 784, 2049, 3, 3);
    Dataset d = load_mnist(f.images, f.labels, "test");
    CHECK(d.size() == 3);
    CHECK(d.split == "test");
    CHECK(d.image(2)[783] == doctest::Approx(16.0 / 255.0));
}

TEST_CASE("IDX reader names the problem") {
    IdxFiles f("bad");
    f.write(2052, 3, 3 * 784, 2049, 3, 3);
    CHECK(load_error(f).find("bad magic") != std::string::npos);
    f.write(2051, 3, 3 * 784, 2049, 2, 2);
    CHECK(load_error(f).find("count mismatch") != std::string::npos);
    f.write(2051, 3, 2 * 784 + 10, 2049, 3, 3);
    std::string e = load_error(f);
    CHECK(e.find(f.images.string()) != std::string::npos);
    CHECK(e.find(std::to_string(16 + 3 * 784)) != std::string::npos);
    CHECK(e.find(std::to_string(16 + 2 * 784 + 10)) != std::string::npos);
    f.write(2051, 1, 784, 2049, 1, 1);
    {
        std::string b;
        put32(b, 2049);
        put32(b, 1);
        b.push_back('\x0c');
        std::ofstream(f.labels, std::ios::binary) << b;
    }
    CHECK(load_error(f).find("not a digit") != std::string::npos);
    CHECK_THROWS_AS(load_mnist(f.dir / "missing", f.labels), DatasetError);
    CHECK_THROWS_AS(load_mnist_split(f.dir, "validation"), DatasetError);
}

TEST_CASE("bundled subset has 2000 training and 500 test images") {
    CHECK(train_set().size() == 2000);
    CHECK(test_set().size() == 500);
    for (auto l : train_set().labels) CHECK(l <= 9);
}

TEST_CASE("encoders") {
    Dataset blank;
    blank.pixels.assign(784, 0.0);
    blank.labels = {0};
    Encoder raw;
    auto x = raw.encode(blank, 0);
    CHECK(x.size() == 784);
    CHECK(std::all_of(x.begin(), x.end(), [](double v) { return v == 0.0; }));

    Dataset ramp = blank;
    for (std::size_t k = 0; k < 784; ++k) ramp.pixels[k] = (k % 2) ? 1.0 : 0.0;
    Encoder p2 = parse_encoder("patch2", 0.4);
    CHECK(p2.dimension(ramp) == 196);
    auto y = p2.encode(ramp, 0);
    for (double v : y) CHECK(v == doctest::Approx(0.2));
    CHECK(parse_encoder("raw", 0.5).encode(ramp, 0)[1] == 0.5);
    CHECK_THROWS_AS(parse_encoder("patch5", 0.5).validate(ramp), DatasetError);
    CHECK_THROWS_AS(parse_encoder("blur", 0.5), DatasetError);
}

TEST_CASE("a zero learning rate never pulses") {
    EncodedSet data = first(encode(train_set(), Encoder{}), 50);
    Crossbar xb(784, 10, preset("biolek"));
    std::string before = checkpoint(xb);
    TrainingConfig cfg;
    cfg.alpha = 0.0;
    std::mt19937_64 rng(1);
    EpochStats st = train_epoch(xb, data, cfg, rng);
    CHECK(st.pulses == 0);
    CHECK(st.update_energy == 0.0);
    CHECK(checkpoint(xb) == before);
}

TEST_CASE("a repeated example drives a single column toward its target") {
    EncodedSet one = first(encode(test_set(), Encoder{}), 1);
    one.y[0] = 0;
    TrainingConfig cfg;
    cfg.alpha = 10.0;
    cfg.v_offset = 0.02;
    Crossbar xb(784, 1, preset("biolek"));
    IdealModel ideal(784, 1);
    std::mt19937_64 r1(1), r2(1);
    double prev = 1e9;
    for (int ep = 1; ep <= 8; ++ep) {
        EpochStats a = train_epoch(xb, one, cfg, r1, ep);
        EpochStats b = train_epoch(ideal, one, cfg, r2, ep);
        CAPTURE(ep);
        CHECK(a.mean_abs_error <= prev + 1e-12);
        CHECK(a.mean_abs_error == doctest::Approx(b.mean_abs_error).epsilon(0.05));
        prev = a.mean_abs_error;
    }
    CHECK(prev < 0.25 * 0.025);
}

TEST_CASE("an untrained crossbar predicts class 0 everywhere") {
    EncodedSet test = encode(test_set(), Encoder{});
    EvalResult r = evaluate(Crossbar(784, 10, preset("biolek")), test);
    double zeros = static_cast<double>(std::count(test.y.begin(), test.y.end(), 0)) / static_cast<double>(test.size());
    CHECK(r.accuracy == doctest::Approx(zeros));
}

TEST_CASE("programming ideal weights reproduces ideal accuracy") {
    EncodedSet train_data = first(encode(train_set(), Encoder{}), 500);
    EncodedSet test = encode(test_set(), Encoder{});
    TrainingConfig cfg;
    cfg.epochs = 3;
    IdealModel ideal(784, 10);
    train(ideal, train_data, cfg);
    Crossbar xb(784, 10, preset("biolek"));
    xb.program(ideal.w, 1e-3);
    double a = evaluate(ideal, test).accuracy;
    double b = evaluate(xb, test).accuracy;
    CHECK(std::abs(a - b) <= 0.01);
}

TEST_CASE("evaluation leaves the crossbar untouched") {
    EncodedSet data = first(encode(train_set(), Encoder{}), 100);
    TrainingConfig cfg;
    cfg.epochs = 1;
    Crossbar xb(784, 10, preset("biolek"));
    train(xb, data, cfg);
    std::string before = checkpoint(xb);
    (void)evaluate(xb, data);
    CHECK(checkpoint(xb) == before);
}

TEST_CASE("same seed, same run") {
    EncodedSet data = first(encode(train_set(), Encoder{}), 200);
    TrainingConfig cfg;
    cfg.epochs = 2;
    Crossbar a(784, 10, preset("biolek")), b(784, 10, preset("biolek"));
    TrainingRun ra = train(a, data, cfg), rb = train(b, data, cfg);
    CHECK(checkpoint(a) == checkpoint(b));
    CHECK(ra.energy == rb.energy);
    std::ostringstream la, lb;
    write_training_log(la, ra);
    write_training_log(lb, rb);
    CHECK(la.str() == lb.str());
    CHECK(la.str().rfind("epoch,mean_abs_error,accuracy,pulses,cumulative_energy\n", 0) == 0);
    cfg.seed = 2;
    Crossbar c(784, 10, preset("biolek"));
    train(c, data, cfg);
    CHECK(checkpoint(c) != checkpoint(a));
}

TEST_CASE("raising the target offset raises the mean trained weight") {
    EncodedSet data = first(encode(train_set(), Encoder{}), 300);
    double prev = -1.0;
    std::vector<double> means;
    for (double off : {0.0, 0.02, 0.05, 0.1, 0.2, 0.4}) {
        TrainingConfig cfg;
        cfg.epochs = 3;
        cfg.v_offset = off;
        IdealModel m(784, 10);
        train(m, data, cfg);
        double mean = 0.0;
        for (double w : m.w.w) mean += w;
        mean /= static_cast<double>(m.w.w.size());
        CAPTURE(off);
        CHECK(mean >= prev);
        prev = mean;
        means.push_back(mean);
    }
    CHECK(means.front() < 0.05);
    CHECK(means.back() > 0.5);
}

TEST_CASE("divergence is reported with the error history") {
    EncodedSet data = first(encode(train_set(), Encoder{}), 50);
    // 80 grows the error steadily; 5000 overflows it within a few epochs.
    for (double alpha : {80.0, 5000.0}) {
        CAPTURE(alpha);
        TrainingConfig cfg;
        cfg.alpha = alpha;
        cfg.epochs = 30;
        IdealModel m(784, 10, false);
        try {
            train(m, data, cfg);
            FAIL_CHECK("expected divergence");
        } catch (const TrainingError& e) {
            std::string s = e.what();
            CHECK(s.find("diverged") != std::string::npos);
            CHECK(s.find(" 1:") != std::string::npos);
            CHECK(s.find(" 30:") == std::string::npos);
        }
    }
    TrainingConfig cfg;
    cfg.alpha = 0.5;
    cfg.epochs = 8;
    IdealModel stable(784, 10, false);
    CHECK_NOTHROW(train(stable, data, cfg));
}

TEST_CASE("configuration checks") {
    DeviceParams p = preset("biolek");
    TrainingConfig cfg;
    cfg.v_w = 0.5;
    CHECK_THROWS_AS(cfg.validate(p), TrainingError);
    cfg = {};
    cfg.input_scale = 0.9;
    CHECK_THROWS_AS(cfg.validate(p), TrainingError);
    cfg = {};
    cfg.alpha = -1;
    CHECK_THROWS_AS(cfg.validate(p), TrainingError);
    EncodedSet bad;
    bad.x = {std::vector<double>(5, 0.0)};
    bad.y = {0};
    CHECK_THROWS_AS(evaluate(Crossbar(784, 10, p), bad), TrainingError);
    CHECK(argmax({0.1, 0.3, 0.3}) == 1);
}
