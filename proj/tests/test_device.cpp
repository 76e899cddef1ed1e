#include "doctest.h"

#include "memcap/calibration.hpp"
#include "memcap/device.hpp"

#include <cmath>

using namespace memcap;

TEST_CASE("biolek threshold function") {
    BiolekParams p = biolek_default();
    p.beta = 1.0;
    CHECK(biolek_f(2.4, p) == doctest::Approx(1.6));
    CHECK(biolek_f(-2.4, p) == doctest::Approx(-1.6));
    CHECK(biolek_f(0.5, p) == 0.0);
    CHECK(biolek_f(-0.8, p) == 0.0);
    CHECK(biolek_f(0.8, p) == 0.0);
}

TEST_CASE("biolek window blocks growth at c_high and shrink at c_low") {
    BiolekParams p = biolek_default();
    CHECK(biolek_window(p.c_high, 2.4, p) == 0.0);
    CHECK(biolek_window(p.c_high, -2.4, p) == 1.0);
    CHECK(biolek_window(p.c_low, -2.4, p) == 0.0);
    CHECK(biolek_window(p.c_low, 2.4, p) == 1.0);
    double mid = 0.5 * (p.c_low + p.c_high);
    CHECK(biolek_window(mid, 2.4, p) == 1.0);
    CHECK(biolek_window(mid, -2.4, p) == 1.0);
}

TEST_CASE("sub-threshold drive leaves every model unchanged") {
    for (const auto& name : preset_names()) {
        DeviceParams p = preset(name);
        DeviceState s = state_at(p, 0.4);
        double v = 0.99 * threshold(p);
        CHECK(step(p, s, v, 1.0) == s);
        CHECK(step(p, s, -v, 1.0) == s);
    }
}

TEST_CASE("supra-threshold drive moves the state in the expected direction") {
    for (const auto& name : preset_names()) {
        DeviceParams p = preset(name);
        const auto& ref = reference_device(name);
        DeviceState s = state_at(p, 0.5);
        double dt = ref.min_to_max / 10;
        CHECK(normalized_state(p, step(p, s, ref.amplitude, dt)) > 0.5);
        CHECK(normalized_state(p, step(p, s, -ref.amplitude, dt)) < 0.5);
        CHECK(admittance(p, step(p, s, ref.amplitude, dt)) > admittance(p, s));
    }
}

TEST_CASE("named presets reproduce reference switching times within 2%") {
    for (const auto& ref : reference_devices()) {
        CAPTURE(ref.name);
        SwitchingTimes t = measure_switching(preset(ref.name), ref.amplitude, ref.width);
        CHECK(calibration_error(t, ref) <= 0.02);
    }
}

TEST_CASE("halving the step changes the post-pulse state by under 0.1%") {
    for (const auto& ref : reference_devices()) {
        DeviceParams p = preset(ref.name);
        DeviceState s0 = state_at(p, 0.2);
        double w = 0.5 * ref.min_to_max;
        DeviceState a = integrate(p, s0, ref.amplitude, w, 100);
        DeviceState b = integrate(p, s0, ref.amplitude, w, 200);
        double ca = admittance(p, a), cb = admittance(p, b);
        CHECK(std::abs(ca - cb) / cb < 1e-3);
    }
}

TEST_CASE("state is clamped to its bounds") {
    for (const auto& name : preset_names()) {
        DeviceParams p = preset(name);
        double big = 10 * threshold(p);
        DeviceState hi = integrate(p, minimum_state(p), big, 10.0, 10);
        DeviceState lo = integrate(p, maximum_state(p), -big, 10.0, 10);
        CHECK(normalized_state(p, hi) == doctest::Approx(1.0));
        CHECK(normalized_state(p, lo) == doctest::Approx(0.0));
        CHECK(admittance(p, hi) == doctest::Approx(admittance_max(p)));
        CHECK(admittance(p, lo) == doctest::Approx(admittance_min(p)));
    }
}

TEST_CASE("mohamed capacitance map") {
    MohamedParams p = mohamed_default();
    double base = p.epsilon * p.area / (p.d1 + p.d2);
    CHECK(mohamed_capacitance({p.x_min, 0.01}, p) == doctest::Approx(0.01 * base));
    CHECK(mohamed_capacitance({p.x_max, 0.9}, p) == doctest::Approx(base));
    CHECK(mohamed_capacitance({0.65, 0.5}, p) == doctest::Approx(0.75 * base));
    CHECK(mohamed_capacitance({0.65, 0.6}, p) > mohamed_capacitance({0.65, 0.5}, p));
    CHECK(mohamed_capacitance({0.7, 0.5}, p) > mohamed_capacitance({0.65, 0.5}, p));
    double ratio = admittance_max(DeviceParams{p}) / admittance_min(DeviceParams{p});
    CHECK(ratio == doctest::Approx(100.0));
}

TEST_CASE("memristor resistance interpolates between r_off and r_on") {
    MemristorParams p = chang_default();
    CHECK(memristor_resistance({0.0}, p) == doctest::Approx(p.r_off));
    CHECK(memristor_resistance({1.0}, p) == doctest::Approx(p.r_on));
    CHECK(memristor_resistance({0.5}, p) == doctest::Approx(0.5 * (p.r_on + p.r_off)));
}

TEST_CASE("invalid parameters are rejected") {
    BiolekParams b = biolek_default();
    b.c_high = b.c_low;
    CHECK_THROWS_AS(b.validate(), ModelError);
    MohamedParams m = mohamed_default();
    m.x_max = 1.5;
    CHECK_THROWS_AS(m.validate(), ModelError);
    MemristorParams r = oblea_default();
    r.k_on = -1;
    CHECK_THROWS_AS(r.validate(), ModelError);
    CHECK_THROWS_AS(preset("nonesuch"), ModelError);
}

TEST_CASE("charge and current accessors respect the device family") {
    DeviceParams c = preset("biolek");
    DeviceParams r = preset("oblea");
    CHECK(device_charge(c, minimum_state(c), 2.0) == doctest::Approx(2e-12));
    CHECK_THROWS_AS(device_current(c, minimum_state(c), 1.0), ModelError);
    CHECK(device_current(r, minimum_state(r), 1.0) == doctest::Approx(1e-6));
    CHECK_THROWS_AS(device_charge(r, minimum_state(r), 1.0), ModelError);
}

TEST_CASE("overdrive inverts the constant-pulse rate") {
    for (const auto& name : preset_names()) {
        DeviceParams p = preset(name);
        double w = 1e-3;
        if (name == "mohamed") w = 0.5;
        if (name == "chang") w = 1e-12;
        if (name == "sheridan") w = 1e-8;
        for (double d : {0.1, -0.1}) {
            double od = overdrive_for_change(p, d, w);
            double v = (d > 0 ? 1 : -1) * (threshold(p) + od);
            DeviceState s = integrate(p, state_at(p, 0.5), v, w, 4);
            CHECK(normalized_state(p, s) == doctest::Approx(0.5 + d).epsilon(1e-6));
        }
    }
}
