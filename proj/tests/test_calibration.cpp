#include <doctest.h>

#include <cmath>
#include <numbers>

#include "q3/calibration.hpp"
#include "q3/circuit.hpp"
#include "q3/error.hpp"
#include "q3/rng.hpp"

using namespace q3;
using namespace q3::calibration;
using circuit::CircuitState;

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

CircuitState truth(double phi_b, double phi_c, double x_bc, double x_cb) {
    CircuitState s;
    s.insertion_loss_db = 0.0;
    s.heaters[0].phase_offset_rad = phi_b;
    s.heaters[1].phase_offset_rad = phi_c;
    s.heaters[0].crosstalk_row = {0.0, x_bc};
    s.heaters[1].crosstalk_row = {x_cb, 0.0};
    return s;
}

// Offsets that put the unpowered circuit at its constructive maximum.
std::array<double, 2> aligned_offsets() {
    CircuitState s;
    const auto d = circuit::divider_amplitudes(s);
    const double ref = std::arg(d[0] * d[0]);
    return {ref - std::arg(d[1] * d[1]), ref - std::arg(d[2] * d[2])};
}

Prober noiseless(const CircuitState& t) { return Prober(t, {1e5, true, 0}); }

}  // namespace

TEST_SUITE("calibration") {

TEST_CASE("crosstalk estimate without crosstalk") {
    Rng rng(2);
    for (int i = 0; i < 5; ++i) {
        auto t = truth(kTwoPi * rng.uniform(), kTwoPi * rng.uniform(), 0.0, 0.0);
        auto p = noiseless(t);
        const auto r = estimate_crosstalk(p, CircuitState{});
        CHECK(std::fabs(r.estimate[0][1]) <= 0.005);
        CHECK(std::fabs(r.estimate[1][0]) <= 0.005);
        CHECK(r.estimate[0][0] == 0.0);
    }
}

TEST_CASE("crosstalk estimate at the 5 percent bound") {
    Rng rng(3);
    for (int i = 0; i < 5; ++i) {
        auto t = truth(kTwoPi * rng.uniform(), kTwoPi * rng.uniform(), 0.05, 0.05);
        auto p = noiseless(t);
        const auto r = estimate_crosstalk(p, CircuitState{});
        CHECK(r.estimate[0][1] == doctest::Approx(0.05).epsilon(0.1));
        CHECK(std::fabs(r.estimate[0][1] - 0.05) <= 0.005);
        CHECK(std::fabs(r.estimate[1][0] - 0.05) <= 0.005);
        CHECK(r.rad_per_mw[0] == doctest::Approx(kTwoPi / 10.0).epsilon(0.02));
    }
}

TEST_CASE("crosstalk estimate with shot noise") {
    Rng rng(4);
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        auto t = truth(kTwoPi * rng.uniform(), kTwoPi * rng.uniform(), 0.03, 0.0);
        Prober p(t, {1e5, false, seed});
        const auto r = estimate_crosstalk(p, CircuitState{});
        CHECK(std::fabs(r.estimate[0][1] - 0.03) <= 0.01);
        CHECK(std::fabs(r.estimate[1][0]) <= 0.01);
    }
}

TEST_CASE("crosstalk fit needs contrast") {
    auto t = truth(0.0, 0.0, 0.0, 0.0);
    t.heaters[0].p2pi_mw = 1e9;  // heater cannot move the fringe
    auto p = noiseless(t);
    try {
        (void)estimate_crosstalk(p, CircuitState{});
        FAIL("expected a fit error");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::Fit);
    }
}

TEST_CASE("aligned circuit calibrates to zero power") {
    const auto off = aligned_offsets();
    auto t = truth(off[0], off[1], 0.0, 0.0);
    auto p = noiseless(t);
    const auto r = calibrate_phases(p, CircuitState{}, Matrix2d{});
    CHECK(r.achieved_power_fraction == doctest::Approx(1.0).epsilon(1e-6));
    const auto phases = circuit::heater_phases(t.with_codes(r.heater_codes[0], r.heater_codes[1]).heaters,
                                               t.with_codes(r.heater_codes[0], r.heater_codes[1]).drive);
    CHECK(std::fabs(std::remainder(phases[0] - off[0], kTwoPi)) < 0.03);
    CHECK(std::fabs(std::remainder(phases[1] - off[1], kTwoPi)) < 0.03);
}

TEST_CASE("random offsets reach the maximum in noiseless mode") {
    Rng rng(9);
    for (int i = 0; i < 20; ++i) {
        auto t = truth(kTwoPi * rng.uniform(), kTwoPi * rng.uniform(), 0.0, 0.0);
        auto p = noiseless(t);
        const auto r = calibrate_phases(p, CircuitState{}, Matrix2d{});
        CHECK(r.achieved_power_fraction >= 0.995);
        CHECK(r.probes_used <= 1000);
        CHECK(r.grid_points == 256);
        CHECK(r.probes_used == r.scan_trace.size());
        const double fraction = circuit::port_probabilities(t.with_codes(r.heater_codes[0], r.heater_codes[1]))[0] /
                                circuit::max_output_probability(t);
        CHECK(r.achieved_power_fraction == doctest::Approx(fraction));
    }
}

TEST_CASE("compensated crosstalk in noiseless mode") {
    Rng rng(10);
    const Matrix2d x{{{0.0, 0.05}, {0.05, 0.0}}};
    for (int i = 0; i < 10; ++i) {
        auto t = truth(kTwoPi * rng.uniform(), kTwoPi * rng.uniform(), 0.05, 0.05);
        auto p = noiseless(t);
        const auto r = calibrate_phases(p, CircuitState{}, x);
        CHECK(r.achieved_power_fraction >= 0.995);
    }
}

TEST_CASE("accepted steps never decrease the objective") {
    Rng rng(12);
    for (int i = 0; i < 10; ++i) {
        auto t = truth(kTwoPi * rng.uniform(), kTwoPi * rng.uniform(), 0.05, 0.05);
        auto p = noiseless(t);
        const auto r = calibrate_phases(p, CircuitState{}, Matrix2d{{{0.0, 0.05}, {0.05, 0.0}}});
        double best = -1.0;
        for (std::size_t k = r.grid_points; k < r.scan_trace.size(); ++k) {
            if (!r.scan_trace[k].accepted) continue;
            CHECK(r.scan_trace[k].measured >= best);
            best = r.scan_trace[k].measured;
        }
        CHECK(r.final_step_rad > 0.0);
    }
}

TEST_CASE("budget and signal errors") {
    auto t = truth(0.3, 1.1, 0.0, 0.0);
    auto p = noiseless(t);
    CalibrationOptions small{16, 255};
    try {
        (void)calibrate_phases(p, CircuitState{}, Matrix2d{}, small);
        FAIL("expected a budget error");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::Budget);
    }
    CHECK_THROWS_AS(calibrate_phases(p, CircuitState{}, Matrix2d{}, CalibrationOptions{1, 1000}), Error);

    Prober zero(t, {1e-9, false, 1});
    try {
        (void)calibrate_phases(zero, CircuitState{}, Matrix2d{});
        FAIL("expected a signal error");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::Signal);
    }
}

TEST_CASE("code for power") {
    circuit::Heater h;
    circuit::HeaterDrive d;
    CHECK(code_for_power(h, d, 0.0) == 0);
    const auto c = code_for_power(h, d, 10.0);
    auto dd = d;
    dd.codes[0] = c;
    const double got = circuit::heater_power_mw(dd, 0, 90.0);
    dd.codes[0] = c + 1;
    const double above = circuit::heater_power_mw(dd, 0, 90.0);
    dd.codes[0] = c - 1;
    const double below = circuit::heater_power_mw(dd, 0, 90.0);
    CHECK(std::fabs(got - 10.0) <= std::fabs(above - 10.0));
    CHECK(std::fabs(got - 10.0) <= std::fabs(below - 10.0));
    CHECK(code_for_power(h, d, 1e6) == d.max_code());
}

}  // TEST_SUITE
