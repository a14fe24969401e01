#include <doctest.h>

#include <array>
#include <cmath>
#include <numbers>

#include "q3/error.hpp"
#include "q3/mission.hpp"
#include "q3/rng.hpp"

using namespace q3;
using namespace q3::mission;

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kDeg = kPi / 180.0;

using Vec3 = std::array<double, 3>;

double norm(const Vec3& v) { return std::sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2]); }

// Point-mass gravity plus the J2 zonal term, in m/s^2.
Vec3 gravity(const Vec3& r, bool j2) {
    const double rn = norm(r);
    Vec3 a{};
    for (int k = 0; k < 3; ++k) a[k] = -kMuEarth * r[k] / (rn * rn * rn);
    if (j2) {
        const double re = kEarthRadiusKm * 1e3;
        const double c = 1.5 * kJ2 * kMuEarth * re * re / std::pow(rn, 5);
        const double f = 5.0 * r[2] * r[2] / (rn * rn);
        a[0] += c * r[0] * (f - 1.0);
        a[1] += c * r[1] * (f - 1.0);
        a[2] += c * r[2] * (f - 3.0);
    }
    return a;
}

struct State {
    Vec3 r, v;
};

State rk4(const State& s, double dt, bool j2) {
    auto deriv = [&](const State& x) { return State{x.v, gravity(x.r, j2)}; };
    auto add = [](const State& x, const State& d, double h) {
        State o;
        for (int k = 0; k < 3; ++k) {
            o.r[k] = x.r[k] + h * d.r[k];
            o.v[k] = x.v[k] + h * d.v[k];
        }
        return o;
    };
    const State k1 = deriv(s), k2 = deriv(add(s, k1, dt / 2)), k3 = deriv(add(s, k2, dt / 2)),
                k4 = deriv(add(s, k3, dt));
    State o;
    for (int k = 0; k < 3; ++k) {
        o.r[k] = s.r[k] + dt / 6 * (k1.r[k] + 2 * k2.r[k] + 2 * k3.r[k] + k4.r[k]);
        o.v[k] = s.v[k] + dt / 6 * (k1.v[k] + 2 * k2.v[k] + 2 * k3.v[k] + k4.v[k]);
    }
    return o;
}

State circular(double altitude_km, double inclination_deg) {
    const double a = (kEarthRadiusKm + altitude_km) * 1e3;
    const double v = std::sqrt(kMuEarth / a);
    const double i = inclination_deg * kDeg;
    return {{a, 0.0, 0.0}, {0.0, v * std::cos(i), v * std::sin(i)}};
}

// Times and node longitudes of successive ascending-node crossings.
std::vector<std::array<double, 2>> ascending_nodes(double altitude_km, double inclination_deg, bool j2, int count) {
    State s = circular(altitude_km, inclination_deg);
    std::vector<std::array<double, 2>> nodes;
    const double dt = 1.0;
    double t = 0.0;
    while (static_cast<int>(nodes.size()) < count) {
        const State n = rk4(s, dt, j2);
        if (s.r[2] < 0.0 && n.r[2] >= 0.0) {
            const double f = -s.r[2] / (n.r[2] - s.r[2]);
            const double x = s.r[0] + f * (n.r[0] - s.r[0]);
            const double y = s.r[1] + f * (n.r[1] - s.r[1]);
            nodes.push_back({t + f * dt, std::atan2(y, x)});
        }
        s = n;
        t += dt;
    }
    return nodes;
}

// Orbit-averaged Gauss equation for the node: dRAAN/dt = r sin(u) W / (h sin i)
// with W the J2 acceleration normal to a circular orbit plane.
double averaged_node_rate(double altitude_km, double inclination_deg) {
    const double a = (kEarthRadiusKm + altitude_km) * 1e3;
    const double i = inclination_deg * kDeg;
    const double h = std::sqrt(kMuEarth * a);
    const Vec3 normal{0.0, -std::sin(i), std::cos(i)};
    constexpr int kSteps = 20000;
    double sum = 0.0;
    for (int k = 0; k < kSteps; ++k) {
        const double u = 2.0 * kPi * (k + 0.5) / kSteps;
        const Vec3 r{a * std::cos(u), a * std::sin(u) * std::cos(i), a * std::sin(u) * std::sin(i)};
        const Vec3 total = gravity(r, true), kepler = gravity(r, false);
        double w = 0.0;
        for (int c = 0; c < 3; ++c) w += (total[c] - kepler[c]) * normal[c];
        sum += a * std::sin(u) * w / (h * std::sin(i));
    }
    return sum / kSteps;
}

GroundStation station(double lat, double lon, double mask = 0.0) { return {"test", lat, lon, mask}; }

OrbitSpec orbit(double h, double inc) {
    OrbitSpec o;
    o.altitude_km = h;
    o.inclination_deg = inc;
    return o;
}

}  // namespace

TEST_SUITE("mission") {

TEST_CASE("orbital period examples") {
    CHECK(orbital_period_s(550.0) == doctest::Approx(5.73e3).epsilon(1e-3));
    CHECK(orbital_period_s(550.0) / 60.0 == doctest::Approx(95.5).epsilon(1e-3));
    CHECK(orbital_period_s(0.0) == doctest::Approx(5.07e3).epsilon(2e-3));
    CHECK(orbital_period_s(604.0) > orbital_period_s(487.0));
}

TEST_CASE("period matches two-body integration") {
    for (double h : {487.0, 550.0, 604.0}) {
        const auto nodes = ascending_nodes(h, 64.0, false, 2);
        CHECK(nodes[1][0] - nodes[0][0] == doctest::Approx(orbital_period_s(h)).epsilon(1e-3));
    }
}

TEST_CASE("SSO inclination examples") {
    CHECK(sso_inclination_deg(550.0) == doctest::Approx(97.6).epsilon(1e-3));
    double prev = 0.0;
    for (double h = 400.0; h <= 650.0; h += 10.0) {
        const double i = sso_inclination_deg(h);
        CHECK(i > 90.0);
        CHECK(i > prev);
        prev = i;
    }
    CHECK(sso_inclination_deg(604.0) > sso_inclination_deg(487.0));
    const double target = 2.0 * kPi / (kTropicalYearDays * 86400.0);
    CHECK(raan_drift_rad_s(550.0, sso_inclination_deg(550.0)) == doctest::Approx(target).epsilon(1e-12));
    try {
        (void)sso_inclination_deg(20000.0);
        FAIL("expected a domain error");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::Domain);
    }
}

TEST_CASE("nodal drift matches the orbit-averaged J2 perturbation") {
    for (double h : {487.0, 550.0, 604.0}) {
        for (double inc : {53.0, 64.0, sso_inclination_deg(h)}) {
            CHECK(averaged_node_rate(h, inc) == doctest::Approx(raan_drift_rad_s(h, inc)).epsilon(1e-3));
        }
    }
}

TEST_CASE("nodal drift matches a full J2 integration") {
    // Osculating and mean elements differ at O(J2), so the bound is looser.
    const double inc = sso_inclination_deg(550.0);
    const auto nodes = ascending_nodes(550.0, inc, true, 3);
    const double rate = (nodes[2][1] - nodes[1][1]) / (nodes[2][0] - nodes[1][0]);
    CHECK(rate == doctest::Approx(raan_drift_rad_s(550.0, inc)).epsilon(5e-3));
}

TEST_CASE("Berlin passes at 64 and 53 degrees") {
    const auto b = berlin();
    const auto s64 = contact_statistics(predict_passes(orbit(550, 64), b, 10.0), 10.0);
    CHECK(s64.passes_per_day >= 7.0);
    CHECK(s64.passes_per_day <= 9.0);
    CHECK(s64.minutes_per_day >= 65.0);
    CHECK(s64.minutes_per_day <= 95.0);
    const auto s53 = contact_statistics(predict_passes(orbit(550, 53), b, 10.0), 10.0);
    CHECK(s53.passes_per_day >= 5.0);
    CHECK(s53.passes_per_day <= 7.0);
    CHECK(s53.minutes_per_day >= 50.0);
    CHECK(s53.minutes_per_day <= 80.0);
    CHECK(s64.passes_per_day > s53.passes_per_day);
    // The horizon chord is flown against the Earth's rotation at worst at n - w_E.
    const double n = 2.0 * kPi / orbital_period_s(550.0);
    CHECK(s64.max_pass_s <= max_pass_duration_s(550.0) * n / (n - kEarthRotation));
    CHECK(s64.max_pass_s >= 0.9 * max_pass_duration_s(550.0));
    CHECK(max_pass_duration_s(550.0) / 60.0 == doctest::Approx(12.3).epsilon(0.01));
}

TEST_CASE("equatorial station sees every orbit") {
    const auto passes = predict_passes(orbit(550, 0), station(0.0, 0.0), 10.0);
    const auto s = contact_statistics(passes, 10.0);
    CHECK(s.passes_per_day >= 14.0);
    CHECK(s.passes_per_day <= 16.0);
    for (const auto& p : passes) CHECK(p.max_elevation_deg > 80.0);
}

TEST_CASE("pass windows are ordered, disjoint and sit on the mask") {
    for (double mask : {0.0, 5.0, 10.0}) {
        auto st = berlin();
        st.min_elevation_deg = mask;
        const auto o = orbit(550, 64);
        const auto passes = predict_passes(o, st, 3.0);
        REQUIRE(!passes.empty());
        for (std::size_t k = 0; k < passes.size(); ++k) {
            const auto& p = passes[k];
            CHECK(p.set_s > p.rise_s);
            CHECK(p.max_elevation_deg >= mask);
            CHECK(p.rise_s >= 0.0);
            CHECK(p.rise_s < 3.0 * 86400.0);
            CHECK(std::fabs(elevation_deg(o, st, p.rise_s) - mask) < 0.01);
            CHECK(std::fabs(elevation_deg(o, st, p.set_s) - mask) < 0.01);
            CHECK(elevation_deg(o, st, 0.5 * (p.rise_s + p.set_s)) > mask);
            if (k > 0) CHECK(p.rise_s > passes[k - 1].set_s);
        }
    }
}

TEST_CASE("raising the mask never adds contact") {
    Rng rng(8);
    const auto o = orbit(550, 64);
    for (int trial = 0; trial < 10; ++trial) {
        double lo = 10.0 * rng.uniform(), hi = 10.0 * rng.uniform();
        if (lo > hi) std::swap(lo, hi);
        auto a = berlin(), b = berlin();
        a.min_elevation_deg = lo;
        b.min_elevation_deg = hi;
        const auto sa = contact_statistics(predict_passes(o, a, 2.0), 2.0);
        const auto sb = contact_statistics(predict_passes(o, b, 2.0), 2.0);
        CHECK(sb.passes_per_day <= sa.passes_per_day);
        CHECK(sb.minutes_per_day <= sa.minutes_per_day);
    }
}

TEST_CASE("visibility latitude bound agrees with simulation") {
    const auto ly = longyearbyen();
    for (double inc : {53.0, 56.0, 64.0, 97.6}) {
        const auto o = orbit(550, inc);
        const bool reachable = latitude_reachable(o, ly);
        const auto passes = predict_passes(o, ly, 10.0);
        CHECK(reachable == !passes.empty());
    }
    CHECK(visibility_half_angle_deg(550.0, 0.0) == doctest::Approx(std::acos(6371.0 / 6921.0) / kDeg));
    CHECK(!latitude_reachable(orbit(550, 53), ly));
    CHECK(latitude_reachable(orbit(550, 64), ly));
    CHECK(!latitude_reachable(orbit(550, 0), berlin()));
    CHECK(predict_passes(orbit(550, 0), berlin(), 2.0).empty());
}

TEST_CASE("polar station is not a singularity") {
    const auto passes = predict_passes(orbit(550, 97.6), station(90.0, 0.0), 1.0);
    CHECK(!passes.empty());
    const auto south = predict_passes(orbit(550, 64), station(-90.0, 0.0), 1.0);
    CHECK(south.empty());
}

TEST_CASE("pass prediction arguments") {
    CHECK_THROWS_AS(predict_passes(orbit(550, 64), berlin(), 0.5), Error);
    CHECK_THROWS_AS(predict_passes(orbit(550, 190), berlin(), 1.0), Error);
    CHECK_THROWS_AS(predict_passes(orbit(550, 64), station(91.0, 0.0), 1.0), Error);
    CHECK_THROWS_AS(predict_passes(orbit(550, 64), berlin(), 1.0, 0.0), Error);
}

TEST_CASE("empty pass list gives zero statistics") {
    const auto s = contact_statistics({}, 10.0);
    CHECK(s.passes_per_day == 0.0);
    CHECK(s.minutes_per_day == 0.0);
    CHECK(s.max_pass_s == 0.0);
    CHECK_THROWS_AS(contact_statistics({}, 0.0), Error);
}

TEST_CASE("compliance window") {
    CHECK(orbit(487, 64).altitude_compliant());
    CHECK(orbit(604, 64).altitude_compliant());
    CHECK(!orbit(450, 64).altitude_compliant());
    CHECK(!orbit(650, 64).altitude_compliant());
    CHECK_NOTHROW(orbit(450, 64).validate());
    CHECK_THROWS_AS(orbit(550, 181).validate(), Error);
}

TEST_CASE("energy margin examples") {
    PowerBudget b;
    const double hours = orbital_period_s(550.0) / 3600.0;
    CHECK(hours == doctest::Approx(1.592).epsilon(1e-3));
    const auto idle = energy_margin(b, 0.0, 550.0);
    CHECK(idle.margin_wh == doctest::Approx(15.2 * hours));
    CHECK(idle.depth_of_discharge == 0.0);
    const auto full = energy_margin(b, 1.0, 550.0);
    CHECK(full.margin_wh == doctest::Approx(4.3).epsilon(0.01));
    CHECK(full.eclipse_free_draw_wh == doctest::Approx(19.9).epsilon(0.01));
    CHECK(full.depth_of_discharge == doctest::Approx(0.29).epsilon(0.01));
    CHECK(full.depth_of_discharge < 0.3);
    CHECK_THROWS_AS(energy_margin(b, 1.5, 550.0), Error);
    b.bus_overhead_w = -1.0;
    CHECK_THROWS_AS(energy_margin(b, 0.5, 550.0), Error);
}

TEST_CASE("energy margin is linear in duty") {
    PowerBudget b;
    b.bus_overhead_w = 2.0;
    const double m0 = energy_margin(b, 0.0, 550.0).margin_wh;
    const double m1 = energy_margin(b, 1.0, 550.0).margin_wh;
    for (double d : {0.125, 0.25, 0.5, 0.75}) {
        const double m = energy_margin(b, d, 550.0).margin_wh;
        CHECK(m == doctest::Approx(m0 + d * (m1 - m0)).epsilon(1e-14));
    }
}

TEST_CASE("UTC formatting") {
    CHECK(format_utc(1767225600.0) == "2026-01-01T00:00:00Z");
    CHECK(format_utc(1767225600.0 + 86399.6) == "2026-01-02T00:00:00Z");
}

}  // TEST_SUITE
