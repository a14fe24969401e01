#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>

#include "q3/error.hpp"
#include "q3/scenario.hpp"

using namespace q3;

namespace {

std::string message_of(const std::string& text, ErrorKind* kind = nullptr) {
    try {
        (void)parse_scenario(text, "test.json");
    } catch (const Error& e) {
        if (kind) *kind = e.kind();
        return e.what();
    }
    return "";
}

bool contains(const std::string& s, const std::string& part) { return s.find(part) != std::string::npos; }

}  // namespace

TEST_SUITE("scenario") {

TEST_CASE("minimal file gets every default") {
    const auto s = parse_scenario(R"({"experiment": "g2", "seed": 1})");
    CHECK(s.experiment == Experiment::G2);
    CHECK(s.seed == 1);
    CHECK(s.detector.efficiency == 0.5);
    CHECK(s.detector.dead_time_ns == 60.0);
    CHECK(s.circuit.extinction_db == 30.0);
    CHECK(s.circuit.settle_time_ms == 100.0);
    CHECK(s.born.settle_discard_factor == 3.0);
    CHECK(s.mission.orbit.altitude_km == 550.0);
    CHECK(s.mission.stations.size() == 2);
    CHECK(s.power.budget.battery_capacity_wh == 69.0);
    CHECK_NOTHROW(s.validate());

    const auto empty = parse_scenario("{}");
    CHECK(empty.experiment == Experiment::G2);
}

TEST_CASE("experiments by name") {
    for (const char* name : {"g2", "born", "calibrate", "passes", "power"}) {
        const auto s = parse_scenario(std::string(R"({"experiment": ")") + name + "\"}");
        CHECK(std::string(to_string(s.experiment)) == name);
    }
    CHECK(contains(message_of(R"({"experiment": "teleport"})"), "experiment"));
    CHECK(contains(message_of(R"({"experiment": "analyze"})"), "input"));
    CHECK_NOTHROW(parse_scenario(R"({"experiment": "analyze", "input": "counts.csv"})"));
}

TEST_CASE("detector efficiency above one half is rejected") {
    ErrorKind kind{};
    const auto msg = message_of(R"({"experiment": "g2", "detector": {"efficiency": 0.7}})", &kind);
    CHECK(kind == ErrorKind::Parameter);
    CHECK(contains(msg, "detector.efficiency"));
    CHECK(contains(msg, "efficiency must lie in [0, 0.5]"));
    CHECK_NOTHROW(parse_scenario(R"({"detector": {"efficiency": 0.7, "test_mode": true}})"));
}

TEST_CASE("strict mission mode enforces the altitude window") {
    const std::string text = R"({"experiment": "passes", "mission": {"orbit": {"altitude_km": 450}}})";
    CHECK_NOTHROW(parse_scenario(text));
    auto s = parse_scenario(text);
    s.strict_mission = true;
    try {
        s.validate();
        FAIL("expected a validation error");
    } catch (const ValidationError& e) {
        CHECK(contains(e.what(), "mission.orbit.altitude_km"));
        CHECK(contains(e.what(), "[487, 604]"));
        CHECK(contains(e.what(), "450 km"));
    }
    const auto inline_strict =
        message_of(R"({"strict_mission": true, "mission": {"orbit": {"altitude_km": 450}}})");
    CHECK(contains(inline_strict, "[487, 604]"));
    CHECK(contains(message_of(R"({"strict_mission": true, "mission": {"orbit": {"inclination_deg": 53}}})"),
                   "inclination"));
    CHECK(contains(message_of(R"({"mission": {"orbit": {"inclination_deg": 200}}})"), "mission.orbit"));
}

TEST_CASE("unknown keys are rejected with their path") {
    CHECK(contains(message_of(R"({"detector": {"efficency": 0.3}})"), "detector.efficency: unknown key"));
    CHECK(contains(message_of(R"({"colour": 1})"), "colour: unknown key"));
    CHECK(contains(message_of(R"({"mission": {"orbit": {"apogee": 1}}})"), "mission.orbit.apogee"));
}

TEST_CASE("type errors name the field") {
    CHECK(contains(message_of(R"({"seed": -1})"), "seed"));
    CHECK(contains(message_of(R"({"detector": {"dark_rate": "many"}})"), "detector.dark_rate: expected a number"));
    CHECK(contains(message_of(R"({"born": {"bootstrap": 1}})"), "born.bootstrap"));
    CHECK(contains(message_of(R"({"circuit": {"phase_offsets_rad": [1]}})"), "circuit.phase_offsets_rad"));
    CHECK(contains(message_of(R"({"circuit": {"crosstalk": 0.2}})"), "circuit.crosstalk"));
    CHECK(contains(message_of(R"({"circuit": {"resistance_ohm": [60, 90]}})"), "circuit.resistance_ohm"));
    CHECK(contains(message_of("[1, 2]"), "expected an object"));
}

TEST_CASE("syntax errors carry line and column") {
    ErrorKind kind{};
    const auto msg = message_of("{\n  \"seed\": 1,\n  \"experiment\" \"g2\"\n}", &kind);
    CHECK(kind == ErrorKind::Parameter);
    CHECK(contains(msg, "test.json:3:"));
    CHECK(contains(msg, "syntax error"));
}

TEST_CASE("whole-valued floats are integers") {
    const auto s = parse_scenario(R"({"g2": {"photons": 1e7}, "born": {"photons_per_config": 1e6}})");
    CHECK(s.g2.photons == 10000000ull);
    CHECK(contains(message_of(R"({"g2": {"photons": 1.5}})"), "g2.photons"));
}

TEST_CASE("stations by name or object and ISO epochs") {
    const auto s = parse_scenario(R"({"mission": {
        "stations": ["berlin", {"name": "Quito", "latitude_deg": -0.2, "longitude_deg": -78.5, "min_elevation_deg": 5}],
        "orbit": {"epoch": "2026-03-01T12:00:00Z"}}})");
    REQUIRE(s.mission.stations.size() == 2);
    CHECK(s.mission.stations[0].latitude_deg == 52.5);
    CHECK(s.mission.stations[1].min_elevation_deg == 5.0);
    CHECK(s.mission.orbit.epoch_utc_s == 1772366400.0);
    CHECK(contains(message_of(R"({"mission": {"stations": ["atlantis"]}})"), "mission.stations"));
    CHECK(contains(message_of(R"({"mission": {"orbit": {"epoch": "yesterday"}}})"), "epoch"));
}

TEST_CASE("echo round trips") {
    const auto s = parse_scenario(R"({"experiment": "born", "seed": 99,
        "source": {"kind": "wcp_cw", "wcp_cw": {"mean_rate": 2e5}},
        "circuit": {"phase_offsets_rad": [0.1, 0.2], "crosstalk": 0.03, "ideal_switches": true},
        "born": {"photons_per_config": 5000, "bootstrap": true, "resamples": 50},
        "mission": {"span_days": 2}})");
    const auto echo = scenario_to_json(s);
    const auto again = scenario_from_json(echo);
    CHECK(scenario_to_json(again) == echo);
    CHECK(again.seed == 99);
    CHECK(again.source.kind == "wcp_cw");
    REQUIRE(again.circuit.phase_offsets_rad.has_value());
    CHECK((*again.circuit.phase_offsets_rad)[1] == 0.2);
    CHECK(again.born.resamples == 50);
}

TEST_CASE("fabrication draws depend on the seed only") {
    Scenario a;
    a.seed = 7;
    const auto f1 = sample_fabrication(a);
    const auto f2 = sample_fabrication(a);
    CHECK(f1.phase_offsets_rad == f2.phase_offsets_rad);
    CHECK(f1.leakage_phases_rad.size() == 3);
    a.seed = 8;
    CHECK(sample_fabrication(a).phase_offsets_rad != f1.phase_offsets_rad);

    Scenario fixed;
    fixed.circuit.phase_offsets_rad = std::vector<double>{0.5, 1.5};
    const auto f = sample_fabrication(fixed);
    CHECK(f.phase_offsets_rad == std::vector<double>{0.5, 1.5});
    CHECK(f.divider_first == doctest::Approx(1.0 / 3.0));
    fixed.circuit.perturb_ratios = true;
    const auto p = sample_fabrication(fixed);
    CHECK(std::fabs(p.divider_first - 1.0 / 3.0) <= 0.01);
    CHECK(std::fabs(p.divider_second - 0.5) <= 0.01);
}

TEST_CASE("scenario files") {
    const auto dir = std::filesystem::temp_directory_path() / "q3_scenario_test";
    std::filesystem::create_directories(dir);
    const auto path = (dir / "s.json").string();
    std::ofstream(path) << R"({"experiment": "power", "seed": 3})";
    CHECK(load_scenario(path).experiment == Experiment::Power);
    try {
        (void)load_scenario((dir / "missing.json").string());
        FAIL("expected an io error");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::Io);
    }
    std::filesystem::remove_all(dir);
}

}  // TEST_SUITE
