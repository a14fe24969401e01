#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "q3/circuit.hpp"
#include "q3/detection.hpp"
#include "q3/mission.hpp"
#include "q3/source.hpp"

namespace q3 {

enum class Experiment { G2, Born, Calibrate, Passes, Power, Analyze };

const char* to_string(Experiment e);
Experiment parse_experiment(const std::string& name);

struct SourceConfig {
    std::string kind = "emitter";  // emitter | wcp_cw | wcp_pulsed
    double pump_current_ma = 20.5;
    source::PumpLaser laser;
    source::EmitterParams emitter;
    source::WeakCoherentCW wcp_cw;
    source::WeakCoherentPulsed wcp_pulsed;

    source::SourceKind make() const;
    double pump_fiber_mw() const;
};

struct CircuitConfig {
    double divider_first = 1.0 / 3.0;
    double divider_second = 0.5;
    double hbt_tap = 0.5;
    double ratio_error = 0.01;
    bool perturb_ratios = false;  // draw each ratio uniformly within +-ratio_error
    bool ideal_switches = false;  // infinite extinction
    double extinction_db = 30.0;
    double settle_time_ms = 100.0;
    double insertion_loss_db = 2.0;
    std::vector<double> resistance_ohm{90.0, 90.0};
    std::vector<double> p2pi_mw{10.0, 10.0};
    double crosstalk = 0.05;  // symmetric nearest-neighbour X
    std::optional<std::vector<double>> phase_offsets_rad;    // empty: drawn per seed
    std::optional<std::vector<double>> leakage_phases_rad;   // empty: drawn per seed
    double third_order_injection = 0.0;
    double current_resolution_ua = 23.0;
    double max_current_ma = 23.0;
};

/// Values drawn from the fabrication substream; echoed for re-runs.
struct Fabrication {
    std::vector<double> phase_offsets_rad;
    std::vector<double> leakage_phases_rad;
    double divider_first = 0.0;
    double divider_second = 0.0;
    double hbt_tap = 0.0;
};

struct DetectorConfig {
    double efficiency = 0.5;
    double dark_rate = 1000.0;
    double dead_time_ns = 60.0;
    double jitter_fwhm_ps = 500.0;
    bool test_mode = false;
    double peak_power_w = 12.5;
    double timebin_resolution_ps = 36.0;

    detection::DetectorSystem make() const;
};

struct FilterConfig {
    detection::FilterParams params;
    double pump_transmission = 1e-6;  // pump flux fraction reaching the filter
};

struct G2Config {
    std::uint64_t photons = 10'000'000;
    double window_ns = 100.0;
    std::int64_t bin_ps = 1000;
};

struct BornConfig {
    std::uint64_t photons_per_config = 1'000'000;
    double settle_discard_factor = 3.0;
    bool calibrate = true;
    bool bootstrap = false;
    std::uint32_t resamples = 1000;
};

struct CalibrationConfig {
    std::size_t grid = 16;
    std::size_t budget = 1000;
    double counts_per_point = 1e5;
    bool noiseless = false;
    bool estimate_crosstalk = true;
};

struct MissionConfig {
    mission::OrbitSpec orbit;
    std::vector<mission::GroundStation> stations{mission::berlin(), mission::longyearbyen()};
    double span_days = 10.0;
    double step_s = 10.0;
};

struct PowerConfig {
    mission::PowerBudget budget;
    std::vector<double> duties{0.0, 0.25, 0.5, 0.75, 1.0};
};

struct Scenario {
    Experiment experiment = Experiment::G2;
    std::uint64_t seed = 1;
    SourceConfig source;
    CircuitConfig circuit;
    FilterConfig filter;
    DetectorConfig detector;
    G2Config g2;
    BornConfig born;
    CalibrationConfig calibration;
    MissionConfig mission;
    PowerConfig power;
    std::string input;  // count table for the analyze experiment
    bool strict_mission = false;

    /// Checks every nested invariant; throws ValidationError naming the field.
    void validate() const;
};

/// Parses a scenario document. Missing keys take defaults, unknown keys
/// are rejected, syntax errors report line and column.
/// Raw document; syntax errors are validation errors naming origin:line:col.
nlohmann::ordered_json parse_scenario_document(const std::string& text, const std::string& origin = "<scenario>");
nlohmann::ordered_json load_scenario_document(const std::string& path);

Scenario parse_scenario(const std::string& text, const std::string& origin = "<scenario>");
Scenario load_scenario(const std::string& path);
Scenario scenario_from_json(const nlohmann::ordered_json& doc);

/// Complete echo with every default filled in; parse_scenario of the dump
/// reproduces the scenario.
nlohmann::ordered_json scenario_to_json(const Scenario& s);

Fabrication sample_fabrication(const Scenario& s);
circuit::CircuitState build_circuit(const Scenario& s, const Fabrication& fab);
nlohmann::ordered_json fabrication_to_json(const Fabrication& f);

/// Pump photons per second reaching the filter (pump assumed at the
/// filter resonance wavelength).
double pump_photon_rate(const Scenario& s);

}  // namespace q3
