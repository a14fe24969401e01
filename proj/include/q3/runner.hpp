#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "q3/analysis.hpp"
#include "q3/calibration.hpp"
#include "q3/scenario.hpp"

namespace q3 {

/// Seed for one pipeline stage, derived from the scenario seed so stages
/// and configurations never share a substream.
std::uint64_t stage_seed(std::uint64_t seed, std::uint64_t stage, std::uint64_t index = 0);

enum Stage : std::uint64_t {
    kStageG2 = 100,
    kStageBorn = 200,
    kStageProbe = 300,
    kStageBootstrap = 400,
    kStageMeasure = 500,
};

struct ConfigRun {
    analysis::ConfigCounts counts;  // clicks on the interferometer detector after the settle window
    std::uint64_t photons_generated = 0;
    std::uint64_t filtered_photons = 0;  // signal survivors plus leaked pump
};

/// One blocking configuration through source, filter, circuit and the
/// interferometer SPAD. Exactly `photons` are generated; tags before
/// `discard_s` are dropped (switch settling).
ConfigRun run_config(const Scenario& s, const circuit::CircuitState& state, circuit::BlockingConfig cfg,
                     std::uint64_t photons, double discard_s, std::uint64_t seed);

/// P = (clicks - D T) / N with D the configured dark rate; sigma from the
/// binomial click variance plus the Poisson variance of the subtracted darks.
analysis::Measured measure_config_probability(const Scenario& s, const circuit::CircuitState& state,
                                              circuit::BlockingConfig cfg, std::uint64_t photons,
                                              std::uint64_t seed);

/// Analytic click probability per generated photon on the interferometer
/// detector: |A|^2 times filter survival times detector efficiency.
double expected_click_probability(const Scenario& s, const circuit::CircuitState& state,
                                  circuit::BlockingConfig cfg);

struct CsvTable {
    std::string name;  // file stem
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
};

struct Report {
    nlohmann::ordered_json document;  // schema_version, tool, scenario echo, results
    std::vector<CsvTable> tables;
    double wall_time_s = 0.0;

    /// Document plus wall time; the only non-deterministic field.
    nlohmann::ordered_json to_json() const;
    const nlohmann::ordered_json& results() const { return document.at("results"); }
};

inline constexpr const char* kSchemaVersion = "1.0";
const char* tool_version();

Report run(const Scenario& s);

}  // namespace q3
