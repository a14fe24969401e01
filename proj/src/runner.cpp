#include "q3/runner.hpp"

#include <chrono>
#include <cmath>

#include "q3/error.hpp"
#include "q3/mission.hpp"
#include "q3/rng.hpp"

#ifndef Q3_VERSION
#define Q3_VERSION "0.0.0"
#endif

namespace q3 {

using json = nlohmann::ordered_json;
using circuit::BlockingConfig;

namespace {

std::string num(double v) { return json(v).dump(); }

json measured(const analysis::Measured& m) { return {{"value", m.value}, {"error", m.error}}; }

calibration::Matrix2d nominal_crosstalk(const Scenario& s) {
    return {{{0.0, s.circuit.crosstalk}, {s.circuit.crosstalk, 0.0}}};
}

json matrix(const calibration::Matrix2d& m) { return json::array({json(m[0]), json(m[1])}); }

json calibration_json(const calibration::CalibrationResult& r, const circuit::CircuitState& truth) {
    json trace = json::array();
    for (const auto& t : r.scan_trace)
        trace.push_back({{"code_b", t.code_b}, {"code_c", t.code_c}, {"measured", t.measured}, {"accepted", t.accepted}});
    const auto tuned = truth.with_codes(r.heater_codes[0], r.heater_codes[1]);
    return {{"heater_codes", r.heater_codes},
            {"heater_currents_ma", {tuned.drive.current_ma(0), tuned.drive.current_ma(1)}},
            {"achieved_power_fraction", r.achieved_power_fraction},
            {"recovered_offsets_rad", r.recovered_offsets},
            {"crosstalk_estimate", matrix(r.crosstalk_estimate)},
            {"grid_points", r.grid_points},
            {"probes_used", r.probes_used},
            {"final_step_rad", r.final_step_rad},
            {"scan_trace", trace}};
}

CsvTable trace_table(const calibration::CalibrationResult& r) {
    CsvTable t{"scan_trace", {"code_b", "code_c", "measured", "accepted"}, {}};
    for (const auto& p : r.scan_trace)
        t.rows.push_back({std::to_string(p.code_b), std::to_string(p.code_c), num(p.measured), p.accepted ? "1" : "0"});
    return t;
}

struct Calibrated {
    calibration::CalibrationResult result;
    std::size_t probes = 0;
};

Calibrated calibrate(const Scenario& s, const circuit::CircuitState& truth) {
    calibration::Prober probe(truth, {s.calibration.counts_per_point, s.calibration.noiseless,
                                      stage_seed(s.seed, kStageProbe)});
    // The model knows the design values but not the fabrication phases.
    auto model = truth;
    for (auto& h : model.heaters) h.phase_offset_rad = 0.0;
    calibration::Matrix2d x = nominal_crosstalk(s);
    if (s.calibration.estimate_crosstalk) x = calibration::estimate_crosstalk(probe, model).estimate;
    const std::size_t before = probe.shots();
    if (s.calibration.budget < before + s.calibration.grid * s.calibration.grid)
        fail(ErrorKind::Budget, "calibration budget " + std::to_string(s.calibration.budget) +
                                    " cannot cover crosstalk probes (" + std::to_string(before) +
                                    ") plus one grid pass");
    calibration::CalibrationOptions opt{s.calibration.grid, s.calibration.budget - before};
    Calibrated c{calibration::calibrate_phases(probe, model, x, opt), 0};
    c.probes = probe.shots();
    return c;
}

json budget(std::uint64_t requested, std::uint64_t simulated) {
    return {{"requested_photons", requested}, {"simulated_photons", simulated}};
}

json run_g2(const Scenario& s, const circuit::CircuitState& truth, std::vector<CsvTable>& tables) {
    const auto src = s.source.make();
    const double pump = s.source.pump_fiber_mw();
    const std::uint64_t seed = stage_seed(s.seed, kStageG2);
    const auto photons = source::generate_photons(src, pump, s.g2.photons, seed);
    const auto filtered = detection::apply_filter(photons, pump_photon_rate(s), s.filter.params, seed);
    // Every switch blocked: the bottom switch routes path C into the 50/50 tap.
    const auto ports = circuit::transmit_stream(truth.configured(BlockingConfig::none()), filtered, seed);
    const auto tags = detection::detect_all(ports, s.detector.make(), seed);
    const double t = ps_to_seconds(photons.duration());
    if (!(t > 0.0)) fail(ErrorKind::Signal, "g2 run has zero duration");
    const auto hist = detection::coincidence_histogram(tags, 1, 2, s.g2.window_ns, s.g2.bin_ps);
    const double ra = static_cast<double>(tags.count(1)) / t;
    const double rb = static_cast<double>(tags.count(2)) / t;
    const auto est = analysis::estimate_g2(hist, ra, rb, t);

    CsvTable h{"histogram", {"bin_start_ps", "count"}, {}};
    CsvTable g{"g2", {"tau_ps", "g2", "stderr"}, {}};
    for (std::size_t k = 0; k < hist.counts.size(); ++k) {
        h.rows.push_back({std::to_string(hist.bin_start(k)), std::to_string(hist.counts[k])});
        g.rows.push_back({std::to_string(est.tau_bins_ps[k]), num(est.g2[k]), num(est.stderr_g2[k])});
    }
    tables.push_back(std::move(h));
    tables.push_back(std::move(g));

    return {{"g2_at_zero", measured(est.g2_at_zero)},
            {"model_g2_at_zero", source::window_averaged_g2(src, pump, static_cast<double>(s.g2.bin_ps) * 1e-3)},
            {"singles_rates", est.singles_rates},
            {"integration_time_s", est.integration_time_s},
            {"bin_ps", est.bin_ps},
            {"window_ns", s.g2.window_ns},
            {"coincidences", hist.total()},
            {"source_mean_rate", source::mean_rate(src, pump)},
            {"tau_bins_ps", est.tau_bins_ps},
            {"g2_values", est.g2},
            {"stderr", est.stderr_g2},
            {"budget", budget(s.g2.photons, photons.size())}};
}

json run_born(const Scenario& s, const circuit::CircuitState& truth, std::vector<CsvTable>& tables) {
    auto state = truth;
    json cal = nullptr;
    if (s.born.calibrate) {
        const auto c = calibrate(s, truth);
        state = truth.with_codes(c.result.heater_codes[0], c.result.heater_codes[1]);
        cal = {{"heater_codes", c.result.heater_codes},
               {"achieved_power_fraction", c.result.achieved_power_fraction},
               {"probes_used", c.probes}};
    }
    const double discard = s.born.settle_discard_factor * s.circuit.settle_time_ms * 1e-3;
    analysis::ConfigTable<analysis::ConfigCounts> table;
    std::uint64_t generated = 0, filtered = 0;
    std::array<double, 8> expected{};
    for (std::size_t i = 0; i < circuit::kAllConfigs.size(); ++i) {
        const auto cfg = circuit::kAllConfigs[i];
        const auto r = run_config(s, state, cfg, s.born.photons_per_config, discard, stage_seed(s.seed, kStageBorn, i));
        table.set(cfg, r.counts);
        generated += r.photons_generated;
        filtered += r.filtered_photons;
        expected[cfg.mask()] = expected_click_probability(s, state, cfg);
    }
    const auto res = analysis::sorkin_from_counts(
        table, {s.born.bootstrap, s.born.resamples, stage_seed(s.seed, kStageBootstrap)});

    json probs = json::object();
    CsvTable t{"configurations", {"config", "clicks", "photons", "duration_s", "probability", "sigma", "expected"}, {}};
    for (auto cfg : res.config_order) {
        const auto& p = res.probabilities[cfg.mask()];
        const auto& c = res.counts[cfg.mask()];
        probs[cfg.label()] = {{"value", p.value},
                              {"error", p.error},
                              {"clicks", c.clicks},
                              {"photons", c.photons},
                              {"duration_s", c.duration_s},
                              {"expected", expected[cfg.mask()]}};
        t.rows.push_back({cfg.label(), std::to_string(c.clicks), std::to_string(c.photons), num(c.duration_s),
                          num(p.value), num(p.error), num(expected[cfg.mask()])});
    }
    tables.push_back(std::move(t));
    json order = json::array();
    for (auto cfg : res.config_order) order.push_back(cfg.label());
    json out = {{"probabilities", probs},
                {"config_order", order},
                {"epsilon", measured(res.epsilon)},
                {"delta", measured(res.delta)},
                {"kappa", measured(res.kappa)},
                {"kappa_significance", res.kappa.error > 0.0 ? res.kappa.value / res.kappa.error : 0.0},
                {"pair_interference", {{"AB", res.pair_interference[0]},
                                       {"AC", res.pair_interference[1]},
                                       {"BC", res.pair_interference[2]}}}};
    if (res.kappa_bootstrap) {
        out["bootstrap"] = {{"resamples", res.bootstrap_resamples},
                            {"epsilon", measured(*res.epsilon_bootstrap)},
                            {"kappa", measured(*res.kappa_bootstrap)}};
    }
    out["calibration"] = cal;
    out["settle_discard_s"] = discard;
    out["photons_after_filter"] = filtered;
    out["leakage_note"] = s.circuit.ideal_switches
                              ? "ideal switches"
                              : "blocked paths leak with unknown fixed phases (see scenario.fabrication)";
    out["budget"] = budget(s.born.photons_per_config * circuit::kAllConfigs.size(), generated);
    return out;
}

json run_calibrate(const Scenario& s, const circuit::CircuitState& truth, std::vector<CsvTable>& tables) {
    const auto c = calibrate(s, truth);
    tables.push_back(trace_table(c.result));
    json out = calibration_json(c.result, truth);
    out["true_offsets_rad"] = {truth.heaters[0].phase_offset_rad, truth.heaters[1].phase_offset_rad};
    out["true_crosstalk"] = matrix(nominal_crosstalk(s));
    out["budget"] = {{"probe_budget", s.calibration.budget}, {"probes_used", c.probes}};
    return out;
}

json run_passes(const Scenario& s, std::vector<CsvTable>& tables) {
    const auto& o = s.mission.orbit;
    json stations = json::array();
    for (const auto& st : s.mission.stations) {
        const auto passes = mission::predict_passes(o, st, s.mission.span_days, s.mission.step_s);
        const auto stats = mission::contact_statistics(passes, s.mission.span_days);
        json list = json::array();
        CsvTable t{"passes_" + st.name, {"rise_utc", "set_utc", "max_elev_deg", "duration_s"}, {}};
        for (const auto& p : passes) {
            const auto rise = mission::format_utc(o.epoch_utc_s + p.rise_s);
            const auto set = mission::format_utc(o.epoch_utc_s + p.set_s);
            list.push_back({{"rise_utc", rise},
                            {"set_utc", set},
                            {"rise_s", p.rise_s},
                            {"set_s", p.set_s},
                            {"max_elev_deg", p.max_elevation_deg},
                            {"duration_s", p.duration_s()}});
            t.rows.push_back({rise, set, num(p.max_elevation_deg), num(p.duration_s())});
        }
        tables.push_back(std::move(t));
        stations.push_back({{"name", st.name},
                            {"latitude_reachable", mission::latitude_reachable(o, st)},
                            {"statistics",
                             {{"passes_per_day", stats.passes_per_day},
                              {"minutes_per_day", stats.minutes_per_day},
                              {"max_pass_s", stats.max_pass_s}}},
                            {"passes", list}});
    }
    json sso = nullptr;
    try {
        sso = mission::sso_inclination_deg(o.altitude_km);
    } catch (const Error&) {
    }
    return {{"orbit",
             {{"period_s", mission::orbital_period_s(o.altitude_km)},
              {"altitude_compliant", o.altitude_compliant()},
              {"sso_inclination_deg", sso},
              {"raan_drift_deg_per_day",
               mission::raan_drift_rad_s(o.altitude_km, o.inclination_deg) * 86400.0 * 180.0 / 3.141592653589793},
              {"max_pass_bound_s", mission::max_pass_duration_s(o.altitude_km)}}},
            {"span_days", s.mission.span_days},
            {"stations", stations}};
}

json run_power(const Scenario& s, std::vector<CsvTable>& tables) {
    CsvTable t{"energy", {"duty", "margin_wh", "no_generation_draw_wh", "depth_of_discharge"}, {}};
    json rows = json::array();
    double period = mission::orbital_period_s(s.mission.orbit.altitude_km);
    for (double d : s.power.duties) {
        const auto m = mission::energy_margin(s.power.budget, d, s.mission.orbit.altitude_km);
        rows.push_back({{"duty", d},
                        {"margin_wh", m.margin_wh},
                        {"no_generation_draw_wh", m.eclipse_free_draw_wh},
                        {"depth_of_discharge", m.depth_of_discharge}});
        t.rows.push_back({num(d), num(m.margin_wh), num(m.eclipse_free_draw_wh), num(m.depth_of_discharge)});
    }
    tables.push_back(std::move(t));
    return {{"orbit_period_s", period}, {"energy", rows}};
}

json run_analyze(const Scenario& s, std::vector<CsvTable>&) {
    const auto table = analysis::read_count_table(s.input);
    const auto res = analysis::sorkin_from_counts(
        table, {s.born.bootstrap, s.born.resamples, stage_seed(s.seed, kStageBootstrap)});
    json probs = json::object();
    for (auto cfg : res.config_order) {
        const auto& p = res.probabilities[cfg.mask()];
        probs[cfg.label()] = {{"value", p.value}, {"error", p.error}, {"clicks", res.counts[cfg.mask()].clicks},
                              {"photons", res.counts[cfg.mask()].photons}};
    }
    json out = {{"input", s.input},
                {"probabilities", probs},
                {"epsilon", measured(res.epsilon)},
                {"delta", measured(res.delta)},
                {"kappa", measured(res.kappa)}};
    if (res.kappa_bootstrap)
        out["bootstrap"] = {{"resamples", res.bootstrap_resamples}, {"kappa", measured(*res.kappa_bootstrap)}};
    return out;
}

}  // namespace

std::uint64_t stage_seed(std::uint64_t seed, std::uint64_t stage, std::uint64_t index) {
    return Rng(seed, 0x5EED0000ULL + stage, index).next_u64();
}

const char* tool_version() { return Q3_VERSION; }

ConfigRun run_config(const Scenario& s, const circuit::CircuitState& state, BlockingConfig cfg,
                     std::uint64_t photons, double discard_s, std::uint64_t seed) {
    const auto src = s.source.make();
    const double pump = s.source.pump_fiber_mw();
    // The measured photons follow the settle window; light arriving while
    // the switches settle never reaches the counts, so only the window's
    // darks and pump leakage are simulated there.
    const Picoseconds start = seconds_to_ps(discard_s);
    auto stream = source::generate_photons(src, pump, photons, seed);
    for (auto& t : stream.mutable_times()) t += start;
    stream.set_duration(stream.duration() + start);

    const auto filtered = detection::apply_filter(stream, pump_photon_rate(s), s.filter.params, seed);
    const auto ports = circuit::transmit_stream(state.configured(cfg), filtered, seed);
    // Only the interferometer output is detected here.
    auto sys = s.detector.make();
    const auto clicks = circuit::discard_settle_window(
        detection::spad_detect(ports[0], sys.spads[0], stream.duration(), seed, sys.test_mode), 0, start);

    ConfigRun r;
    r.photons_generated = stream.size();
    r.filtered_photons = filtered.size();
    r.counts.photons = stream.size();
    r.counts.clicks = clicks.size();
    r.counts.duration_s = ps_to_seconds(stream.duration() - start);
    return r;
}

analysis::Measured measure_config_probability(const Scenario& s, const circuit::CircuitState& state,
                                              BlockingConfig cfg, std::uint64_t photons, std::uint64_t seed) {
    if (photons == 0) fail(ErrorKind::Parameter, "photon count must be > 0");
    const auto r = run_config(s, state, cfg, photons, 0.0, seed);
    const double n = static_cast<double>(r.counts.photons);
    const double dark = s.detector.dark_rate * r.counts.duration_s;
    const double raw = static_cast<double>(r.counts.clicks) / n;
    const double p = (static_cast<double>(r.counts.clicks) - dark) / n;
    const double var = std::max(raw * (1.0 - raw), 0.0) / n + dark / (n * n);
    return {p, std::sqrt(var)};
}

double expected_click_probability(const Scenario& s, const circuit::CircuitState& state, BlockingConfig cfg) {
    return circuit::port_probabilities(state.configured(cfg))[0] * s.filter.params.survival_probability() *
           s.detector.efficiency;
}

json Report::to_json() const {
    json j = document;
    j["wall_time_s"] = wall_time_s;
    return j;
}

Report run(const Scenario& s) {
    const auto t0 = std::chrono::steady_clock::now();
    s.validate();
    Report rep;
    json scenario = scenario_to_json(s);
    Fabrication fab = sample_fabrication(s);
    const bool photonic = s.experiment == Experiment::G2 || s.experiment == Experiment::Born ||
                          s.experiment == Experiment::Calibrate;
    circuit::CircuitState truth;
    if (photonic) {
        truth = build_circuit(s, fab);
        scenario["fabrication"] = fabrication_to_json(fab);
    }
    json results;
    try {
        switch (s.experiment) {
            case Experiment::G2: results = run_g2(s, truth, rep.tables); break;
            case Experiment::Born: results = run_born(s, truth, rep.tables); break;
            case Experiment::Calibrate: results = run_calibrate(s, truth, rep.tables); break;
            case Experiment::Passes: results = run_passes(s, rep.tables); break;
            case Experiment::Power: results = run_power(s, rep.tables); break;
            case Experiment::Analyze: results = run_analyze(s, rep.tables); break;
        }
    } catch (const ValidationError&) {
        throw;
    } catch (const Error& e) {
        throw Error(e.kind(), std::string(to_string(s.experiment)) + " experiment: " + e.what());
    }
    rep.document["schema_version"] = kSchemaVersion;
    rep.document["tool"] = {{"name", "q3sim"}, {"version", tool_version()}};
    rep.document["experiment"] = to_string(s.experiment);
    rep.document["scenario"] = std::move(scenario);
    rep.document["results"] = std::move(results);
    rep.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return rep;
}

}  // namespace q3
