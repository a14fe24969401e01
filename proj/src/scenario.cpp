#include "q3/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <limits>
#include <numbers>
#include <set>
#include <sstream>

#include "q3/error.hpp"
#include "q3/rng.hpp"

namespace q3 {

using json = nlohmann::ordered_json;

namespace {

constexpr double kPlanck = 6.62607015e-34;
constexpr double kLight = 299792458.0;

[[noreturn]] void reject(const std::string& field, const std::string& what) {
    throw ValidationError(field + ": " + what);
}

/// Walks one JSON object, hands out typed values with defaults and
/// remembers which keys were consumed so leftovers can be rejected.
class Section {
public:
    Section(const json& node, std::string path) : node_(node), path_(std::move(path)) {
        if (!node_.is_object()) reject(path_.empty() ? "<root>" : path_, "expected an object");
    }

    std::string field(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

    const json* find(const std::string& key) {
        seen_.insert(key);
        auto it = node_.find(key);
        return it == node_.end() ? nullptr : &*it;
    }

    void number(const std::string& key, double& out) {
        if (const json* v = find(key)) {
            if (!v->is_number()) reject(field(key), "expected a number");
            out = v->get<double>();
        }
    }
    void boolean(const std::string& key, bool& out) {
        if (const json* v = find(key)) {
            if (!v->is_boolean()) reject(field(key), "expected true or false");
            out = v->get<bool>();
        }
    }
    void text(const std::string& key, std::string& out) {
        if (const json* v = find(key)) {
            if (!v->is_string()) reject(field(key), "expected a string");
            out = v->get<std::string>();
        }
    }
    template <class U>
    void unsigned_int(const std::string& key, U& out) {
        if (const json* v = find(key)) {
            if (v->is_number_unsigned()) {
                out = static_cast<U>(v->get<std::uint64_t>());
            } else if (v->is_number_integer()) {
                if (v->get<std::int64_t>() < 0) reject(field(key), "expected a non-negative integer");
                out = static_cast<U>(v->get<std::int64_t>());
            } else if (v->is_number_float()) {
                // Accept 1e7-style literals when they are whole numbers.
                const double d = v->get<double>();
                if (!(d >= 0.0 && d == std::floor(d) && d < 1.8e19)) reject(field(key), "expected a non-negative integer");
                out = static_cast<U>(d);
            } else {
                reject(field(key), "expected a non-negative integer");
            }
            if (static_cast<std::uint64_t>(out) > static_cast<std::uint64_t>(std::numeric_limits<U>::max()))
                reject(field(key), "integer out of range");
        }
    }
    void number_list(const std::string& key, std::vector<double>& out) {
        if (const json* v = find(key)) {
            if (!v->is_array()) reject(field(key), "expected an array of numbers");
            out.clear();
            for (const auto& e : *v) {
                if (!e.is_number()) reject(field(key), "expected an array of numbers");
                out.push_back(e.get<double>());
            }
        }
    }
    /// Array of numbers, or the string "random" for a per-seed draw.
    void optional_list(const std::string& key, std::optional<std::vector<double>>& out) {
        if (const json* v = find(key)) {
            if (v->is_string() && v->get<std::string>() == "random") {
                out.reset();
                return;
            }
            std::vector<double> list;
            number_list(key, list);
            out = std::move(list);
        }
    }
    bool has_section(const std::string& key) {
        const json* v = find(key);
        return v != nullptr;
    }
    Section sub(const std::string& key) {
        static const json kEmpty = json::object();
        const json* v = find(key);
        return Section(v ? *v : kEmpty, field(key));
    }

    void finish() const {
        for (auto it = node_.begin(); it != node_.end(); ++it)
            if (!seen_.count(it.key())) reject(field(it.key()), "unknown key");
    }

private:
    const json& node_;
    std::string path_;
    std::set<std::string> seen_;
};

void require(bool ok, const std::string& field, const std::string& bound) {
    if (!ok) reject(field, bound);
}

// Library validators report bounds without a field path; prefix it.
template <class F>
void checked(const std::string& field, F&& f) {
    try {
        f();
    } catch (const Error& e) {
        reject(field, e.what());
    }
}

double parse_epoch(const json& v, const std::string& field) {
    if (v.is_number()) return v.get<double>();
    if (!v.is_string()) reject(field, "expected UTC seconds or an ISO-8601 string");
    std::tm tm{};
    std::istringstream in(v.get<std::string>());
    in >> std::get_time(&tm, "%Y-%m-%dT%H:%M:%S");
    if (in.fail()) reject(field, "expected YYYY-MM-DDTHH:MM:SSZ");
    return static_cast<double>(timegm(&tm));
}

mission::GroundStation parse_station(const json& v, const std::string& field) {
    if (v.is_string()) {
        const auto name = v.get<std::string>();
        if (name == "berlin" || name == "Berlin") return mission::berlin();
        if (name == "longyearbyen" || name == "Longyearbyen") return mission::longyearbyen();
        reject(field, "unknown station '" + name + "' (use berlin, longyearbyen or an object)");
    }
    Section s(v, field);
    mission::GroundStation g;
    s.text("name", g.name);
    s.number("latitude_deg", g.latitude_deg);
    s.number("longitude_deg", g.longitude_deg);
    s.number("min_elevation_deg", g.min_elevation_deg);
    s.finish();
    return g;
}

}  // namespace

const char* to_string(Experiment e) {
    switch (e) {
        case Experiment::G2: return "g2";
        case Experiment::Born: return "born";
        case Experiment::Calibrate: return "calibrate";
        case Experiment::Passes: return "passes";
        case Experiment::Power: return "power";
        case Experiment::Analyze: return "analyze";
    }
    return "?";
}

Experiment parse_experiment(const std::string& name) {
    for (auto e : {Experiment::G2, Experiment::Born, Experiment::Calibrate, Experiment::Passes, Experiment::Power,
                   Experiment::Analyze})
        if (name == to_string(e)) return e;
    reject("experiment", "unknown experiment '" + name + "' (g2, born, calibrate, passes, power, analyze)");
}

source::SourceKind SourceConfig::make() const {
    if (kind == "emitter") return source::TwoLevelEmitter{emitter};
    if (kind == "wcp_cw") return wcp_cw;
    if (kind == "wcp_pulsed") return wcp_pulsed;
    reject("source.kind", "unknown source kind '" + kind + "' (emitter, wcp_cw, wcp_pulsed)");
}

double SourceConfig::pump_fiber_mw() const { return source::pump_power(laser, pump_current_ma).fiber_mw; }

detection::DetectorSystem DetectorConfig::make() const {
    detection::DetectorSystem sys;
    for (std::size_t i = 0; i < sys.spads.size(); ++i)
        sys.spads[i] = {efficiency, dark_rate, dead_time_ns, jitter_fwhm_ps, static_cast<std::uint8_t>(i)};
    sys.peak_power_w = peak_power_w;
    sys.timebin_resolution_ps = timebin_resolution_ps;
    sys.test_mode = test_mode;
    return sys;
}

void Scenario::validate() const {
    checked("source.laser", [&] { source.laser.validate(); });
    require(source.pump_current_ma >= 0.0 && source.pump_current_ma <= source.laser.max_current_ma,
            "source.pump_current_ma", "must lie in [0, laser.max_current_ma]");
    checked("source", [&] { source::validate(source.make()); });

    const auto& c = circuit;
    require(c.divider_first >= 0.0 && c.divider_first <= 1.0, "circuit.divider_first", "must lie in [0, 1]");
    require(c.divider_second >= 0.0 && c.divider_second <= 1.0, "circuit.divider_second", "must lie in [0, 1]");
    require(c.hbt_tap >= 0.0 && c.hbt_tap <= 1.0, "circuit.hbt_tap", "must lie in [0, 1]");
    require(c.ratio_error >= 0.0 && c.ratio_error <= 0.5, "circuit.ratio_error", "must lie in [0, 0.5]");
    require(c.extinction_db >= 0.0, "circuit.extinction_db", "must be >= 0 dB");
    require(c.settle_time_ms >= 0.0, "circuit.settle_time_ms", "must be >= 0 ms");
    require(c.insertion_loss_db >= 0.0, "circuit.insertion_loss_db", "must be >= 0 dB");
    require(c.resistance_ohm.size() == 2, "circuit.resistance_ohm", "expected two entries");
    require(c.p2pi_mw.size() == 2, "circuit.p2pi_mw", "expected two entries");
    for (double r : c.resistance_ohm) require(r >= 70.0 && r <= 110.0, "circuit.resistance_ohm", "must lie in [70, 110] ohm");
    for (double p : c.p2pi_mw) require(p > 0.0, "circuit.p2pi_mw", "must be > 0 mW");
    require(c.crosstalk >= 0.0 && c.crosstalk <= 0.05, "circuit.crosstalk", "must lie in [0, 0.05]");
    if (c.phase_offsets_rad)
        require(c.phase_offsets_rad->size() == 2, "circuit.phase_offsets_rad", "expected two entries");
    if (c.leakage_phases_rad)
        require(c.leakage_phases_rad->size() == 3, "circuit.leakage_phases_rad", "expected three entries");
    require(c.third_order_injection >= 0.0, "circuit.third_order_injection", "must be >= 0");
    require(c.current_resolution_ua > 0.0, "circuit.current_resolution_ua", "must be > 0");
    require(c.max_current_ma > 0.0, "circuit.max_current_ma", "must be > 0");
    for (std::size_t k = 0; k < 2; ++k)
        require(c.max_current_ma * c.max_current_ma * c.resistance_ohm[k] * 1e-3 >= c.p2pi_mw[k], "circuit.p2pi_mw",
                "2 pi must be reachable within max_current_ma");

    checked("filter", [&] { filter.params.validate(); });
    require(filter.pump_transmission >= 0.0 && filter.pump_transmission <= 1.0, "filter.pump_transmission",
            "must lie in [0, 1]");
    const auto bound = detector.test_mode ? std::string("[0, 1]") : std::string("[0, 0.5]");
    require(detector.efficiency >= 0.0 && detector.efficiency <= (detector.test_mode ? 1.0 : 0.5),
            "detector.efficiency", "efficiency must lie in " + bound);
    checked("detector", [&] { detector.make().validate(); });

    require(g2.photons > 0, "g2.photons", "must be > 0");
    require(g2.window_ns > 0.0, "g2.window_ns", "must be > 0 ns");
    require(g2.bin_ps > 0, "g2.bin_ps", "must be > 0 ps");
    require(born.photons_per_config > 0, "born.photons_per_config", "must be > 0");
    require(born.settle_discard_factor >= 0.0, "born.settle_discard_factor", "must be >= 0");
    require(born.resamples > 0, "born.resamples", "must be > 0");
    require(calibration.grid >= 2, "calibration.grid", "must be >= 2");
    require(calibration.counts_per_point > 0.0, "calibration.counts_per_point", "must be > 0");

    checked("mission.orbit", [&] { mission.orbit.validate(); });
    for (std::size_t i = 0; i < mission.stations.size(); ++i)
        checked("mission.stations[" + std::to_string(i) + "]", [&] { mission.stations[i].validate(); });
    require(mission.span_days >= 1.0, "mission.span_days", "must be >= 1 day");
    require(mission.step_s > 0.0 && mission.step_s <= 60.0, "mission.step_s", "must lie in (0, 60] s");
    if (strict_mission) {
        require(mission.orbit.altitude_compliant(), "mission.orbit.altitude_km",
                "altitude " + (std::ostringstream() << mission.orbit.altitude_km).str() + " km outside the mission window [487, 604] km");
        require(mission.orbit.inclination_deg >= mission::kMinInclinationDeg, "mission.orbit.inclination_deg",
                "inclination below the mission minimum of 64 deg");
    }
    checked("power.budget", [&] { power.budget.validate(); });
    for (double d : power.duties) require(d >= 0.0 && d <= 1.0, "power.duties", "duty must lie in [0, 1]");
    if (experiment == Experiment::Analyze) require(!input.empty(), "input", "analyze needs a count table path");
}

Scenario scenario_from_json(const json& doc) {
    Scenario s;
    Section root(doc, "");
    {
        std::string name = to_string(s.experiment);
        root.text("experiment", name);
        s.experiment = parse_experiment(name);
    }
    root.unsigned_int("seed", s.seed);
    root.text("input", s.input);
    root.boolean("strict_mission", s.strict_mission);

    {
        auto src = root.sub("source");
        src.text("kind", s.source.kind);
        src.number("pump_current_ma", s.source.pump_current_ma);
        auto laser = src.sub("laser");
        laser.number("threshold_current_ma", s.source.laser.threshold_current_ma);
        laser.number("slope_efficiency_mw_per_ma", s.source.laser.slope_efficiency_mw_per_ma);
        laser.number("max_current_ma", s.source.laser.max_current_ma);
        laser.number("fiber_coupling", s.source.laser.fiber_coupling);
        laser.number("current_stability_ua", s.source.laser.current_stability_ua);
        laser.finish();
        auto em = src.sub("emitter");
        em.number("lifetime_ns", s.source.emitter.lifetime_ns);
        em.number("saturation_power_mw", s.source.emitter.saturation_power_mw);
        em.number("max_emission_rate", s.source.emitter.max_emission_rate);
        em.number("background_fraction", s.source.emitter.background_fraction);
        em.number("wavelength_nm", s.source.emitter.wavelength_nm);
        em.finish();
        auto cw = src.sub("wcp_cw");
        cw.number("mean_rate", s.source.wcp_cw.mean_rate);
        cw.finish();
        auto pl = src.sub("wcp_pulsed");
        pl.number("rep_rate_hz", s.source.wcp_pulsed.rep_rate_hz);
        pl.number("mean_photon_number", s.source.wcp_pulsed.mean_photon_number);
        pl.finish();
        src.finish();
    }
    {
        auto c = root.sub("circuit");
        auto& cc = s.circuit;
        c.number("divider_first", cc.divider_first);
        c.number("divider_second", cc.divider_second);
        c.number("hbt_tap", cc.hbt_tap);
        c.number("ratio_error", cc.ratio_error);
        c.boolean("perturb_ratios", cc.perturb_ratios);
        c.boolean("ideal_switches", cc.ideal_switches);
        c.number("extinction_db", cc.extinction_db);
        c.number("settle_time_ms", cc.settle_time_ms);
        c.number("insertion_loss_db", cc.insertion_loss_db);
        c.number_list("resistance_ohm", cc.resistance_ohm);
        c.number_list("p2pi_mw", cc.p2pi_mw);
        c.number("crosstalk", cc.crosstalk);
        c.optional_list("phase_offsets_rad", cc.phase_offsets_rad);
        c.optional_list("leakage_phases_rad", cc.leakage_phases_rad);
        c.number("third_order_injection", cc.third_order_injection);
        c.number("current_resolution_ua", cc.current_resolution_ua);
        c.number("max_current_ma", cc.max_current_ma);
        c.finish();
    }
    {
        auto f = root.sub("filter");
        f.number("pump_suppression_db", s.filter.params.pump_suppression_db);
        f.number("broadband_loss_db", s.filter.params.broadband_loss_db);
        f.number("resonance_wavelength_nm", s.filter.params.resonance_wavelength_nm);
        f.number("bandwidth_pm", s.filter.params.bandwidth_pm);
        f.number("pump_transmission", s.filter.pump_transmission);
        f.finish();
    }
    {
        auto d = root.sub("detector");
        d.number("efficiency", s.detector.efficiency);
        d.number("dark_rate", s.detector.dark_rate);
        d.number("dead_time_ns", s.detector.dead_time_ns);
        d.number("jitter_fwhm_ps", s.detector.jitter_fwhm_ps);
        d.boolean("test_mode", s.detector.test_mode);
        d.number("peak_power_w", s.detector.peak_power_w);
        d.number("timebin_resolution_ps", s.detector.timebin_resolution_ps);
        d.finish();
    }
    {
        auto g = root.sub("g2");
        g.unsigned_int("photons", s.g2.photons);
        g.number("window_ns", s.g2.window_ns);
        std::uint64_t bin = static_cast<std::uint64_t>(s.g2.bin_ps);
        g.unsigned_int("bin_ps", bin);
        s.g2.bin_ps = static_cast<std::int64_t>(bin);
        g.finish();
    }
    {
        auto b = root.sub("born");
        b.unsigned_int("photons_per_config", s.born.photons_per_config);
        b.number("settle_discard_factor", s.born.settle_discard_factor);
        b.boolean("calibrate", s.born.calibrate);
        b.boolean("bootstrap", s.born.bootstrap);
        b.unsigned_int("resamples", s.born.resamples);
        b.finish();
    }
    {
        auto c = root.sub("calibration");
        c.unsigned_int("grid", s.calibration.grid);
        c.unsigned_int("budget", s.calibration.budget);
        c.number("counts_per_point", s.calibration.counts_per_point);
        c.boolean("noiseless", s.calibration.noiseless);
        c.boolean("estimate_crosstalk", s.calibration.estimate_crosstalk);
        c.finish();
    }
    {
        auto m = root.sub("mission");
        auto o = m.sub("orbit");
        o.number("altitude_km", s.mission.orbit.altitude_km);
        o.number("inclination_deg", s.mission.orbit.inclination_deg);
        o.number("raan_deg", s.mission.orbit.raan_deg);
        if (const json* e = o.find("epoch")) s.mission.orbit.epoch_utc_s = parse_epoch(*e, o.field("epoch"));
        o.finish();
        if (const json* st = m.find("stations")) {
            if (!st->is_array()) reject("mission.stations", "expected an array");
            s.mission.stations.clear();
            for (std::size_t i = 0; i < st->size(); ++i)
                s.mission.stations.push_back(parse_station((*st)[i], "mission.stations[" + std::to_string(i) + "]"));
        }
        m.number("span_days", s.mission.span_days);
        m.number("step_s", s.mission.step_s);
        m.finish();
    }
    {
        auto p = root.sub("power");
        p.number("avg_generation_w", s.power.budget.avg_generation_w);
        p.number("battery_capacity_wh", s.power.budget.battery_capacity_wh);
        p.number("payload_peak_w", s.power.budget.payload_peak_w);
        p.number("bus_overhead_w", s.power.budget.bus_overhead_w);
        p.number_list("duties", s.power.duties);
        p.finish();
    }
    root.finish();
    s.validate();
    return s;
}

json parse_scenario_document(const std::string& text, const std::string& origin) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        std::size_t line = 1, col = 1;
        const std::size_t end = std::min<std::size_t>(e.byte == 0 ? 0 : e.byte - 1, text.size());
        for (std::size_t i = 0; i < end; ++i) {
            if (text[i] == '\n') {
                ++line;
                col = 1;
            } else {
                ++col;
            }
        }
        std::string msg = e.what();
        if (auto p = msg.find("syntax error"); p != std::string::npos) msg = msg.substr(p);
        throw ValidationError(origin + ":" + std::to_string(line) + ":" + std::to_string(col) + ": " + msg);
    }
    return doc;
}

json load_scenario_document(const std::string& path) {
    std::ifstream in(path);
    if (!in) fail(ErrorKind::Io, "cannot open scenario '" + path + "'");
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_scenario_document(buf.str(), path);
}

Scenario parse_scenario(const std::string& text, const std::string& origin) {
    return scenario_from_json(parse_scenario_document(text, origin));
}

Scenario load_scenario(const std::string& path) { return scenario_from_json(load_scenario_document(path)); }

json scenario_to_json(const Scenario& s) {
    json j;
    j["experiment"] = to_string(s.experiment);
    j["seed"] = s.seed;
    if (!s.input.empty()) j["input"] = s.input;
    j["strict_mission"] = s.strict_mission;
    const auto& src = s.source;
    j["source"] = {
        {"kind", src.kind},
        {"pump_current_ma", src.pump_current_ma},
        {"laser",
         {{"threshold_current_ma", src.laser.threshold_current_ma},
          {"slope_efficiency_mw_per_ma", src.laser.slope_efficiency_mw_per_ma},
          {"max_current_ma", src.laser.max_current_ma},
          {"fiber_coupling", src.laser.fiber_coupling},
          {"current_stability_ua", src.laser.current_stability_ua}}},
        {"emitter",
         {{"lifetime_ns", src.emitter.lifetime_ns},
          {"saturation_power_mw", src.emitter.saturation_power_mw},
          {"max_emission_rate", src.emitter.max_emission_rate},
          {"background_fraction", src.emitter.background_fraction},
          {"wavelength_nm", src.emitter.wavelength_nm}}},
        {"wcp_cw", {{"mean_rate", src.wcp_cw.mean_rate}}},
        {"wcp_pulsed",
         {{"rep_rate_hz", src.wcp_pulsed.rep_rate_hz}, {"mean_photon_number", src.wcp_pulsed.mean_photon_number}}},
    };
    const auto& c = s.circuit;
    json circ = {
        {"divider_first", c.divider_first},
        {"divider_second", c.divider_second},
        {"hbt_tap", c.hbt_tap},
        {"ratio_error", c.ratio_error},
        {"perturb_ratios", c.perturb_ratios},
        {"ideal_switches", c.ideal_switches},
        {"extinction_db", c.extinction_db},
        {"settle_time_ms", c.settle_time_ms},
        {"insertion_loss_db", c.insertion_loss_db},
        {"resistance_ohm", c.resistance_ohm},
        {"p2pi_mw", c.p2pi_mw},
        {"crosstalk", c.crosstalk},
    };
    circ["phase_offsets_rad"] = c.phase_offsets_rad ? json(*c.phase_offsets_rad) : json("random");
    circ["leakage_phases_rad"] = c.leakage_phases_rad ? json(*c.leakage_phases_rad) : json("random");
    circ["third_order_injection"] = c.third_order_injection;
    circ["current_resolution_ua"] = c.current_resolution_ua;
    circ["max_current_ma"] = c.max_current_ma;
    j["circuit"] = std::move(circ);
    j["filter"] = {{"pump_suppression_db", s.filter.params.pump_suppression_db},
                   {"broadband_loss_db", s.filter.params.broadband_loss_db},
                   {"resonance_wavelength_nm", s.filter.params.resonance_wavelength_nm},
                   {"bandwidth_pm", s.filter.params.bandwidth_pm},
                   {"pump_transmission", s.filter.pump_transmission}};
    j["detector"] = {{"efficiency", s.detector.efficiency},
                     {"dark_rate", s.detector.dark_rate},
                     {"dead_time_ns", s.detector.dead_time_ns},
                     {"jitter_fwhm_ps", s.detector.jitter_fwhm_ps},
                     {"test_mode", s.detector.test_mode},
                     {"peak_power_w", s.detector.peak_power_w},
                     {"timebin_resolution_ps", s.detector.timebin_resolution_ps}};
    j["g2"] = {{"photons", s.g2.photons}, {"window_ns", s.g2.window_ns}, {"bin_ps", s.g2.bin_ps}};
    j["born"] = {{"photons_per_config", s.born.photons_per_config},
                 {"settle_discard_factor", s.born.settle_discard_factor},
                 {"calibrate", s.born.calibrate},
                 {"bootstrap", s.born.bootstrap},
                 {"resamples", s.born.resamples}};
    j["calibration"] = {{"grid", s.calibration.grid},
                        {"budget", s.calibration.budget},
                        {"counts_per_point", s.calibration.counts_per_point},
                        {"noiseless", s.calibration.noiseless},
                        {"estimate_crosstalk", s.calibration.estimate_crosstalk}};
    json stations = json::array();
    for (const auto& g : s.mission.stations)
        stations.push_back({{"name", g.name},
                            {"latitude_deg", g.latitude_deg},
                            {"longitude_deg", g.longitude_deg},
                            {"min_elevation_deg", g.min_elevation_deg}});
    j["mission"] = {{"orbit",
                     {{"altitude_km", s.mission.orbit.altitude_km},
                      {"inclination_deg", s.mission.orbit.inclination_deg},
                      {"raan_deg", s.mission.orbit.raan_deg},
                      {"epoch", mission::format_utc(s.mission.orbit.epoch_utc_s)}}},
                    {"stations", stations},
                    {"span_days", s.mission.span_days},
                    {"step_s", s.mission.step_s}};
    j["power"] = {{"avg_generation_w", s.power.budget.avg_generation_w},
                  {"battery_capacity_wh", s.power.budget.battery_capacity_wh},
                  {"payload_peak_w", s.power.budget.payload_peak_w},
                  {"bus_overhead_w", s.power.budget.bus_overhead_w},
                  {"duties", s.power.duties}};
    return j;
}

Fabrication sample_fabrication(const Scenario& s) {
    Rng rng(s.seed, Stream::Fabrication);
    Fabrication f;
    const double two_pi = 2.0 * std::numbers::pi;
    // Draw every value unconditionally so overriding one leaves the others unchanged.
    std::vector<double> phases{rng.uniform(0.0, two_pi), rng.uniform(0.0, two_pi)};
    std::vector<double> leak{rng.uniform(0.0, two_pi), rng.uniform(0.0, two_pi), rng.uniform(0.0, two_pi)};
    std::array<double, 3> dev{rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0)};
    f.phase_offsets_rad = s.circuit.phase_offsets_rad ? *s.circuit.phase_offsets_rad : phases;
    f.leakage_phases_rad = s.circuit.leakage_phases_rad ? *s.circuit.leakage_phases_rad : leak;
    const double e = s.circuit.perturb_ratios ? s.circuit.ratio_error : 0.0;
    auto clamp01 = [](double x) { return std::clamp(x, 0.0, 1.0); };
    f.divider_first = clamp01(s.circuit.divider_first + e * dev[0]);
    f.divider_second = clamp01(s.circuit.divider_second + e * dev[1]);
    f.hbt_tap = clamp01(s.circuit.hbt_tap + e * dev[2]);
    return f;
}

circuit::CircuitState build_circuit(const Scenario& s, const Fabrication& fab) {
    const auto& c = s.circuit;
    circuit::CircuitState st;
    st.divider_first = {fab.divider_first, c.ratio_error};
    st.divider_second = {fab.divider_second, c.ratio_error};
    st.hbt_tap = {fab.hbt_tap, c.ratio_error};
    for (std::size_t p = 0; p < 3; ++p) {
        st.switches[p].extinction_db = c.ideal_switches ? std::numeric_limits<double>::infinity() : c.extinction_db;
        st.switches[p].settle_time_ms = c.settle_time_ms;
        st.switches[p].leakage_phase_rad = fab.leakage_phases_rad[p];
    }
    st.heaters.resize(2);
    for (std::size_t k = 0; k < 2; ++k) {
        st.heaters[k].resistance_ohm = c.resistance_ohm[k];
        st.heaters[k].p2pi_mw = c.p2pi_mw[k];
        st.heaters[k].phase_offset_rad = fab.phase_offsets_rad[k];
        st.heaters[k].crosstalk_row = {0.0, 0.0};
        st.heaters[k].crosstalk_row[1 - k] = c.crosstalk;
    }
    st.drive.current_resolution_ua = c.current_resolution_ua;
    st.drive.max_current_ma = c.max_current_ma;
    st.insertion_loss_db = c.insertion_loss_db;
    st.third_order_injection = c.third_order_injection;
    checked("circuit", [&] { st.validate(); });
    return st;
}

json fabrication_to_json(const Fabrication& f) {
    return {{"phase_offsets_rad", f.phase_offsets_rad},
            {"leakage_phases_rad", f.leakage_phases_rad},
            {"divider_first", f.divider_first},
            {"divider_second", f.divider_second},
            {"hbt_tap", f.hbt_tap}};
}

/// Pump photon flux in the fibre at the filter's resonance wavelength.
double pump_photon_rate(const Scenario& s) {
    const double energy = kPlanck * kLight / (s.filter.params.resonance_wavelength_nm * 1e-9);
    return s.source.pump_fiber_mw() * 1e-3 / energy * s.filter.pump_transmission;
}

}  // namespace q3
