#include "q3/mission.hpp"

#include <algorithm>
#include <cmath>
#include <ctime>
#include <numbers>

#include "q3/error.hpp"

namespace q3::mission {

namespace {

constexpr double kDeg = std::numbers::pi / 180.0;

double semi_major_axis_m(double altitude_km) { return (kEarthRadiusKm + altitude_km) * 1e3; }

double gmst_rad(double unix_s) {
    const double jd = unix_s / 86400.0 + 2440587.5;
    const double deg = 280.46061837 + 360.98564736629 * (jd - 2451545.0);
    double r = std::fmod(deg, 360.0);
    if (r < 0.0) r += 360.0;
    return r * kDeg;
}

double above_mask(const OrbitSpec& o, const GroundStation& s, double t) {
    return elevation_deg(o, s, t) - s.min_elevation_deg;
}

double bisect(const OrbitSpec& o, const GroundStation& s, double lo, double hi) {
    // lo and hi bracket a sign change of elevation minus mask.
    const bool rising = above_mask(o, s, lo) < 0.0;
    while (hi - lo > 1e-3) {
        const double mid = 0.5 * (lo + hi);
        const bool up = above_mask(o, s, mid) >= 0.0;
        if (up == rising)
            hi = mid;
        else
            lo = mid;
    }
    return 0.5 * (lo + hi);
}

double peak_elevation(const OrbitSpec& o, const GroundStation& s, double a, double b) {
    // Golden-section search; elevation is unimodal within a pass.
    const double g = 0.5 * (std::sqrt(5.0) - 1.0);
    double c = b - g * (b - a), d = a + g * (b - a);
    double fc = elevation_deg(o, s, c), fd = elevation_deg(o, s, d);
    while (b - a > 0.5) {
        if (fc > fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = elevation_deg(o, s, c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = elevation_deg(o, s, d);
        }
    }
    return std::max(fc, fd);
}

}  // namespace

void OrbitSpec::validate() const {
    if (!(altitude_km > 0.0)) fail(ErrorKind::Parameter, "altitude must be > 0 km");
    if (!(inclination_deg >= 0.0 && inclination_deg <= 180.0))
        fail(ErrorKind::Parameter, "inclination must lie in [0, 180] deg");
}

void GroundStation::validate() const {
    if (!(std::fabs(latitude_deg) <= 90.0)) fail(ErrorKind::Parameter, "station latitude must lie in [-90, 90] deg");
    if (!(min_elevation_deg >= -90.0 && min_elevation_deg < 90.0))
        fail(ErrorKind::Parameter, "elevation mask must lie in [-90, 90) deg");
}

void PowerBudget::validate() const {
    if (!(avg_generation_w >= 0.0 && battery_capacity_wh >= 0.0 && payload_peak_w >= 0.0 && bus_overhead_w >= 0.0))
        fail(ErrorKind::Parameter, "power budget entries must be >= 0");
}

GroundStation berlin() { return {"Berlin", 52.5, 13.4, 0.0}; }
GroundStation longyearbyen() { return {"Longyearbyen", 78.2, 15.6, 0.0}; }

double orbital_period_s(double altitude_km) {
    const double a = semi_major_axis_m(altitude_km);
    return 2.0 * std::numbers::pi * std::sqrt(a * a * a / kMuEarth);
}

double raan_drift_rad_s(double altitude_km, double inclination_deg) {
    const double a = semi_major_axis_m(altitude_km);
    const double n = std::sqrt(kMuEarth / (a * a * a));
    const double re = kEarthRadiusKm * 1e3;
    return -1.5 * n * kJ2 * (re / a) * (re / a) * std::cos(inclination_deg * kDeg);
}

double sso_inclination_deg(double altitude_km) {
    if (!(altitude_km > -kEarthRadiusKm)) fail(ErrorKind::Domain, "altitude below the Earth's centre");
    const double a = semi_major_axis_m(altitude_km);
    const double n = std::sqrt(kMuEarth / (a * a * a));
    const double re = kEarthRadiusKm * 1e3;
    const double target = 2.0 * std::numbers::pi / (kTropicalYearDays * 86400.0);
    const double cos_i = -target / (1.5 * n * kJ2 * (re / a) * (re / a));
    if (!(cos_i >= -1.0 && cos_i <= 0.0))
        fail(ErrorKind::Domain, "no Sun-synchronous inclination exists at altitude " + std::to_string(altitude_km) + " km");
    return std::acos(cos_i) / kDeg;
}

double elevation_deg(const OrbitSpec& o, const GroundStation& s, double t) {
    const double a = semi_major_axis_m(o.altitude_km);
    const double n = std::sqrt(kMuEarth / (a * a * a));
    const double inc = o.inclination_deg * kDeg;
    const double raan = o.raan_deg * kDeg + raan_drift_rad_s(o.altitude_km, o.inclination_deg) * t;
    const double u = n * t;
    const double cu = std::cos(u), su = std::sin(u);
    const double cr = std::cos(raan), sr = std::sin(raan);
    const double ci = std::cos(inc), si = std::sin(inc);
    const double sat[3] = {a * (cu * cr - su * ci * sr), a * (cu * sr + su * ci * cr), a * (su * si)};

    const double theta = gmst_rad(o.epoch_utc_s + t) + s.longitude_deg * kDeg;
    const double lat = s.latitude_deg * kDeg;
    const double re = kEarthRadiusKm * 1e3;
    const double up[3] = {std::cos(lat) * std::cos(theta), std::cos(lat) * std::sin(theta), std::sin(lat)};
    const double rel[3] = {sat[0] - re * up[0], sat[1] - re * up[1], sat[2] - re * up[2]};
    const double range = std::sqrt(rel[0] * rel[0] + rel[1] * rel[1] + rel[2] * rel[2]);
    const double sin_el = (rel[0] * up[0] + rel[1] * up[1] + rel[2] * up[2]) / range;
    return std::asin(std::clamp(sin_el, -1.0, 1.0)) / kDeg;
}

std::vector<PassWindow> predict_passes(const OrbitSpec& orbit, const GroundStation& station, double span_days,
                                       double step_s) {
    orbit.validate();
    station.validate();
    if (!(span_days >= 1.0)) fail(ErrorKind::Parameter, "pass prediction span must be >= 1 day");
    if (!(step_s > 0.0)) fail(ErrorKind::Parameter, "scan step must be > 0 s");
    const double span = span_days * 86400.0;
    // Start one orbit early so a pass in progress at t = 0 keeps its true rise.
    const double start = -orbital_period_s(orbit.altitude_km);
    std::vector<PassWindow> passes;
    double t = start;
    double prev = above_mask(orbit, station, t);
    double rise = std::numeric_limits<double>::quiet_NaN();
    const bool started_up = prev >= 0.0;
    bool skip_first = started_up;
    for (;;) {
        const double next_t = t + step_s;
        const double cur = above_mask(orbit, station, next_t);
        if (prev < 0.0 && cur >= 0.0) {
            rise = bisect(orbit, station, t, next_t);
            skip_first = false;
        } else if (prev >= 0.0 && cur < 0.0 && !skip_first && !std::isnan(rise)) {
            const double set = bisect(orbit, station, t, next_t);
            if (rise >= 0.0 && rise < span) {
                PassWindow w;
                w.rise_s = rise;
                w.set_s = set;
                w.max_elevation_deg = std::max(peak_elevation(orbit, station, rise, set), station.min_elevation_deg);
                passes.push_back(w);
            }
            rise = std::numeric_limits<double>::quiet_NaN();
        } else if (prev >= 0.0 && cur < 0.0) {
            skip_first = false;
        }
        t = next_t;
        prev = cur;
        if (t >= span && std::isnan(rise)) break;
        if (t > span + 2.0 * 86400.0) break;
    }
    return passes;
}

ContactStatistics contact_statistics(const std::vector<PassWindow>& passes, double span_days) {
    if (!(span_days > 0.0)) fail(ErrorKind::Parameter, "span must be > 0 days");
    ContactStatistics s;
    double total = 0.0;
    for (const auto& p : passes) {
        total += p.duration_s();
        s.max_pass_s = std::max(s.max_pass_s, p.duration_s());
    }
    s.passes_per_day = static_cast<double>(passes.size()) / span_days;
    s.minutes_per_day = total / 60.0 / span_days;
    return s;
}

double max_pass_duration_s(double altitude_km) {
    const double lambda = std::acos(kEarthRadiusKm / (kEarthRadiusKm + altitude_km));
    return 2.0 * lambda / (2.0 * std::numbers::pi) * orbital_period_s(altitude_km);
}

double visibility_half_angle_deg(double altitude_km, double min_elevation_deg) {
    const double el = min_elevation_deg * kDeg;
    const double ratio = kEarthRadiusKm / (kEarthRadiusKm + altitude_km);
    return (std::acos(ratio * std::cos(el)) - el) / kDeg;
}

bool latitude_reachable(const OrbitSpec& orbit, const GroundStation& station) {
    const double folded = orbit.inclination_deg <= 90.0 ? orbit.inclination_deg : 180.0 - orbit.inclination_deg;
    return std::fabs(station.latitude_deg) <= folded + visibility_half_angle_deg(orbit.altitude_km, station.min_elevation_deg);
}

EnergyMargin energy_margin(const PowerBudget& budget, double duty, double altitude_km) {
    budget.validate();
    if (!(duty >= 0.0 && duty <= 1.0)) fail(ErrorKind::Parameter, "duty must lie in [0, 1]");
    EnergyMargin m;
    m.orbit_period_s = orbital_period_s(altitude_km);
    const double hours = m.orbit_period_s / 3600.0;
    m.margin_wh = (budget.avg_generation_w - budget.bus_overhead_w - duty * budget.payload_peak_w) * hours;
    m.eclipse_free_draw_wh = duty * budget.payload_peak_w * hours;
    m.depth_of_discharge = budget.battery_capacity_wh > 0.0 ? m.eclipse_free_draw_wh / budget.battery_capacity_wh : 0.0;
    return m;
}

std::string format_utc(double unix_s) {
    const auto t = static_cast<std::time_t>(std::llround(unix_s));
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

}  // namespace q3::mission
