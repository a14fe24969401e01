#pragma once

#include <string>
#include <vector>

namespace q3::mission {

inline constexpr double kEarthRadiusKm = 6371.0;
inline constexpr double kMuEarth = 3.986004418e14;      // m^3/s^2
inline constexpr double kJ2 = 1.08263e-3;
inline constexpr double kEarthRotation = 7.2921159e-5;  // rad/s, sidereal
inline constexpr double kTropicalYearDays = 365.2422;
inline constexpr double kMinCompliantAltitudeKm = 487.0;
inline constexpr double kMaxCompliantAltitudeKm = 604.0;
inline constexpr double kMinInclinationDeg = 64.0;

struct OrbitSpec {
    double altitude_km = 550.0;
    double inclination_deg = 64.0;
    double raan_deg = 0.0;
    double epoch_utc_s = 1767225600.0;  // 2026-01-01T00:00:00Z

    bool altitude_compliant() const {
        return altitude_km >= kMinCompliantAltitudeKm && altitude_km <= kMaxCompliantAltitudeKm;
    }
    void validate() const;
};

struct GroundStation {
    std::string name;
    double latitude_deg = 0.0;
    double longitude_deg = 0.0;
    double min_elevation_deg = 0.0;

    void validate() const;
};

GroundStation berlin();
GroundStation longyearbyen();

struct PassWindow {
    double rise_s = 0.0;  // seconds after the orbit epoch
    double set_s = 0.0;
    double max_elevation_deg = 0.0;
    double duration_s() const { return set_s - rise_s; }
};

struct PowerBudget {
    double avg_generation_w = 15.2;
    double battery_capacity_wh = 69.0;
    double payload_peak_w = 12.5;
    double bus_overhead_w = 0.0;

    void validate() const;
};

double orbital_period_s(double altitude_km);

/// Inclination whose secular J2 nodal drift matches the mean solar motion.
double sso_inclination_deg(double altitude_km);

/// Secular RAAN drift in rad/s for a circular orbit.
double raan_drift_rad_s(double altitude_km, double inclination_deg);

/// Elevation of the satellite above the station's horizon, in degrees, at
/// `t` seconds after the epoch (two-body circular orbit + secular J2 RAAN
/// drift on a rotating spherical Earth).
double elevation_deg(const OrbitSpec& orbit, const GroundStation& station, double t);

/// Passes whose rise lies in [0, span). Rise and set come from sign
/// changes of elevation minus mask on a coarse step, refined by bisection
/// to 1 ms; passes in progress at the start are tracked back to their rise.
std::vector<PassWindow> predict_passes(const OrbitSpec& orbit, const GroundStation& station, double span_days,
                                       double step_s = 10.0);

struct ContactStatistics {
    double passes_per_day = 0.0;
    double minutes_per_day = 0.0;
    double max_pass_s = 0.0;
};

ContactStatistics contact_statistics(const std::vector<PassWindow>& passes, double span_days);

/// Upper bound on a single pass for a zero mask: 2 acos(R/(R+h)) / n.
double max_pass_duration_s(double altitude_km);

/// Earth-central half-angle of the visibility circle for a given mask.
double visibility_half_angle_deg(double altitude_km, double min_elevation_deg);

/// Whether a station can ever see the orbit: |lat| <= i' + half-angle,
/// where i' folds retrograde inclinations.
bool latitude_reachable(const OrbitSpec& orbit, const GroundStation& station);

struct EnergyMargin {
    double orbit_period_s = 0.0;
    double margin_wh = 0.0;              // per orbit
    double eclipse_free_draw_wh = 0.0;   // duty * payload_peak * T, no generation
    double depth_of_discharge = 0.0;     // draw / battery capacity
};

EnergyMargin energy_margin(const PowerBudget& budget, double duty, double altitude_km);

/// ISO-8601 UTC string for Unix seconds, rounded to the second.
std::string format_utc(double unix_s);

}  // namespace q3::mission
