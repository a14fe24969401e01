#pragma once

#include <cstdint>
#include <variant>

#include "q3/timetag.hpp"

namespace q3::source {

/// Linear-above-threshold diode laser with fiber coupling.
struct PumpLaser {
    double threshold_current_ma = 20.0;
    double slope_efficiency_mw_per_ma = 30.0 / 45.0;  // 30 mW at 65 mA
    double max_current_ma = 150.0;
    double fiber_coupling = 0.5;
    double current_stability_ua = 5.0;

    void validate() const;
};

struct PumpPower {
    double free_space_mw = 0.0;
    double fiber_mw = 0.0;
};

/// Effective two-level emitter. All defaults are placeholders.
struct EmitterParams {
    double lifetime_ns = 3.0;
    double saturation_power_mw = 1.0;
    double max_emission_rate = 5e6;  // counts/s
    double background_fraction = 0.05;
    double wavelength_nm = 720.0;

    double decay_rate() const { return 1e9 / lifetime_ns; }  // 1/s
    double signal_fraction() const { return 1.0 - background_fraction; }
    void validate() const;
};

struct TwoLevelEmitter {
    EmitterParams params;
};
struct WeakCoherentCW {
    double mean_rate = 1e5;  // counts/s
};
struct WeakCoherentPulsed {
    double rep_rate_hz = 1e7;
    double mean_photon_number = 0.1;
};

using SourceKind = std::variant<TwoLevelEmitter, WeakCoherentCW, WeakCoherentPulsed>;

void validate(const SourceKind& source);

/// Longest run whose picosecond timestamps keep sub-ns rounding in a double.
inline constexpr double kMaxDurationSeconds = 1e6;

PumpPower pump_power(const PumpLaser& laser, double current_ma);

/// Saturating emission rate R_inf * P / (P + P_sat), in counts/s.
double emission_rate(const EmitterParams& emitter, double pump_fiber_mw);

/// Excitation rate that makes the excite/decay cycle emit at `rate`.
/// Throws a parameter error when `rate` reaches the radiative decay rate.
double excitation_rate(const EmitterParams& emitter, double rate);

/// Mean detected-photon flux of the source (signal plus background).
double mean_rate(const SourceKind& source, double pump_fiber_mw);

/// One seeded realization over [0, duration]. The emitter alternates
/// exponential waits (excitation, then radiative decay) and is superposed
/// with an uncorrelated Poisson background; weak-coherent sources are
/// Poissonian. Signal and background use separate substreams so a longer
/// duration extends the same realization.
TimeTagSeries generate_stream(const SourceKind& source, double pump_fiber_mw, double duration_s,
                              std::uint64_t seed);

/// Realization truncated to exactly `photons` tags; the series duration is
/// the time of the last tag.
TimeTagSeries generate_photons(const SourceKind& source, double pump_fiber_mw,
                               std::uint64_t photons, std::uint64_t seed);

/// Model g2(tau). Two-level emitter: 1 - rho^2 exp(-(k_ex + Gamma)|tau|),
/// rho the signal fraction. Weak-coherent sources: 1.
double theoretical_g2(const SourceKind& source, double pump_fiber_mw, double tau_ns);

/// Average of the model g2 over |tau| <= half_width_ns; the expectation of
/// a histogram estimate over that window.
double window_averaged_g2(const SourceKind& source, double pump_fiber_mw, double half_width_ns);

}  // namespace q3::source
