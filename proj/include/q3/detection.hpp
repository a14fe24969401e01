#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "q3/timetag.hpp"

namespace q3::detection {

struct FilterParams {
    double pump_suppression_db = 60.0;
    double broadband_loss_db = 1.0;
    double resonance_wavelength_nm = 690.0;
    double bandwidth_pm = 500.0;

    double survival_probability() const;
    double leak_fraction() const;
    void validate() const;
};

struct SpadParams {
    double efficiency = 0.5;
    double dark_rate = 1000.0;   // counts/s
    double dead_time_ns = 60.0;  // non-paralyzable
    double jitter_fwhm_ps = 500.0;
    std::uint8_t channel_id = 0;

    Picoseconds dead_time_ps() const;
    double jitter_sigma_ps() const { return jitter_fwhm_ps / 2.3548200450309493; }
    /// `allow_unit_efficiency` lifts the 0.5 ceiling for idealized runs.
    void validate(bool allow_unit_efficiency = false) const;
};

struct DetectorSystem {
    std::array<SpadParams, 3> spads{SpadParams{0.5, 1000.0, 60.0, 500.0, 0},
                                    SpadParams{0.5, 1000.0, 60.0, 500.0, 1},
                                    SpadParams{0.5, 1000.0, 60.0, 500.0, 2}};
    double peak_power_w = 12.5;
    double timebin_resolution_ps = 36.0;
    /// Idealized detectors: efficiency up to 1 is accepted.
    bool test_mode = false;

    void validate() const;
};

/// Signal tags survive the filter's broadband loss independently; leaked
/// pump light joins as a Poisson stream at rate pump_rate * 10^(-S/10).
TimeTagSeries apply_filter(const TimeTagSeries& signal, double pump_photon_rate, const FilterParams& f,
                           std::uint64_t seed);

/// Fixed pipeline: efficiency thinning, dark-count merge, Gaussian jitter
/// truncated at 5 sigma, re-sort, then non-paralyzable dead time. Output
/// tags carry `p.channel_id`.
TimeTagSeries spad_detect(const TimeTagSeries& photons, const SpadParams& p, Picoseconds duration,
                          std::uint64_t seed, bool allow_unit_efficiency = false);

/// Keeps a tag iff it is at least `dead_time` after the last kept tag.
TimeTagSeries apply_dead_time(const TimeTagSeries& s, Picoseconds dead_time);

/// Runs each port through its SPAD (port i -> spads[i]) and merges the
/// clicks into one 3-channel series.
TimeTagSeries detect_all(std::span<const TimeTagSeries> outputs, const DetectorSystem& sys,
                         std::uint64_t seed);

/// R_in / (1 + R_in tau_d).
double nonparalyzable_output_rate(double input_rate, double dead_time_ns);

struct Histogram {
    std::int64_t window_ps = 0;
    std::int64_t bin_ps = 0;
    std::vector<std::uint64_t> counts;  // bin k covers [-window + k bin, -window + (k+1) bin)

    std::int64_t bin_start(std::size_t k) const {
        return -window_ps + static_cast<std::int64_t>(k) * bin_ps;
    }
    std::uint64_t total() const;
};

/// Full cross-correlation of channel b relative to channel a: every pair
/// with -window <= t_b - t_a < window, binned into half-open bins.
Histogram coincidence_histogram(const TimeTagSeries& tags, std::uint8_t ch_a, std::uint8_t ch_b,
                                double window_ns, std::int64_t bin_ps);

/// Adds another partial histogram with identical binning.
void accumulate(Histogram& into, const Histogram& part);

}  // namespace q3::detection
