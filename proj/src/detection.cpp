#include "q3/detection.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "q3/error.hpp"
#include "q3/kernels.hpp"
#include "q3/rng.hpp"

namespace q3::detection {

namespace {

void poisson_arrivals(TimeTagSeries& out, double rate_per_s, Picoseconds duration, std::uint8_t channel,
                      Rng& rng) {
    if (!(rate_per_s > 0.0)) return;
    const double rate_per_ps = rate_per_s / kPsPerSecond;
    const double end = static_cast<double>(duration);
    double t = 0.0;
    for (;;) {
        t += rng.exponential(rate_per_ps);
        if (t > end) break;
        out.push_back(static_cast<Picoseconds>(t), channel);
    }
}

}  // namespace

double FilterParams::survival_probability() const { return std::pow(10.0, -broadband_loss_db / 10.0); }
double FilterParams::leak_fraction() const { return std::pow(10.0, -pump_suppression_db / 10.0); }

void FilterParams::validate() const {
    if (!(pump_suppression_db >= 0.0)) fail(ErrorKind::Parameter, "pump_suppression must be >= 0 dB");
    if (!(broadband_loss_db >= 0.0)) fail(ErrorKind::Parameter, "broadband_loss must be >= 0 dB");
}

Picoseconds SpadParams::dead_time_ps() const {
    return static_cast<Picoseconds>(std::llround(dead_time_ns * 1e3));
}

void SpadParams::validate(bool allow_unit_efficiency) const {
    const double max_eff = allow_unit_efficiency ? 1.0 : 0.5;
    if (!(efficiency >= 0.0 && efficiency <= max_eff))
        fail(ErrorKind::Parameter, allow_unit_efficiency ? "efficiency must lie in [0, 1]"
                                                         : "efficiency must lie in [0, 0.5]");
    if (!(dark_rate >= 0.0)) fail(ErrorKind::Parameter, "dark_rate must be >= 0");
    if (!(dead_time_ns > 0.0)) fail(ErrorKind::Parameter, "dead_time must be > 0 ns");
    if (!(jitter_fwhm_ps >= 0.0)) fail(ErrorKind::Parameter, "jitter_fwhm must be >= 0 ps");
}

void DetectorSystem::validate() const {
    for (const auto& s : spads) s.validate(test_mode);
    if (!(peak_power_w >= 0.0)) fail(ErrorKind::Parameter, "peak_power must be >= 0 W");
    if (!(timebin_resolution_ps > 0.0)) fail(ErrorKind::Parameter, "timebin_resolution must be > 0 ps");
}

TimeTagSeries apply_filter(const TimeTagSeries& signal, double pump_photon_rate, const FilterParams& f,
                           std::uint64_t seed) {
    f.validate();
    if (!(pump_photon_rate >= 0.0)) fail(ErrorKind::Parameter, "pump photon rate must be >= 0");
    const double survive = f.survival_probability();
    TimeTagSeries kept(signal.duration(), signal.origin(), signal.channel_count());
    kept.reserve(static_cast<std::size_t>(static_cast<double>(signal.size()) * survive) + 16);
    const auto t = signal.times();
    const auto c = signal.channels();
    Rng rng(seed, Stream::Filter);
    for (std::size_t i = 0; i < t.size(); ++i)
        if (survive >= 1.0 || rng.uniform() < survive) kept.push_back(t[i], c[i]);
    const double leak_rate = pump_photon_rate * f.leak_fraction();
    if (!(leak_rate > 0.0)) return kept;
    TimeTagSeries leak(signal.duration(), signal.origin(), signal.channel_count());
    Rng leak_rng(seed, Stream::Filter, 1);
    poisson_arrivals(leak, leak_rate, signal.duration(), 0, leak_rng);
    return merge(kept, leak);
}

TimeTagSeries apply_dead_time(const TimeTagSeries& s, Picoseconds dead_time) {
    TimeTagSeries out(s.duration(), s.origin(), s.channel_count());
    const auto t = s.times();
    const auto c = s.channels();
    out.reserve(t.size());
    bool have_last = false;
    Picoseconds last = 0;
    for (std::size_t i = 0; i < t.size(); ++i) {
        if (!have_last || t[i] - last >= dead_time) {
            out.push_back(t[i], c[i]);
            last = t[i];
            have_last = true;
        }
    }
    return out;
}

TimeTagSeries spad_detect(const TimeTagSeries& photons, const SpadParams& p, Picoseconds duration,
                          std::uint64_t seed, bool allow_unit_efficiency) {
    p.validate(allow_unit_efficiency);
    if (!photons.is_sorted()) fail(ErrorKind::Data, "photon stream must be sorted");
    const std::uint8_t ch = p.channel_id;
    const auto channel_count = static_cast<std::uint8_t>(ch + 1);

    // (1) efficiency thinning
    TimeTagSeries thinned(duration, Origin::Detected, channel_count);
    thinned.reserve(static_cast<std::size_t>(static_cast<double>(photons.size()) * p.efficiency) + 16);
    {
        Rng rng(seed, Stream::Thinning, ch);
        for (Picoseconds t : photons.times())
            if (rng.uniform() < p.efficiency) thinned.push_back(std::min(t, duration), ch);
    }
    // (2) dark counts
    if (p.dark_rate > 0.0) {
        TimeTagSeries dark(duration, Origin::Detected, channel_count);
        Rng rng(seed, Stream::Dark, ch);
        poisson_arrivals(dark, p.dark_rate, duration, ch, rng);
        thinned = merge(thinned, dark);
    }
    // (3) jitter, (4) re-sort
    const double sigma = p.jitter_sigma_ps();
    if (sigma > 0.0 && !thinned.empty()) {
        Rng rng(seed, Stream::Jitter, ch);
        std::vector<std::int64_t> offsets(thinned.size());
        for (auto& o : offsets) {
            double z;
            do {
                z = rng.normal();
            } while (std::fabs(z) > 5.0);
            o = std::llround(z * sigma);
        }
        auto& times = thinned.mutable_times();
        kernels::offset_clamp(times, offsets, duration, times);
        std::sort(times.begin(), times.end());
    }
    // (5) non-paralyzable dead time
    return apply_dead_time(thinned, p.dead_time_ps());
}

TimeTagSeries detect_all(std::span<const TimeTagSeries> outputs, const DetectorSystem& sys,
                         std::uint64_t seed) {
    sys.validate();
    if (outputs.size() > sys.spads.size())
        fail(ErrorKind::Configuration, std::to_string(outputs.size()) + " output ports but only " +
                                           std::to_string(sys.spads.size()) + " detector channels");
    Picoseconds duration = 0;
    for (const auto& o : outputs) duration = std::max(duration, o.duration());
    TimeTagSeries merged(duration, Origin::Detected, 3);
    for (std::size_t i = 0; i < outputs.size(); ++i) {
        TimeTagSeries clicks = spad_detect(outputs[i], sys.spads[i], duration, seed, sys.test_mode);
        merged = merge(merged, clicks);
    }
    merged.set_duration(duration);
    merged.set_channel_count(3);
    return merged;
}

double nonparalyzable_output_rate(double input_rate, double dead_time_ns) {
    return input_rate / (1.0 + input_rate * dead_time_ns * 1e-9);
}

std::uint64_t Histogram::total() const {
    std::uint64_t s = 0;
    for (auto c : counts) s += c;
    return s;
}

Histogram coincidence_histogram(const TimeTagSeries& tags, std::uint8_t ch_a, std::uint8_t ch_b,
                                double window_ns, std::int64_t bin_ps) {
    if (!(window_ns > 0.0)) fail(ErrorKind::Parameter, "coincidence window must be > 0 ns");
    if (bin_ps <= 0) fail(ErrorKind::Parameter, "histogram bin must be > 0 ps");
    const std::int64_t window = std::llround(window_ns * 1e3);
    if ((2 * window) % bin_ps != 0)
        fail(ErrorKind::Parameter, "bin width " + std::to_string(bin_ps) +
                                       " ps must divide twice the window (" + std::to_string(2 * window) +
                                       " ps)");
    if (!tags.is_sorted()) fail(ErrorKind::Data, "time tags must be sorted");

    Histogram h;
    h.window_ps = window;
    h.bin_ps = bin_ps;
    h.counts.assign(static_cast<std::size_t>(2 * window / bin_ps), 0);

    std::vector<Picoseconds> ta, tb;
    const auto times = tags.times();
    const auto chans = tags.channels();
    for (std::size_t i = 0; i < times.size(); ++i) {
        if (chans[i] == ch_a) ta.push_back(times[i]);
        if (chans[i] == ch_b) tb.push_back(times[i]);
    }
    const auto w = static_cast<Picoseconds>(window);
    std::vector<std::int32_t> idx;
    std::size_t lo = 0, hi = 0;
    for (Picoseconds t : ta) {
        while (lo < tb.size() && tb[lo] + w < t) ++lo;
        if (hi < lo) hi = lo;
        while (hi < tb.size() && tb[hi] < t + w) ++hi;
        const std::size_t n = hi - lo;
        if (n == 0) continue;
        if (idx.size() < n) idx.resize(n);
        kernels::bin_index(std::span<const Picoseconds>(tb.data() + lo, n),
                           static_cast<std::int64_t>(t) - window, bin_ps, idx);
        for (std::size_t k = 0; k < n; ++k) ++h.counts[static_cast<std::size_t>(idx[k])];
    }
    if (ch_a == ch_b && !ta.empty()) {
        // Drop the self-pairs at zero delay.
        h.counts[static_cast<std::size_t>(window / bin_ps)] -= ta.size();
    }
    return h;
}

void accumulate(Histogram& into, const Histogram& part) {
    if (into.counts.empty() && into.bin_ps == 0) {
        into = part;
        return;
    }
    if (into.window_ps != part.window_ps || into.bin_ps != part.bin_ps ||
        into.counts.size() != part.counts.size())
        fail(ErrorKind::Parameter, "histograms have different binning");
    for (std::size_t k = 0; k < into.counts.size(); ++k) into.counts[k] += part.counts[k];
}

}  // namespace q3::detection
