#include "q3/source.hpp"

#include <cmath>
#include <string>

#include "q3/error.hpp"
#include "q3/rng.hpp"

namespace q3::source {

namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

void check_duration(double duration_s) {
    if (!(duration_s > 0.0))
        fail(ErrorKind::Parameter, "duration must be > 0 s, got " + std::to_string(duration_s));
    if (duration_s > kMaxDurationSeconds)
        fail(ErrorKind::Capacity, "duration " + std::to_string(duration_s) +
                                      " s exceeds the picosecond timestamp capacity of " +
                                      std::to_string(kMaxDurationSeconds) + " s");
}

// Homogeneous Poisson arrivals on [0, duration_ps].
void poisson_arrivals(TimeTagSeries& out, double rate_per_s, double duration_ps, Rng& rng) {
    if (!(rate_per_s > 0.0)) return;
    const double rate_per_ps = rate_per_s / kPsPerSecond;
    double t = 0.0;
    for (;;) {
        t += rng.exponential(rate_per_ps);
        if (t > duration_ps) break;
        out.push_back(static_cast<Picoseconds>(t), 0);
    }
}

TimeTagSeries emitter_stream(const EmitterParams& p, double pump_mw, double duration_ps,
                             std::uint64_t seed) {
    const Picoseconds dur = static_cast<Picoseconds>(duration_ps);
    const double signal_rate = emission_rate(p, pump_mw);
    TimeTagSeries signal(dur, Origin::Emitted, 1);
    if (signal_rate > 0.0) {
        const double k_ex = excitation_rate(p, signal_rate) / kPsPerSecond;
        const double gamma = p.decay_rate() / kPsPerSecond;
        signal.reserve(static_cast<std::size_t>(signal_rate * duration_ps / kPsPerSecond * 1.01) + 16);
        Rng rng(seed, Stream::Signal);
        double t = 0.0;
        for (;;) {
            t += rng.exponential(k_ex);
            t += rng.exponential(gamma);
            if (t > duration_ps) break;
            signal.push_back(static_cast<Picoseconds>(t), 0);
        }
    }
    const double b = p.background_fraction;
    if (b <= 0.0 || signal_rate <= 0.0) return signal;
    TimeTagSeries background(dur, Origin::Emitted, 1);
    Rng rng(seed, Stream::Background);
    poisson_arrivals(background, b / (1.0 - b) * signal_rate, duration_ps, rng);
    return merge(signal, background);
}

TimeTagSeries pulsed_stream(const WeakCoherentPulsed& s, double duration_ps, std::uint64_t seed) {
    TimeTagSeries out(static_cast<Picoseconds>(duration_ps), Origin::Emitted, 1);
    const double mu = s.mean_photon_number;
    if (!(mu > 0.0) || !(s.rep_rate_hz > 0.0)) return out;
    const double period_ps = kPsPerSecond / s.rep_rate_hz;
    const double p_empty = std::exp(-mu);
    Rng rng(seed, Stream::Signal);
    double pulse = -1.0;
    for (;;) {
        // Geometric skip over empty pulses.
        pulse += 1.0 + std::floor(std::log(rng.uniform_pos()) / -mu);
        const double t = pulse * period_ps;
        if (t > duration_ps) break;
        // Zero-truncated Poisson photon number by inversion.
        double u = rng.uniform() * (1.0 - p_empty);
        double term = p_empty * mu;
        std::uint64_t n = 1;
        while (u >= term && n < 1000) {
            u -= term;
            ++n;
            term *= mu / static_cast<double>(n);
        }
        for (std::uint64_t i = 0; i < n; ++i) out.push_back(static_cast<Picoseconds>(t), 0);
    }
    return out;
}

}  // namespace

void PumpLaser::validate() const {
    if (!(fiber_coupling > 0.0 && fiber_coupling <= 1.0))
        fail(ErrorKind::Parameter, "fiber_coupling must lie in (0, 1]");
    if (!(threshold_current_ma >= 0.0))
        fail(ErrorKind::Parameter, "threshold_current must be >= 0 mA");
    if (!(max_current_ma > threshold_current_ma))
        fail(ErrorKind::Parameter, "max_current must exceed threshold_current");
    if (!(slope_efficiency_mw_per_ma > 0.0))
        fail(ErrorKind::Parameter, "slope_efficiency must be > 0 mW/mA");
}

void EmitterParams::validate() const {
    if (!(lifetime_ns > 0.0)) fail(ErrorKind::Parameter, "lifetime must be > 0 ns");
    if (!(saturation_power_mw >= 0.0)) fail(ErrorKind::Parameter, "saturation_power must be >= 0 mW");
    if (!(max_emission_rate >= 0.0)) fail(ErrorKind::Parameter, "max_emission_rate must be >= 0");
    if (!(background_fraction >= 0.0 && background_fraction < 1.0))
        fail(ErrorKind::Parameter, "background_fraction must lie in [0, 1)");
    if (!(max_emission_rate < decay_rate()))
        fail(ErrorKind::Parameter, "max_emission_rate must stay below the radiative decay rate 1/lifetime");
}

void validate(const SourceKind& source) {
    std::visit(overloaded{
                   [](const TwoLevelEmitter& e) { e.params.validate(); },
                   [](const WeakCoherentCW& w) {
                       if (!(w.mean_rate >= 0.0)) fail(ErrorKind::Parameter, "mean_rate must be >= 0");
                   },
                   [](const WeakCoherentPulsed& w) {
                       if (!(w.mean_photon_number >= 0.0))
                           fail(ErrorKind::Parameter, "mean_photon_number must be >= 0");
                       if (!(w.rep_rate_hz >= 0.0)) fail(ErrorKind::Parameter, "rep_rate must be >= 0");
                   },
               },
               source);
}

PumpPower pump_power(const PumpLaser& laser, double current_ma) {
    if (!(current_ma >= 0.0))
        fail(ErrorKind::Parameter, "pump current must be >= 0 mA, got " + std::to_string(current_ma));
    if (current_ma > laser.max_current_ma)
        fail(ErrorKind::Parameter, "pump current must be <= max_current " +
                                       std::to_string(laser.max_current_ma) + " mA, got " +
                                       std::to_string(current_ma));
    PumpPower p;
    p.free_space_mw =
        std::max(0.0, laser.slope_efficiency_mw_per_ma * (current_ma - laser.threshold_current_ma));
    p.fiber_mw = p.free_space_mw * laser.fiber_coupling;
    return p;
}

double emission_rate(const EmitterParams& e, double pump_fiber_mw) {
    if (pump_fiber_mw <= 0.0) return 0.0;
    return e.max_emission_rate * pump_fiber_mw / (pump_fiber_mw + e.saturation_power_mw);
}

double excitation_rate(const EmitterParams& e, double rate) {
    const double gamma = e.decay_rate();
    if (!(rate < gamma))
        fail(ErrorKind::Parameter, "emission rate must stay below the decay rate 1/lifetime");
    return rate * gamma / (gamma - rate);
}

double mean_rate(const SourceKind& source, double pump_fiber_mw) {
    return std::visit(overloaded{
                          [&](const TwoLevelEmitter& e) {
                              return emission_rate(e.params, pump_fiber_mw) /
                                     (1.0 - e.params.background_fraction);
                          },
                          [](const WeakCoherentCW& w) { return w.mean_rate; },
                          [](const WeakCoherentPulsed& w) { return w.rep_rate_hz * w.mean_photon_number; },
                      },
                      source);
}

TimeTagSeries generate_stream(const SourceKind& source, double pump_fiber_mw, double duration_s,
                              std::uint64_t seed) {
    check_duration(duration_s);
    const double duration_ps = duration_s * kPsPerSecond;
    return std::visit(overloaded{
                          [&](const TwoLevelEmitter& e) {
                              return emitter_stream(e.params, pump_fiber_mw, duration_ps, seed);
                          },
                          [&](const WeakCoherentCW& w) {
                              TimeTagSeries out(static_cast<Picoseconds>(duration_ps), Origin::Emitted, 1);
                              Rng rng(seed, Stream::Signal);
                              poisson_arrivals(out, w.mean_rate, duration_ps, rng);
                              return out;
                          },
                          [&](const WeakCoherentPulsed& w) { return pulsed_stream(w, duration_ps, seed); },
                      },
                      source);
}

TimeTagSeries generate_photons(const SourceKind& source, double pump_fiber_mw, std::uint64_t photons,
                               std::uint64_t seed) {
    if (photons == 0) return TimeTagSeries(0, Origin::Emitted, 1);
    const double rate = mean_rate(source, pump_fiber_mw);
    if (!(rate > 0.0)) fail(ErrorKind::Signal, "source emits no photons at this pump power");
    const double n = static_cast<double>(photons);
    double duration = (n + 6.0 * std::sqrt(n) + 10.0) / rate;
    for (;;) {
        duration = std::min(duration, kMaxDurationSeconds);
        TimeTagSeries s = generate_stream(source, pump_fiber_mw, duration, seed);
        if (s.size() >= photons) {
            s.truncate(photons);
            s.set_duration(s.times().back());
            return s;
        }
        if (duration >= kMaxDurationSeconds)
            fail(ErrorKind::Capacity, "photon budget does not fit in the timestamp capacity");
        duration *= 2.0;
    }
}

double theoretical_g2(const SourceKind& source, double pump_fiber_mw, double tau_ns) {
    const auto* e = std::get_if<TwoLevelEmitter>(&source);
    if (!e) return 1.0;
    const double r = emission_rate(e->params, pump_fiber_mw);
    const double a = excitation_rate(e->params, r) + e->params.decay_rate();
    const double rho = e->params.signal_fraction();
    return 1.0 - rho * rho * std::exp(-a * std::fabs(tau_ns) * 1e-9);
}

double window_averaged_g2(const SourceKind& source, double pump_fiber_mw, double half_width_ns) {
    const auto* e = std::get_if<TwoLevelEmitter>(&source);
    if (!e) return 1.0;
    const double r = emission_rate(e->params, pump_fiber_mw);
    const double a = excitation_rate(e->params, r) + e->params.decay_rate();
    const double rho = e->params.signal_fraction();
    const double x = a * half_width_ns * 1e-9;
    const double mean_exp = x < 1e-12 ? 1.0 : -std::expm1(-x) / x;
    return 1.0 - rho * rho * mean_exp;
}

}  // namespace q3::source
