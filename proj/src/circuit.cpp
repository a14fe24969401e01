#include "q3/circuit.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "q3/error.hpp"
#include "q3/rng.hpp"

namespace q3::circuit {

namespace {

constexpr cplx kI{0.0, 1.0};
constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Mode index carrying each path after the divider (A = cross port of the
// first coupler, B = cross port of the second, C = through port).
constexpr std::array<std::size_t, 3> kPathMode{1, 2, 0};

using Matrix3 = std::array<std::array<cplx, 3>, 3>;

Matrix3 embed(const Matrix2& m, std::size_t i, std::size_t j) {
    Matrix3 out{};
    for (std::size_t k = 0; k < 3; ++k) out[k][k] = 1.0;
    out[i][i] = m[0][0];
    out[i][j] = m[0][1];
    out[j][i] = m[1][0];
    out[j][j] = m[1][1];
    return out;
}

Matrix3 multiply(const Matrix3& a, const Matrix3& b) {
    Matrix3 out{};
    for (std::size_t i = 0; i < 3; ++i)
        for (std::size_t j = 0; j < 3; ++j)
            for (std::size_t k = 0; k < 3; ++k) out[i][j] += a[i][k] * b[k][j];
    return out;
}

// Divider network acting on modes (0, 1, 2); input enters mode 0.
Matrix3 divider_matrix(const CircuitState& s) {
    return multiply(embed(coupler_matrix(s.divider_second), 0, 2),
                    embed(coupler_matrix(s.divider_first), 0, 1));
}

double loss_amplitude(double loss_db) { return std::pow(10.0, -loss_db / 20.0); }

double power_transmission(const Switch& sw) {
    if (sw.state == SwitchState::Open) return 1.0;
    if (std::isinf(sw.extinction_db)) return 0.0;
    return std::pow(10.0, -sw.extinction_db / 10.0);
}

}  // namespace

std::string BlockingConfig::label() const {
    if (mask_ == 0) return "none";
    std::string out;
    for (Path p : kPaths)
        if (is_open(p)) out += static_cast<char>('A' + static_cast<int>(p));
    return out;
}

BlockingConfig BlockingConfig::parse(std::string_view label) {
    if (label == "none" || label == "0" || label == "{}" || label == "empty") return none();
    std::uint8_t mask = 0;
    for (char c : label) {
        const char u = static_cast<char>(c >= 'a' && c <= 'z' ? c - 'a' + 'A' : c);
        if (u < 'A' || u > 'C')
            fail(ErrorKind::Data, "unknown blocking configuration '" + std::string(label) + "'");
        const auto bit = static_cast<std::uint8_t>(1u << (u - 'A'));
        if (mask & bit)
            fail(ErrorKind::Data, "repeated path in configuration '" + std::string(label) + "'");
        mask |= bit;
    }
    if (mask == 0) fail(ErrorKind::Data, "empty blocking configuration label");
    return BlockingConfig(mask);
}

std::uint32_t HeaterDrive::max_code() const {
    return static_cast<std::uint32_t>(std::floor(max_current_ma * 1e3 / current_resolution_ua + 1e-9));
}

void HeaterDrive::validate() const {
    if (!(current_resolution_ua > 0.0)) fail(ErrorKind::Parameter, "current_resolution must be > 0 uA");
    if (!(max_current_ma > 0.0)) fail(ErrorKind::Parameter, "drive max_current must be > 0 mA");
    for (std::size_t k = 0; k < codes.size(); ++k) {
        if (current_ma(k) > max_current_ma + 1e-12)
            fail(ErrorKind::Parameter, "drive channel " + std::to_string(k) + " code " +
                                           std::to_string(codes[k]) + " exceeds max_current " +
                                           std::to_string(max_current_ma) + " mA");
    }
}

BlockingConfig CircuitState::blocking() const {
    std::uint8_t mask = 0;
    for (std::size_t p = 0; p < 3; ++p)
        if (switches[p].state == SwitchState::Open) mask |= static_cast<std::uint8_t>(1u << p);
    return BlockingConfig(mask);
}

CircuitState CircuitState::configured(BlockingConfig cfg) const {
    CircuitState out = *this;
    for (Path p : kPaths)
        out.switches[static_cast<std::size_t>(p)].state =
            cfg.is_open(p) ? SwitchState::Open : SwitchState::Blocked;
    return out;
}

CircuitState CircuitState::with_codes(std::uint32_t code_b, std::uint32_t code_c) const {
    CircuitState out = *this;
    out.drive.codes[0] = code_b;
    out.drive.codes[1] = code_c;
    return out;
}

void CircuitState::validate() const {
    for (const Coupler* c : {&divider_first, &divider_second, &hbt_tap}) {
        if (!(c->cross_ratio >= 0.0 && c->cross_ratio <= 1.0))
            fail(ErrorKind::Parameter, "coupler cross_ratio must lie in [0, 1]");
        if (!(c->ratio_error >= 0.0)) fail(ErrorKind::Parameter, "coupler ratio_error must be >= 0");
    }
    for (const auto& sw : switches)
        if (!(sw.extinction_db >= 0.0)) fail(ErrorKind::Parameter, "extinction must be >= 0 dB");
    if (heaters.size() < 2) fail(ErrorKind::Parameter, "two interferometer heaters are required");
    if (heaters.size() > kDriveChannels) fail(ErrorKind::Parameter, "more heaters than drive channels");
    for (std::size_t k = 0; k < heaters.size(); ++k) {
        const Heater& h = heaters[k];
        if (!(h.resistance_ohm >= 70.0 && h.resistance_ohm <= 110.0))
            fail(ErrorKind::Parameter, "heater resistance must lie in [70, 110] ohm");
        if (!(h.p2pi_mw > 0.0)) fail(ErrorKind::Parameter, "p2pi must be > 0 mW");
        for (std::size_t j = 0; j < h.crosstalk_row.size(); ++j) {
            if (j == k) continue;
            if (!(h.crosstalk_row[j] >= 0.0 && h.crosstalk_row[j] <= 0.05))
                fail(ErrorKind::Parameter, "crosstalk coefficients must lie in [0, 0.05]");
        }
    }
    drive.validate();
    if (!(insertion_loss_db >= 0.0)) fail(ErrorKind::Parameter, "insertion_loss must be >= 0 dB");
    if (!(third_order_injection >= 0.0)) fail(ErrorKind::Parameter, "third_order_injection must be >= 0");
}

Matrix2 coupler_matrix(const Coupler& c) {
    if (!(c.cross_ratio >= 0.0 && c.cross_ratio <= 1.0))
        fail(ErrorKind::Parameter, "coupler cross_ratio must lie in [0, 1], got " +
                                       std::to_string(c.cross_ratio));
    const double t = std::sqrt(1.0 - c.cross_ratio);
    const cplx x = kI * std::sqrt(c.cross_ratio);
    return {{{t, x}, {x, t}}};
}

std::array<cplx, 3> divider_amplitudes(const CircuitState& state) {
    const Matrix3 d = divider_matrix(state);
    return {d[kPathMode[0]][0], d[kPathMode[1]][0], d[kPathMode[2]][0]};
}

double heater_power_mw(const HeaterDrive& drive, std::size_t k, double resistance_ohm) {
    const double i_a = drive.current_ma(k) * 1e-3;
    return i_a * i_a * resistance_ohm * 1e3;
}

std::vector<double> heater_phases(const std::vector<Heater>& heaters, const HeaterDrive& drive) {
    drive.validate();
    if (heaters.size() > kDriveChannels) fail(ErrorKind::Parameter, "more heaters than drive channels");
    std::vector<double> power(heaters.size());
    for (std::size_t k = 0; k < heaters.size(); ++k)
        power[k] = heater_power_mw(drive, k, heaters[k].resistance_ohm);
    std::vector<double> phase(heaters.size());
    for (std::size_t k = 0; k < heaters.size(); ++k) {
        double effective = power[k];
        const auto& row = heaters[k].crosstalk_row;
        for (std::size_t j = 0; j < heaters.size() && j < row.size(); ++j)
            if (j != k) effective += row[j] * power[j];
        phase[k] = heaters[k].phase_offset_rad + kTwoPi / heaters[k].p2pi_mw * effective;
    }
    return phase;
}

double max_heater_power_mw(double max_current_ma, double resistance_ohm) {
    const double i_a = max_current_ma * 1e-3;
    return i_a * i_a * resistance_ohm * 1e3;
}

double phase_step_rad(const Heater& heater, const HeaterDrive& drive, double power_mw) {
    const double res_ma = drive.current_resolution_ua * 1e-3;
    const double i_ma = std::sqrt(power_mw * 1e-3 / heater.resistance_ohm) * 1e3;
    const double code = std::round(i_ma / res_ma);
    auto p = [&](double c) {
        const double ia = c * res_ma * 1e-3;
        return ia * ia * heater.resistance_ohm * 1e3;
    };
    return kTwoPi / heater.p2pi_mw * (p(code + 1.0) - p(code));
}

cplx path_transmission(const Switch& sw) {
    const double amp = std::sqrt(power_transmission(sw));
    if (sw.state == SwitchState::Open) return amp;
    return std::polar(amp, sw.leakage_phase_rad);
}

cplx path_drop(const Switch& sw) { return std::sqrt(1.0 - power_transmission(sw)); }

std::array<double, 3> path_phases(const CircuitState& state) {
    const auto phi = heater_phases(state.heaters, state.drive);
    return {0.0, phi[0], phi[1]};
}

OutputAmplitudes output_amplitude(const CircuitState& state) {
    const auto d = divider_amplitudes(state);
    const auto phi = path_phases(state);
    const double loss = loss_amplitude(state.insertion_loss_db);
    cplx sum = 0.0;
    for (std::size_t p = 0; p < 3; ++p)
        sum += d[p] * path_transmission(state.switches[p]) * std::polar(1.0, phi[p]) * d[p];
    // The bottom switch (path C) sends its drop port to the balanced HBT coupler.
    const cplx drop = d[2] * std::polar(1.0, phi[2]) * path_drop(state.switches[2]);
    const Matrix2 tap = coupler_matrix(state.hbt_tap);
    return {loss * sum, loss * drop * tap[0][0], loss * drop * tap[1][0]};
}

std::array<double, 3> port_probabilities(const CircuitState& state) {
    const OutputAmplitudes a = output_amplitude(state);
    double p0 = std::norm(a.interferometer);
    if (state.blocking() == BlockingConfig::all() && state.third_order_injection > 0.0) {
        const double loss = loss_amplitude(state.insertion_loss_db);
        p0 += loss * loss * state.third_order_injection;
    }
    return {p0, std::norm(a.hbt_1), std::norm(a.hbt_2)};
}

double PortPowers::total() const {
    return combiner[0] + combiner[1] + combiner[2] + drops_ab[0] + drops_ab[1] + hbt[0] + hbt[1] +
           insertion_loss;
}

PortPowers all_port_powers(const CircuitState& state) {
    const Matrix3 d = divider_matrix(state);
    const auto phi = path_phases(state);
    const double loss = loss_amplitude(state.insertion_loss_db);
    const double l2 = loss * loss;
    PortPowers out;
    // Field entering the combiner per mode.
    std::array<cplx, 3> x{};
    for (std::size_t p = 0; p < 3; ++p) {
        const std::size_t m = kPathMode[p];
        x[m] = d[m][0] * path_transmission(state.switches[p]) * std::polar(1.0, phi[p]);
    }
    // Combiner is the divider run backwards: transpose of the divider matrix.
    for (std::size_t k = 0; k < 3; ++k) {
        cplx o = 0.0;
        for (std::size_t m = 0; m < 3; ++m) o += d[m][k] * x[m];
        out.combiner[k] = l2 * std::norm(o);
    }
    for (std::size_t p = 0; p < 2; ++p)
        out.drops_ab[p] = l2 * std::norm(d[kPathMode[p]][0] * path_drop(state.switches[p]));
    const OutputAmplitudes a = output_amplitude(state);
    out.hbt = {std::norm(a.hbt_1), std::norm(a.hbt_2)};
    out.insertion_loss = 1.0 - l2;
    return out;
}

double max_output_probability(const CircuitState& state) {
    const CircuitState open = state.configured(BlockingConfig::all());
    const auto d = divider_amplitudes(open);
    const double loss = loss_amplitude(open.insertion_loss_db);
    double sum = 0.0;
    for (std::size_t p = 0; p < 3; ++p) sum += std::norm(d[p]);
    return loss * loss * (sum * sum + open.third_order_injection);
}

std::array<TimeTagSeries, 3> transmit_stream(const CircuitState& state, const TimeTagSeries& photons,
                                             std::uint64_t seed) {
    if (!photons.is_sorted()) fail(ErrorKind::Data, "photon stream must be sorted");
    const auto p = port_probabilities(state);
    const double c0 = p[0], c1 = c0 + p[1], c2 = c1 + p[2];
    std::array<TimeTagSeries, 3> out;
    for (auto& o : out) o = TimeTagSeries(photons.duration(), photons.origin(), 1);
    const auto times = photons.times();
    Rng rng(seed, Stream::Circuit);
    for (Picoseconds t : times) {
        const double u = rng.uniform();
        if (u < c0)
            out[0].push_back(t, 0);
        else if (u < c1)
            out[1].push_back(t, 0);
        else if (u < c2)
            out[2].push_back(t, 0);
    }
    return out;
}

TimeTagSeries discard_settle_window(const TimeTagSeries& s, Picoseconds start, Picoseconds window) {
    const Picoseconds end = window > std::numeric_limits<Picoseconds>::max() - start
                                ? std::numeric_limits<Picoseconds>::max()
                                : start + window;
    TimeTagSeries out(s.duration(), s.origin(), s.channel_count());
    out.reserve(s.size());
    const auto t = s.times();
    const auto c = s.channels();
    for (std::size_t i = 0; i < t.size(); ++i)
        if (t[i] < start || t[i] >= end) out.push_back(t[i], c[i]);
    return out;
}

}  // namespace q3::circuit
