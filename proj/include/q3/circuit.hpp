#pragma once

#include <array>
#include <complex>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "q3/timetag.hpp"

namespace q3::circuit {

using cplx = std::complex<double>;
using Matrix2 = std::array<std::array<cplx, 2>, 2>;

enum class Path : std::uint8_t { A = 0, B = 1, C = 2 };
inline constexpr std::array<Path, 3> kPaths{Path::A, Path::B, Path::C};

/// Subset of the three interferometer paths left open.
class BlockingConfig {
public:
    constexpr BlockingConfig() = default;
    constexpr explicit BlockingConfig(std::uint8_t mask) : mask_(mask & 0x7u) {}

    static constexpr BlockingConfig none() { return BlockingConfig(0); }
    static constexpr BlockingConfig all() { return BlockingConfig(0x7); }
    static constexpr BlockingConfig only(Path p) {
        return BlockingConfig(static_cast<std::uint8_t>(1u << static_cast<unsigned>(p)));
    }

    constexpr bool is_open(Path p) const { return (mask_ >> static_cast<unsigned>(p)) & 1u; }
    constexpr std::uint8_t mask() const { return mask_; }
    constexpr int open_count() const { return (mask_ & 1) + ((mask_ >> 1) & 1) + ((mask_ >> 2) & 1); }

    /// "none", "A", "B", "C", "AB", "AC", "BC", "ABC".
    std::string label() const;
    static BlockingConfig parse(std::string_view label);

    friend constexpr bool operator==(BlockingConfig, BlockingConfig) = default;

private:
    std::uint8_t mask_ = 0;
};

/// Measurement order used by the Born experiment.
inline constexpr std::array<BlockingConfig, 8> kAllConfigs{
    BlockingConfig(0), BlockingConfig(1), BlockingConfig(2), BlockingConfig(4),
    BlockingConfig(3), BlockingConfig(5), BlockingConfig(6), BlockingConfig(7)};

struct Coupler {
    double cross_ratio = 0.5;
    double ratio_error = 0.01;
};

enum class SwitchState : std::uint8_t { Open, Blocked };

struct Switch {
    SwitchState state = SwitchState::Open;
    double extinction_db = 30.0;  // infinity for an ideal blocker
    double settle_time_ms = 100.0;
    double leakage_phase_rad = 0.0;
};

struct Heater {
    double resistance_ohm = 90.0;
    double p2pi_mw = 10.0;
    double phase_offset_rad = 0.0;
    std::vector<double> crosstalk_row;  // X_kj for every heater j; X_kk ignored
};

inline constexpr std::size_t kDriveChannels = 8;

/// DAC codes of the eight-channel current driver. Channels 0 and 1 feed
/// the interferometer phase shifters on paths B and C.
struct HeaterDrive {
    std::array<std::uint32_t, kDriveChannels> codes{};
    double current_resolution_ua = 23.0;
    double max_current_ma = 23.0;

    double current_ma(std::size_t channel) const {
        return static_cast<double>(codes[channel]) * current_resolution_ua * 1e-3;
    }
    std::uint32_t max_code() const;
    void validate() const;
};

struct CircuitState {
    Coupler divider_first{1.0 / 3.0};  // 33/66, cross port feeds path A
    Coupler divider_second{0.5};       // 50/50, splits the remainder into B and C
    Coupler hbt_tap{0.5};
    std::array<Switch, 3> switches{};
    std::vector<Heater> heaters{Heater{}, Heater{}};
    HeaterDrive drive{};
    double insertion_loss_db = 2.0;
    /// Probability added to the all-open configuration on top of the Born
    /// value, in units of the lossless circuit probability. Zero for
    /// physical runs; used to check that the estimators see a deviation.
    double third_order_injection = 0.0;

    BlockingConfig blocking() const;
    /// Copy with switch states set from `cfg`.
    CircuitState configured(BlockingConfig cfg) const;
    CircuitState with_codes(std::uint32_t code_b, std::uint32_t code_c) const;
    void validate() const;
};

Matrix2 coupler_matrix(const Coupler& c);

/// Per-path divider amplitudes (a_A, a_B, a_C); the combiner reuses them.
std::array<cplx, 3> divider_amplitudes(const CircuitState& state);

/// Heater power in mW for drive channel `k` into resistance `r`.
double heater_power_mw(const HeaterDrive& drive, std::size_t k, double resistance_ohm);

/// phi_k = phi0_k + 2 pi / P2pi_k * (P_k + sum_j X_kj P_j).
std::vector<double> heater_phases(const std::vector<Heater>& heaters, const HeaterDrive& drive);

/// I_max^2 R in mW.
double max_heater_power_mw(double max_current_ma, double resistance_ohm);

/// Smallest phase increment from one DAC code step at heater power
/// `power_mw`, in rad.
double phase_step_rad(const Heater& heater, const HeaterDrive& drive, double power_mw);

cplx path_transmission(const Switch& sw);

/// Amplitude of the power leaving the switch's drop port.
cplx path_drop(const Switch& sw);

/// Path phases (phi_A, phi_B, phi_C); path A is the phase reference.
std::array<double, 3> path_phases(const CircuitState& state);

struct OutputAmplitudes {
    cplx interferometer;
    cplx hbt_1;
    cplx hbt_2;
};

OutputAmplitudes output_amplitude(const CircuitState& state);

/// Click probabilities per input photon for output ports
/// 0 (interferometer), 1 and 2 (HBT tap).
std::array<double, 3> port_probabilities(const CircuitState& state);

/// Power in every physical exit of the chip: the three combiner outputs,
/// the drop ports of switches A and B, both HBT outputs, and the
/// insertion loss. Sums to one.
struct PortPowers {
    std::array<double, 3> combiner{};
    std::array<double, 2> drops_ab{};
    std::array<double, 2> hbt{};
    double insertion_loss = 0.0;
    double total() const;
};
PortPowers all_port_powers(const CircuitState& state);

/// Largest interferometer-output probability reachable by tuning the two
/// phase shifters with all paths open.
double max_output_probability(const CircuitState& state);

/// Routes each photon independently to an output port or loses it.
std::array<TimeTagSeries, 3> transmit_stream(const CircuitState& state, const TimeTagSeries& photons,
                                             std::uint64_t seed);

/// Removes tags in [start, start + window), i.e. photons arriving while a
/// switch is still settling after a reconfiguration.
TimeTagSeries discard_settle_window(const TimeTagSeries& s, Picoseconds start, Picoseconds window);

}  // namespace q3::circuit
