#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "q3/circuit.hpp"
#include "q3/rng.hpp"

namespace q3::calibration {

using circuit::BlockingConfig;
using circuit::CircuitState;

/// Stands in for the flight measurement of one probe point: the click
/// count on the interferometer output for a blocking configuration and
/// two phase-shifter codes. The hidden `truth` (fabrication phases,
/// crosstalk) is only used to produce counts.
class Prober {
public:
    struct Model {
        double counts_per_point = 1e5;  // expected counts at the interference maximum
        bool noiseless = false;
        std::uint64_t seed = 0;
    };

    Prober(CircuitState truth, Model model);

    double measure(BlockingConfig cfg, std::uint32_t code_b, std::uint32_t code_c);
    std::size_t shots() const { return shots_; }
    const CircuitState& truth() const { return truth_; }

private:
    CircuitState truth_;
    Model model_;
    double scale_;
    Rng rng_;
    std::size_t shots_ = 0;
};

using Matrix2d = std::array<std::array<double, 2>, 2>;

struct CrosstalkPlan {
    std::size_t self_points = 48;
    std::size_t cross_points = 24;
    double min_contrast = 0.05;  // fringe amplitude over mean
};

struct CrosstalkResult {
    Matrix2d estimate{};             // X_ij: shift of shifter i per unit power on heater j
    std::array<double, 2> rad_per_mw{};  // fitted self slopes
    std::array<double, 2> contrast{};
};

/// Scans each heater alone in the matching two-path configuration (AB for
/// the path-B shifter, AC for path C), fits the fringe, then measures the
/// neighbour's phase in two quadratures while sweeping the other heater.
/// X_ij is the ratio of the cross slope to the self slope.
CrosstalkResult estimate_crosstalk(Prober& probe, const CircuitState& model, const CrosstalkPlan& plan = {});

struct CalibrationOptions {
    std::size_t grid = 16;
    std::size_t budget = 1000;  // probe points
};

struct TracePoint {
    std::uint32_t code_b = 0;
    std::uint32_t code_c = 0;
    double measured = 0.0;
    bool accepted = false;  // coordinate-ascent step kept
};

struct CalibrationResult {
    std::array<std::uint32_t, 2> heater_codes{};
    double achieved_power_fraction = 0.0;
    std::array<double, 2> recovered_offsets{};  // rad, mod 2 pi
    Matrix2d crosstalk_estimate{};
    std::vector<TracePoint> scan_trace;
    std::size_t grid_points = 0;
    std::size_t probes_used = 0;
    double final_step_rad = 0.0;
};

/// Coarse grid over both shifter powers in [0, P_2pi], then coordinate
/// ascent in crosstalk-compensated phase space with a 3-point quadratic
/// refinement per axis, halving the step until it falls below the DAC
/// phase resolution or the budget runs out. `model` supplies resistances,
/// P_2pi and drive limits; its phase offsets are ignored.
CalibrationResult calibrate_phases(Prober& probe, const CircuitState& model, const Matrix2d& crosstalk,
                                   const CalibrationOptions& opt = {});

/// DAC code whose power is closest to `power_mw`.
std::uint32_t code_for_power(const circuit::Heater& heater, const circuit::HeaterDrive& drive, double power_mw);

}  // namespace q3::calibration
