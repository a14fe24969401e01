#include "q3/calibration.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "q3/error.hpp"

namespace q3::calibration {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kTwoPi = 2.0 * std::numbers::pi;

double wrap(double x) {
    x = std::fmod(x, kTwoPi);
    return x < 0.0 ? x + kTwoPi : x;
}

double code_power(const circuit::Heater& h, const circuit::HeaterDrive& d, std::uint32_t code) {
    const double i_a = static_cast<double>(code) * d.current_resolution_ua * 1e-6;
    return i_a * i_a * h.resistance_ohm * 1e3;
}

// Maps between drive codes and crosstalk-compensated effective phases
// theta_k = 2 pi / P2pi_k (P_k + X_kj P_j).
class PhaseMap {
public:
    PhaseMap(const CircuitState& model, const Matrix2d& x) : model_(model), x_(x) {}

    std::array<double, 2> powers(std::array<std::uint32_t, 2> codes) const {
        return {code_power(model_.heaters[0], model_.drive, codes[0]),
                code_power(model_.heaters[1], model_.drive, codes[1])};
    }

    std::array<double, 2> phases(std::array<std::uint32_t, 2> codes) const {
        const auto p = powers(codes);
        return {kTwoPi / model_.heaters[0].p2pi_mw * (p[0] + x_[0][1] * p[1]),
                kTwoPi / model_.heaters[1].p2pi_mw * (p[1] + x_[1][0] * p[0])};
    }

    // Lowest-power codes realizing the phases modulo 2 pi.
    std::array<std::uint32_t, 2> codes(std::array<double, 2> theta) const {
        const double det = 1.0 - x_[0][1] * x_[1][0];
        const double p_max0 = circuit::max_heater_power_mw(model_.drive.max_current_ma, model_.heaters[0].resistance_ohm);
        const double p_max1 = circuit::max_heater_power_mw(model_.drive.max_current_ma, model_.heaters[1].resistance_ohm);
        double best_sum = std::numeric_limits<double>::infinity();
        std::array<double, 2> best{0.0, 0.0};
        for (int m0 = 0; m0 < 4; ++m0) {
            for (int m1 = 0; m1 < 4; ++m1) {
                const double q0 = (wrap(theta[0]) + kTwoPi * m0) * model_.heaters[0].p2pi_mw / kTwoPi;
                const double q1 = (wrap(theta[1]) + kTwoPi * m1) * model_.heaters[1].p2pi_mw / kTwoPi;
                const double p0 = (q0 - x_[0][1] * q1) / det;
                const double p1 = (q1 - x_[1][0] * q0) / det;
                if (p0 < 0.0 || p1 < 0.0 || p0 > p_max0 || p1 > p_max1) continue;
                if (p0 + p1 < best_sum) {
                    best_sum = p0 + p1;
                    best = {p0, p1};
                }
            }
        }
        return {code_for_power(model_.heaters[0], model_.drive, best[0]),
                code_for_power(model_.heaters[1], model_.drive, best[1])};
    }

    double resolution(std::array<std::uint32_t, 2> codes) const {
        const auto p = powers(codes);
        return std::max({circuit::phase_step_rad(model_.heaters[0], model_.drive, p[0]),
                         circuit::phase_step_rad(model_.heaters[1], model_.drive, p[1]), 1e-4});
    }

private:
    const CircuitState& model_;
    Matrix2d x_;
};

struct SinusoidFit {
    double mean = 0.0, u = 0.0, v = 0.0, omega = 0.0, sse = 0.0;
    double amplitude() const { return std::hypot(u, v); }
};

// Least squares y = a + u cos(w x) + v sin(w x) at fixed w.
SinusoidFit fit_at(const std::vector<double>& x, const std::vector<double>& y, double w) {
    double m[3][4] = {};
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double f[3] = {1.0, std::cos(w * x[i]), std::sin(w * x[i])};
        for (int r = 0; r < 3; ++r) {
            for (int c = 0; c < 3; ++c) m[r][c] += f[r] * f[c];
            m[r][3] += f[r] * y[i];
        }
    }
    for (int col = 0; col < 3; ++col) {
        int piv = col;
        for (int r = col + 1; r < 3; ++r)
            if (std::fabs(m[r][col]) > std::fabs(m[piv][col])) piv = r;
        for (int c = 0; c < 4; ++c) std::swap(m[col][c], m[piv][c]);
        if (std::fabs(m[col][col]) < 1e-300) return {0, 0, 0, w, std::numeric_limits<double>::infinity()};
        for (int r = 0; r < 3; ++r) {
            if (r == col) continue;
            const double f = m[r][col] / m[col][col];
            for (int c = col; c < 4; ++c) m[r][c] -= f * m[col][c];
        }
    }
    SinusoidFit fit{m[0][3] / m[0][0], m[1][3] / m[1][1], m[2][3] / m[2][2], w, 0.0};
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double r = y[i] - (fit.mean + fit.u * std::cos(w * x[i]) + fit.v * std::sin(w * x[i]));
        fit.sse += r * r;
    }
    return fit;
}

SinusoidFit fit_sinusoid(const std::vector<double>& x, const std::vector<double>& y, double w_nominal) {
    const double lo = 0.5 * w_nominal, hi = 2.0 * w_nominal;
    constexpr int kGrid = 301;
    const double step = (hi - lo) / (kGrid - 1);
    SinusoidFit best = fit_at(x, y, lo);
    for (int k = 1; k < kGrid; ++k) {
        const SinusoidFit f = fit_at(x, y, lo + step * k);
        if (f.sse < best.sse) best = f;
    }
    // Golden-section refinement around the grid minimum.
    double a = best.omega - step, b = best.omega + step;
    const double g = 0.5 * (std::sqrt(5.0) - 1.0);
    double c = b - g * (b - a), d = a + g * (b - a);
    SinusoidFit fc = fit_at(x, y, c), fd = fit_at(x, y, d);
    for (int it = 0; it < 80; ++it) {
        if (fc.sse < fd.sse) {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = fit_at(x, y, c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = fit_at(x, y, d);
        }
    }
    const SinusoidFit refined = fc.sse < fd.sse ? fc : fd;
    return refined.sse < best.sse ? refined : best;
}

double slope(const std::vector<double>& x, const std::vector<double>& y) {
    const double n = static_cast<double>(x.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sx += x[i];
        sy += y[i];
        sxx += x[i] * x[i];
        sxy += x[i] * y[i];
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

std::vector<std::uint32_t> spread_codes(std::uint32_t max_code, std::size_t n) {
    std::vector<std::uint32_t> out(n);
    for (std::size_t k = 0; k < n; ++k)
        out[k] = static_cast<std::uint32_t>(std::llround(static_cast<double>(max_code) * static_cast<double>(k) /
                                                         static_cast<double>(n - 1)));
    return out;
}

}  // namespace

Prober::Prober(CircuitState truth, Model model)
    : truth_(std::move(truth)), model_(model), rng_(model.seed, Stream::Probe) {
    scale_ = model_.counts_per_point / circuit::max_output_probability(truth_);
}

double Prober::measure(BlockingConfig cfg, std::uint32_t code_b, std::uint32_t code_c) {
    ++shots_;
    const double p = circuit::port_probabilities(truth_.configured(cfg).with_codes(code_b, code_c))[0];
    const double expected = scale_ * p;
    if (model_.noiseless) return expected;
    return static_cast<double>(rng_.poisson(expected));
}

std::uint32_t code_for_power(const circuit::Heater& heater, const circuit::HeaterDrive& drive, double power_mw) {
    const double i_ua = std::sqrt(std::max(0.0, power_mw) * 1e-3 / heater.resistance_ohm) * 1e6;
    const double code = std::round(i_ua / drive.current_resolution_ua);
    return static_cast<std::uint32_t>(std::clamp(code, 0.0, static_cast<double>(drive.max_code())));
}

CrosstalkResult estimate_crosstalk(Prober& probe, const CircuitState& model, const CrosstalkPlan& plan) {
    if (plan.self_points < 8 || plan.cross_points < 4)
        fail(ErrorKind::Parameter, "crosstalk plan needs >= 8 self and >= 4 cross points");
    CrosstalkResult out;
    const std::uint32_t max_code = model.drive.max_code();
    const std::array<BlockingConfig, 2> cfgs{BlockingConfig(0b011), BlockingConfig(0b101)};
    for (std::size_t i = 0; i < 2; ++i) {
        const std::size_t j = 1 - i;
        const auto& hi = model.heaters[i];
        const auto& hj = model.heaters[j];
        auto measure = [&](std::uint32_t ci, std::uint32_t cj) {
            return i == 0 ? probe.measure(cfgs[i], ci, cj) : probe.measure(cfgs[i], cj, ci);
        };

        std::vector<double> px, py;
        for (std::uint32_t code : spread_codes(max_code, plan.self_points)) {
            px.push_back(code_power(hi, model.drive, code));
            py.push_back(measure(code, 0));
        }
        const SinusoidFit fit = fit_sinusoid(px, py, kTwoPi / hi.p2pi_mw);
        const double amp = fit.amplitude();
        out.rad_per_mw[i] = fit.omega;
        out.contrast[i] = fit.mean > 0.0 ? amp / fit.mean : 0.0;
        if (!(fit.mean > 0.0) || out.contrast[i] < plan.min_contrast)
            fail(ErrorKind::Fit, "insufficient fringe contrast on shifter " + std::to_string(i));

        const std::uint32_t q_code = code_for_power(hi, model.drive, kPi / (2.0 * fit.omega));
        const double alpha = fit.omega * code_power(hi, model.drive, q_code);
        if (std::fabs(std::sin(alpha)) < 0.3) fail(ErrorKind::Fit, "quadrature offset not reachable");

        std::vector<double> cx, psi;
        double prev = 0.0;
        for (std::uint32_t code : spread_codes(max_code, plan.cross_points)) {
            const double c1 = (measure(0, code) - fit.mean) / amp;
            const double c2 = (measure(q_code, code) - fit.mean) / amp;
            const double s = (c1 * std::cos(alpha) - c2) / std::sin(alpha);
            double phase = std::atan2(s, c1);
            if (!psi.empty()) phase = prev + std::remainder(phase - prev, kTwoPi);
            prev = phase;
            cx.push_back(code_power(hj, model.drive, code));
            psi.push_back(phase);
        }
        out.estimate[i][j] = slope(cx, psi) / fit.omega;
    }
    return out;
}

CalibrationResult calibrate_phases(Prober& probe, const CircuitState& model, const Matrix2d& crosstalk,
                                   const CalibrationOptions& opt) {
    if (opt.grid < 2) fail(ErrorKind::Parameter, "calibration grid must be >= 2 per axis");
    const std::size_t grid_points = opt.grid * opt.grid;
    if (opt.budget < grid_points)
        fail(ErrorKind::Budget, "budget of " + std::to_string(opt.budget) +
                                    " probes cannot cover one grid pass of " + std::to_string(grid_points));

    CalibrationResult result;
    result.crosstalk_estimate = crosstalk;
    result.grid_points = grid_points;
    const PhaseMap map(model, crosstalk);
    const BlockingConfig all = BlockingConfig::all();
    std::size_t used = 0;

    auto measure = [&](std::array<std::uint32_t, 2> codes) {
        ++used;
        const double v = probe.measure(all, codes[0], codes[1]);
        result.scan_trace.push_back({codes[0], codes[1], v, false});
        return v;
    };

    // Stage 1: coarse grid over [0, P_2pi) per shifter.
    std::array<std::uint32_t, 2> best_codes{};
    double best = -1.0;
    for (std::size_t a = 0; a < opt.grid; ++a) {
        for (std::size_t b = 0; b < opt.grid; ++b) {
            const std::array<std::uint32_t, 2> codes{
                code_for_power(model.heaters[0], model.drive,
                               model.heaters[0].p2pi_mw * static_cast<double>(a) / static_cast<double>(opt.grid)),
                code_for_power(model.heaters[1], model.drive,
                               model.heaters[1].p2pi_mw * static_cast<double>(b) / static_cast<double>(opt.grid))};
            const double v = measure(codes);
            if (v > best) {
                best = v;
                best_codes = codes;
            }
        }
    }
    if (!(best > 0.0)) fail(ErrorKind::Signal, "all calibration probes returned zero counts");
    for (auto it = result.scan_trace.rbegin(); it != result.scan_trace.rend(); ++it) {
        if (it->code_b == best_codes[0] && it->code_c == best_codes[1] && it->measured == best) {
            it->accepted = true;
            break;
        }
    }

    // Stage 2: coordinate ascent on effective phases.
    auto theta = map.phases(best_codes);
    auto codes = best_codes;
    double f0 = best;
    double h = kTwoPi / static_cast<double>(opt.grid);
    while (h >= map.resolution(codes)) {
        bool improved = false;
        for (std::size_t axis = 0; axis < 2; ++axis) {
            if (used + 3 > opt.budget) break;
            auto shifted = [&](double dx) {
                auto t = theta;
                t[axis] += dx;
                return t;
            };
            const auto cp = map.codes(shifted(h));
            const auto cm = map.codes(shifted(-h));
            const double fp = measure(cp);
            const std::size_t idx_p = result.scan_trace.size() - 1;
            const double fm = measure(cm);
            const std::size_t idx_m = result.scan_trace.size() - 1;
            const double curvature = fp + fm - 2.0 * f0;
            double dx = fp > fm ? h : -h;
            if (curvature < 0.0) dx = std::clamp(h * (fm - fp) / (2.0 * curvature), -h, h);
            const auto cv = map.codes(shifted(dx));
            const double fv = measure(cv);
            const std::size_t idx_v = result.scan_trace.size() - 1;

            double f_new = f0;
            std::size_t pick = 0;
            std::array<std::uint32_t, 2> c_new = codes;
            if (fp > f_new) f_new = fp, pick = idx_p, c_new = cp;
            if (fm > f_new) f_new = fm, pick = idx_m, c_new = cm;
            if (fv > f_new) f_new = fv, pick = idx_v, c_new = cv;
            if (f_new > f0) {
                f0 = f_new;
                codes = c_new;
                theta = map.phases(codes);
                result.scan_trace[pick].accepted = true;
                improved = true;
            }
        }
        if (used + 3 > opt.budget) break;
        if (!improved) h *= 0.5;
    }

    result.heater_codes = codes;
    result.probes_used = used;
    result.final_step_rad = h;
    const auto& truth = probe.truth();
    const double achieved = circuit::port_probabilities(
        truth.configured(all).with_codes(codes[0], codes[1]))[0];
    result.achieved_power_fraction = std::clamp(achieved / circuit::max_output_probability(truth), 0.0, 1.0);

    // Alignment needs arg(d_p^2) + phi_p = arg(d_A^2); the remainder is phi0.
    const auto d = circuit::divider_amplitudes(model);
    const auto phases = map.phases(codes);
    for (std::size_t k = 0; k < 2; ++k) {
        const double target = std::arg(d[0] * d[0]) - std::arg(d[k + 1] * d[k + 1]);
        result.recovered_offsets[k] = wrap(target - phases[k]);
    }
    return result;
}

}  // namespace q3::calibration
