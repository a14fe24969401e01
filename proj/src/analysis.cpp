#include "q3/analysis.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "q3/error.hpp"
#include "q3/rng.hpp"

namespace q3::analysis {

namespace {

using circuit::kAllConfigs;

// Coefficient of P_X in eps, by mask.
constexpr std::array<double, 8> kEpsSign{-1.0, +1.0, +1.0, -1.0, +1.0, -1.0, -1.0, +1.0};

constexpr std::array<std::array<std::uint8_t, 3>, 3> kPairs{{
    {3, 1, 2},  // AB, A, B
    {5, 1, 4},  // AC, A, C
    {6, 2, 4},  // BC, B, C
}};

std::array<double, 8> dense(const ProbabilityTable& p) {
    std::array<double, 8> out{};
    for (auto cfg : kAllConfigs) out[cfg.mask()] = p.at(cfg);
    return out;
}

double eps_of(const std::array<double, 8>& p) {
    return p[7] - p[3] - p[5] - p[6] + p[1] + p[2] + p[4] - p[0];
}

std::array<double, 3> pairs_of(const std::array<double, 8>& p) {
    std::array<double, 3> out{};
    for (std::size_t k = 0; k < 3; ++k)
        out[k] = p[kPairs[k][0]] - p[kPairs[k][1]] - p[kPairs[k][2]] + p[0];
    return out;
}

double delta_of(const std::array<double, 8>& p) {
    const auto i = pairs_of(p);
    return std::fabs(i[0]) + std::fabs(i[1]) + std::fabs(i[2]);
}

double scale_of(const std::array<double, 8>& p) {
    double s = 0.0;
    for (double v : p) s = std::max(s, std::fabs(v));
    return s;
}

void check_delta(double delta, const std::array<double, 8>& p) {
    if (!(delta > 1e-13 * scale_of(p)) || delta == 0.0)
        fail(ErrorKind::Normalization,
             "no two-path interference (delta = 0): kappa normalization undefined");
}

// Gradients of eps, delta and kappa with respect to each P_X.
struct Gradients {
    std::array<double, 8> eps{};
    std::array<double, 8> delta{};
    std::array<double, 8> kappa{};
};

Gradients gradients(const std::array<double, 8>& p) {
    Gradients g;
    g.eps = kEpsSign;
    const auto pairs = pairs_of(p);
    for (std::size_t k = 0; k < 3; ++k) {
        const double s = pairs[k] > 0.0 ? 1.0 : (pairs[k] < 0.0 ? -1.0 : 0.0);
        g.delta[kPairs[k][0]] += s;
        g.delta[kPairs[k][1]] -= s;
        g.delta[kPairs[k][2]] -= s;
        g.delta[0] += s;
    }
    const double eps = eps_of(p);
    const double delta = delta_of(p);
    for (std::size_t x = 0; x < 8; ++x)
        g.kappa[x] = (g.eps[x] * delta - eps * g.delta[x]) / (delta * delta);
    return g;
}

void fill_point_estimates(SorkinResult& r, const std::array<double, 8>& p) {
    r.epsilon.value = eps_of(p);
    r.pair_interference = pairs_of(p);
    r.delta.value = delta_of(p);
    check_delta(r.delta.value, p);
    r.kappa.value = r.epsilon.value / r.delta.value;
    r.config_order.assign(kAllConfigs.begin(), kAllConfigs.end());
}

}  // namespace

G2Estimate estimate_g2(const detection::Histogram& hist, double singles_a, double singles_b,
                       double integration_time_s) {
    if (!(integration_time_s > 0.0)) fail(ErrorKind::Parameter, "integration time must be > 0 s");
    if (!(singles_a > 0.0) || !(singles_b > 0.0))
        fail(ErrorKind::Normalization, "zero singles rate: g2 normalization undefined");
    if (hist.bin_ps <= 0 || hist.counts.size() < 2) fail(ErrorKind::Parameter, "empty histogram");
    G2Estimate e;
    e.bin_ps = hist.bin_ps;
    e.singles_rates = {singles_a, singles_b};
    e.integration_time_s = integration_time_s;
    const double norm = singles_a * singles_b * (static_cast<double>(hist.bin_ps) * 1e-12) * integration_time_s;
    const std::size_t n = hist.counts.size();
    e.tau_bins_ps.resize(n);
    e.g2.resize(n);
    e.stderr_g2.resize(n);
    for (std::size_t k = 0; k < n; ++k) {
        const double c = static_cast<double>(hist.counts[k]);
        e.tau_bins_ps[k] = hist.bin_start(k);
        e.g2[k] = c / norm;
        e.stderr_g2[k] = std::sqrt(c) / norm;
    }
    // Bins [-bin, 0) and [0, bin).
    const std::size_t zero = static_cast<std::size_t>(hist.window_ps / hist.bin_ps);
    const double c0 = static_cast<double>(hist.counts[zero - 1] + hist.counts[zero]);
    e.g2_at_zero = {c0 / (2.0 * norm), std::sqrt(c0) / (2.0 * norm)};
    return e;
}

double sorkin_epsilon(const ProbabilityTable& p) { return eps_of(dense(p)); }

std::array<double, 3> pair_interference(const ProbabilityTable& p) { return pairs_of(dense(p)); }

double interference_normalization(const ProbabilityTable& p) { return delta_of(dense(p)); }

SorkinResult sorkin_kappa(const ProbabilityTable& p, const ProbabilityTable& sigma) {
    const auto pv = dense(p);
    const auto sv = dense(sigma);
    SorkinResult r;
    fill_point_estimates(r, pv);
    const Gradients g = gradients(pv);
    double ve = 0.0, vd = 0.0, vk = 0.0;
    for (std::size_t x = 0; x < 8; ++x) {
        r.probabilities[x] = {pv[x], sv[x]};
        const double s2 = sv[x] * sv[x];
        ve += g.eps[x] * g.eps[x] * s2;
        vd += g.delta[x] * g.delta[x] * s2;
        vk += g.kappa[x] * g.kappa[x] * s2;
    }
    r.epsilon.error = std::sqrt(ve);
    r.delta.error = std::sqrt(vd);
    r.kappa.error = std::sqrt(vk);
    return r;
}

namespace {

// Exposure used to scale the dark estimate: live time when every
// configuration has one, otherwise photons delivered.
std::array<double, 8> exposures(const std::array<ConfigCounts, 8>& c) {
    bool all_time = true;
    for (const auto& x : c) all_time = all_time && x.duration_s > 0.0;
    std::array<double, 8> out{};
    for (std::size_t i = 0; i < 8; ++i)
        out[i] = all_time ? c[i].duration_s : static_cast<double>(c[i].photons);
    return out;
}

std::array<double, 8> subtracted(const std::array<double, 8>& clicks, const std::array<ConfigCounts, 8>& c,
                                 const std::array<double, 8>& exposure) {
    const double dark = clicks[0] / exposure[0];
    std::array<double, 8> p{};
    for (std::size_t x = 1; x < 8; ++x)
        p[x] = (clicks[x] - dark * exposure[x]) / static_cast<double>(c[x].photons);
    return p;
}

}  // namespace

SorkinResult sorkin_from_counts(const ConfigTable<ConfigCounts>& table, const SorkinOptions& opt) {
    std::array<ConfigCounts, 8> c{};
    for (auto cfg : kAllConfigs) c[cfg.mask()] = table.at(cfg);
    for (std::size_t x = 0; x < 8; ++x) {
        if (c[x].photons == 0)
            fail(ErrorKind::Data, "configuration '" + BlockingConfig(static_cast<std::uint8_t>(x)).label() +
                                      "' has no delivered photons");
        if (c[x].clicks > c[x].photons && c[x].duration_s <= 0.0)
            fail(ErrorKind::Data, "configuration '" + BlockingConfig(static_cast<std::uint8_t>(x)).label() +
                                      "' has more counts than shots");
    }
    const auto exposure = exposures(c);
    if (!(exposure[0] > 0.0)) fail(ErrorKind::Data, "all-blocked configuration has no exposure");

    std::array<double, 8> clicks{};
    std::array<double, 8> var{};
    for (std::size_t x = 0; x < 8; ++x) {
        clicks[x] = static_cast<double>(c[x].clicks);
        const double n = static_cast<double>(c[x].photons);
        var[x] = clicks[x] * std::max(0.0, 1.0 - clicks[x] / n);
        if (x == 0) var[x] = clicks[x];  // Poisson rate estimate
    }
    const auto p = subtracted(clicks, c, exposure);

    SorkinResult r;
    r.counts = c;
    r.has_counts = true;
    fill_point_estimates(r, p);

    // d P_Y / d c_X: diagonal 1/N_Y, plus the shared dark column.
    const Gradients g = gradients(p);
    auto propagate = [&](const std::array<double, 8>& dp) {
        double v = 0.0, dark_col = 0.0;
        for (std::size_t y = 1; y < 8; ++y) {
            const double n = static_cast<double>(c[y].photons);
            v += (dp[y] / n) * (dp[y] / n) * var[y];
            dark_col -= dp[y] * exposure[y] / (exposure[0] * n);
        }
        return std::sqrt(v + dark_col * dark_col * var[0]);
    };
    r.epsilon.error = propagate(g.eps);
    r.delta.error = propagate(g.delta);
    r.kappa.error = propagate(g.kappa);
    for (std::size_t y = 0; y < 8; ++y) {
        const double n = static_cast<double>(c[y].photons);
        const double dark_term = y == 0 ? 0.0 : exposure[y] / (exposure[0] * n);
        const double self = y == 0 ? 0.0 : var[y] / (n * n);
        r.probabilities[y] = {p[y], std::sqrt(self + dark_term * dark_term * var[0])};
    }

    if (opt.bootstrap) {
        if (opt.resamples < 2) fail(ErrorKind::Parameter, "bootstrap needs at least 2 resamples");
        Rng rng(opt.seed, Stream::Bootstrap);
        double sk = 0.0, skk = 0.0, se = 0.0, see = 0.0;
        std::uint32_t used = 0;
        for (std::uint32_t b = 0; b < opt.resamples; ++b) {
            std::array<double, 8> resampled{};
            for (std::size_t x = 0; x < 8; ++x) resampled[x] = static_cast<double>(rng.poisson(clicks[x]));
            const auto pb = subtracted(resampled, c, exposure);
            const double d = delta_of(pb);
            if (!(d > 0.0)) continue;
            const double e = eps_of(pb);
            const double k = e / d;
            sk += k;
            skk += k * k;
            se += e;
            see += e * e;
            ++used;
        }
        if (used >= 2) {
            const double m = static_cast<double>(used);
            const double mk = sk / m, me = se / m;
            r.kappa_bootstrap = Measured{mk, std::sqrt(std::max(0.0, (skk - m * mk * mk) / (m - 1.0)))};
            r.epsilon_bootstrap = Measured{me, std::sqrt(std::max(0.0, (see - m * me * me) / (m - 1.0)))};
        }
        r.bootstrap_resamples = used;
    }
    return r;
}

ConfigTable<ConfigCounts> parse_count_table(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) fail(ErrorKind::Data, "empty count table");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != "config,counts,shots")
        fail(ErrorKind::Data, "count table must start with header 'config,counts,shots'");
    ConfigTable<ConfigCounts> table;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::istringstream ls(line);
        std::string label, counts, shots;
        if (!std::getline(ls, label, ',') || !std::getline(ls, counts, ',') || !std::getline(ls, shots))
            fail(ErrorKind::Data, "malformed count table at line " + std::to_string(lineno));
        ConfigCounts cc;
        try {
            cc.clicks = std::stoull(counts);
            cc.photons = std::stoull(shots);
        } catch (const std::exception&) {
            fail(ErrorKind::Data, "non-integer counts at line " + std::to_string(lineno));
        }
        const auto cfg = BlockingConfig::parse(label);
        if (table.has(cfg))
            fail(ErrorKind::Data, "duplicate configuration '" + cfg.label() + "' at line " +
                                      std::to_string(lineno));
        table.set(cfg, cc);
    }
    table.require_all();
    return table;
}

ConfigTable<ConfigCounts> read_count_table(const std::string& path) {
    std::ifstream in(path);
    if (!in) fail(ErrorKind::Io, "cannot open count table '" + path + "'");
    return parse_count_table(in);
}

}  // namespace q3::analysis
