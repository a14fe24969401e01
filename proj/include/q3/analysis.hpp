#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "q3/circuit.hpp"
#include "q3/detection.hpp"

namespace q3::analysis {

using circuit::BlockingConfig;

struct Measured {
    double value = 0.0;
    double error = 0.0;
};

struct G2Estimate {
    std::int64_t bin_ps = 0;
    std::vector<std::int64_t> tau_bins_ps;  // bin start
    std::vector<double> g2;
    std::vector<double> stderr_g2;
    Measured g2_at_zero;  // bins adjacent to zero delay, |tau| <= bin
    std::array<double, 2> singles_rates{};
    double integration_time_s = 0.0;
};

/// g2(tau_k) = C_k / (r_a r_b bin T) with Poisson error sqrt(C_k) on the
/// same scale.
G2Estimate estimate_g2(const detection::Histogram& hist, double singles_a, double singles_b,
                       double integration_time_s);

/// Value per blocking configuration, indexed by mask. Reading a missing
/// entry is a data error naming the configuration.
template <class T>
class ConfigTable {
public:
    void set(BlockingConfig cfg, T v) { values_[cfg.mask()] = std::move(v); }
    bool has(BlockingConfig cfg) const { return values_[cfg.mask()].has_value(); }
    const T& at(BlockingConfig cfg) const;
    void require_all() const {
        for (auto cfg : circuit::kAllConfigs) (void)at(cfg);
    }

private:
    std::array<std::optional<T>, 8> values_{};
};

using ProbabilityTable = ConfigTable<double>;

/// eps = P_ABC - P_AB - P_AC - P_BC + P_A + P_B + P_C - P_none.
double sorkin_epsilon(const ProbabilityTable& p);

/// Pairwise interference I_XY = P_XY - P_X - P_Y + P_none for AB, AC, BC.
std::array<double, 3> pair_interference(const ProbabilityTable& p);

/// delta = |I_AB| + |I_AC| + |I_BC|; kappa = eps / delta.
double interference_normalization(const ProbabilityTable& p);

struct ConfigCounts {
    std::uint64_t clicks = 0;
    std::uint64_t photons = 0;  // photons delivered while the configuration was active
    double duration_s = 0.0;
};

struct SorkinResult {
    std::array<Measured, 8> probabilities{};  // by mask
    std::array<ConfigCounts, 8> counts{};
    bool has_counts = false;
    Measured epsilon;
    Measured delta;
    Measured kappa;
    std::array<double, 3> pair_interference{};
    std::vector<BlockingConfig> config_order;
    std::optional<Measured> kappa_bootstrap;
    std::optional<Measured> epsilon_bootstrap;
    std::uint32_t bootstrap_resamples = 0;
};

/// Estimators with independent per-configuration errors (first order).
/// Throws a normalization error when delta vanishes.
SorkinResult sorkin_kappa(const ProbabilityTable& p, const ProbabilityTable& sigma);

struct SorkinOptions {
    bool bootstrap = false;
    std::uint32_t resamples = 1000;
    std::uint64_t seed = 0;
};

/// Click counts to probabilities: dark and leakage rate taken from the
/// all-blocked configuration and subtracted, P = (c - d T) / N. Errors by
/// first-order propagation of independent counts (binomial clicks), which
/// keeps the correlation through the shared dark estimate; optional
/// parametric bootstrap.
SorkinResult sorkin_from_counts(const ConfigTable<ConfigCounts>& counts, const SorkinOptions& opt = {});

/// Shot tables `config,counts,shots` as used by the analyze command.
ConfigTable<ConfigCounts> read_count_table(const std::string& path);
ConfigTable<ConfigCounts> parse_count_table(std::istream& in);

}  // namespace q3::analysis

#include "q3/error.hpp"

template <class T>
const T& q3::analysis::ConfigTable<T>::at(BlockingConfig cfg) const {
    const auto& v = values_[cfg.mask()];
    if (!v) fail(ErrorKind::Data, "missing blocking configuration '" + cfg.label() + "'");
    return *v;
}
