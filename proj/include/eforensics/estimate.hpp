#pragma once

// Counterfactual estimation: the favorable-share bias of the kappa outlier stations and
// the scenario curve rho_beta = R - beta * (r_kappa - R).

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "eforensics/error.hpp"
#include "eforensics/model.hpp"
#include "eforensics/rng.hpp"
#include "eforensics/stats.hpp"
#include "eforensics/zeta.hpp"
#include "eforensics/zscore.hpp"

namespace eforensics {

inline constexpr double dead_heat_low = 0.49;
inline constexpr double dead_heat_high = 0.51;

inline constexpr const char *outlier_representativeness_assumption =
    "rho_beta treats the kappa outlier stations as a bias-representative subsample of all stations affected by "
    "irregularities; that assumption is not tested here.";

/// 0.00, 0.05, ..., 1.00 together with the named scenario bounds 0.25, 0.45, 0.5, 0.7, 1.0.
inline std::vector<double> default_beta_grid() {
    std::vector<double> grid;
    for (int i = 0; i <= 20; ++i) {
        grid.push_back(i / 20.0);
    }
    for (double b : {0.25, 0.45, 0.5, 0.7, 1.0}) {
        grid.push_back(b);
    }
    std::sort(grid.begin(), grid.end());
    grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
    return grid;
}

struct RhoPoint {
    double beta = 0.0;
    double rho = 0.0;

    friend bool operator==(const RhoPoint &, const RhoPoint &) = default;
};

/// Station-level bootstrap spread of epsilon_hat over the outlier set. Not part of the original estimator.
struct EpsilonResample {
    std::size_t replicates = 0;
    std::uint64_t seed = 0;
    double sd = 0.0;
    double q025 = 0.0;
    double q975 = 0.0;

    friend bool operator==(const EpsilonResample &, const EpsilonResample &) = default;
};

struct FraudEstimate {
    double threshold = default_kappa_threshold;
    std::size_t K = 0;
    std::size_t kappa = 0;
    double expected_kappa = 0.0;
    double excess_factor = 0.0;
    double r_kappa = 0.0;
    double R = 0.0;
    double epsilon_hat = 0.0;
    std::vector<RhoPoint> rho_curve;
    std::optional<double> crossover_beta;
    std::vector<std::string> warnings;
    std::string assumption = outlier_representativeness_assumption;
    std::optional<EpsilonResample> resample;

    [[nodiscard]] double rho(double beta) const noexcept { return R - beta * epsilon_hat; }

    friend bool operator==(const FraudEstimate &, const FraudEstimate &) = default;
};

/// Smallest beta in [0, 1] with rho_beta <= 0.5, if any.
inline std::optional<double> crossover_beta(double R, double epsilon_hat) {
    if (R <= 0.5) {
        return 0.0;
    }
    if (epsilon_hat > 0.0 && R - epsilon_hat <= 0.5) {
        return std::min(1.0, (R - 0.5) / epsilon_hat);
    }
    return std::nullopt;
}

/// Builds the estimate from already-measured ratios.
inline FraudEstimate fraud_estimate_from_ratios(double R, double r_kappa, std::size_t kappa, std::size_t K,
                                                double threshold, const std::vector<double> &beta_grid) {
    for (double b : beta_grid) {
        if (!(b >= 0.0 && b <= 1.0)) {
            throw forensics_error(ErrorKind::config_invalid, "beta grid values must lie in [0, 1]");
        }
    }
    FraudEstimate est;
    est.threshold = threshold;
    est.K = K;
    est.kappa = kappa;
    est.expected_kappa = 2.0 * stats::normal_sf(threshold) * static_cast<double>(K);
    est.excess_factor = est.expected_kappa > 0.0 ? static_cast<double>(kappa) / est.expected_kappa : 0.0;
    est.r_kappa = r_kappa;
    est.R = R;
    est.epsilon_hat = r_kappa - R;
    est.rho_curve.reserve(beta_grid.size());
    for (double b : beta_grid) {
        est.rho_curve.push_back({b, est.rho(b)});
    }
    est.crossover_beta = crossover_beta(R, est.epsilon_hat);
    return est;
}

/// Indices (into table.entries) of stations with |Z| above the table threshold.
inline std::vector<std::size_t> outlier_indices(const ZScoreTable &table) {
    std::vector<std::size_t> out;
    for (auto idx : table.extreme_order) {
        if (std::abs(table.entries[idx].z) > table.kappa_threshold) {
            out.push_back(idx);
        } else {
            break;
        }
    }
    return out;
}

/**
 * Estimates epsilon by r_kappa - R over the stations with |Z| above the table's threshold.
 *
 * Passing a verdict that does not reject H1 adds a warning but still computes the estimate.
 */
inline FraudEstimate fraud_estimate(const ElectionDataset &ds, const ZScoreTable &table,
                                    const std::vector<double> &beta_grid = default_beta_grid(),
                                    const std::optional<Verdict> &h1_verdict = std::nullopt) {
    const auto outliers = outlier_indices(table);
    if (outliers.empty()) {
        throw forensics_error(ErrorKind::no_outliers, "no station has |Z| > " + std::to_string(table.kappa_threshold));
    }
    const auto tallies = detail::aligned_tallies(ds, table);
    count_t w = 0;
    count_t t = 0;
    for (auto idx : outliers) {
        w += tallies[idx].favorable;
        t += tallies[idx].valid;
    }
    if (t == 0) {
        throw forensics_error(ErrorKind::zero_valid_votes, "outlier stations have no valid votes");
    }
    auto est = fraud_estimate_from_ratios(population_ratio(ds), static_cast<double>(w) / static_cast<double>(t),
                                          outliers.size(), table.size(), table.kappa_threshold, beta_grid);
    if (h1_verdict && !h1_verdict->h1_rejected) {
        est.warnings.emplace_back("H1 was not rejected for this election; the estimate is computed on analyst override");
    }
    return est;
}

/// Attaches a bootstrap spread of epsilon_hat (stations resampled with replacement among the outliers).
inline void attach_resample(FraudEstimate &est, const ElectionDataset &ds, const ZScoreTable &table,
                            std::size_t replicates = 1000, std::uint64_t seed = 0) {
    const auto outliers = outlier_indices(table);
    if (outliers.empty()) {
        throw forensics_error(ErrorKind::no_outliers, "no outliers to resample");
    }
    const auto tallies = detail::aligned_tallies(ds, table);
    rng::Xoshiro256 gen(rng::substream_seed(seed, 0x5EED));
    std::vector<double> eps;
    eps.reserve(replicates);
    for (std::size_t r = 0; r < replicates; ++r) {
        count_t w = 0;
        count_t t = 0;
        for (std::size_t i = 0; i < outliers.size(); ++i) {
            const auto &p = tallies[outliers[gen.below(outliers.size())]];
            w += p.favorable;
            t += p.valid;
        }
        if (t > 0) {
            eps.push_back(static_cast<double>(w) / static_cast<double>(t) - est.R);
        }
    }
    std::sort(eps.begin(), eps.end());
    EpsilonResample res;
    res.replicates = replicates;
    res.seed = seed;
    if (!eps.empty()) {
        res.sd = std::sqrt(stats::sample_moments(eps).variance);
        auto quantile = [&](double q) {
            const auto pos = static_cast<std::size_t>(std::floor(q * static_cast<double>(eps.size() - 1)));
            return eps[pos];
        };
        res.q025 = quantile(0.025);
        res.q975 = quantile(0.975);
    }
    est.resample = res;
}

struct Scenario {
    std::string label;
    double beta_low = 0.0;
    double beta_high = 1.0;

    friend bool operator==(const Scenario &, const Scenario &) = default;
};

/// Named beta ranges discussed for the 2004, 2007 and 2009 referendums.
inline std::vector<Scenario> default_scenarios() {
    return {{"all-stations", 0.0, 1.0}, {"extreme", 0.7, 1.0}, {"moderate", 0.25, 0.45}, {"half", 0.5, 0.5}};
}

enum class ScenarioOutcome { inverted, dead_heat, upheld };

constexpr std::string_view to_string(ScenarioOutcome o) noexcept {
    switch (o) {
        case ScenarioOutcome::inverted: return "inverted";
        case ScenarioOutcome::dead_heat: return "dead-heat";
        case ScenarioOutcome::upheld: return "upheld";
    }
    return "upheld";
}

inline ScenarioOutcome parse_scenario_outcome(std::string_view text) {
    if (text == "inverted") {
        return ScenarioOutcome::inverted;
    }
    if (text == "dead-heat") {
        return ScenarioOutcome::dead_heat;
    }
    if (text == "upheld") {
        return ScenarioOutcome::upheld;
    }
    throw forensics_error(ErrorKind::config_invalid, "unknown scenario outcome '" + std::string(text) + "'");
}

struct ScenarioRow {
    std::string label;
    double beta_low = 0.0;
    double beta_high = 0.0;
    double rho_low_beta = 0.0;   // rho at beta_low
    double rho_high_beta = 0.0;  // rho at beta_high
    ScenarioOutcome outcome = ScenarioOutcome::upheld;

    friend bool operator==(const ScenarioRow &, const ScenarioRow &) = default;
};

struct DeadHeatBand {
    double low = dead_heat_low;
    double high = dead_heat_high;

    friend bool operator==(const DeadHeatBand &, const DeadHeatBand &) = default;
};

/// dead-heat if the rho range meets the band; inverted if it lies wholly past the band on the side opposite R.
inline ScenarioOutcome classify_scenario(double R, double rho_a, double rho_b, const DeadHeatBand &band = {}) {
    const double lo = std::min(rho_a, rho_b);
    const double hi = std::max(rho_a, rho_b);
    if (hi >= band.low && lo <= band.high) {
        return ScenarioOutcome::dead_heat;
    }
    if (R > 0.5 && hi < band.low) {
        return ScenarioOutcome::inverted;
    }
    if (R < 0.5 && lo > band.high) {
        return ScenarioOutcome::inverted;
    }
    return ScenarioOutcome::upheld;
}

inline std::vector<ScenarioRow> scenario_table(const FraudEstimate &est, const std::vector<Scenario> &scenarios,
                                               const DeadHeatBand &band = {}) {
    std::vector<ScenarioRow> rows;
    rows.reserve(scenarios.size());
    for (const auto &s : scenarios) {
        if (!(s.beta_low >= 0.0 && s.beta_high <= 1.0 && s.beta_low <= s.beta_high)) {
            throw forensics_error(ErrorKind::config_invalid, "scenario '" + s.label + "' has an invalid beta range");
        }
        ScenarioRow row;
        row.label = s.label;
        row.beta_low = s.beta_low;
        row.beta_high = s.beta_high;
        row.rho_low_beta = est.rho(s.beta_low);
        row.rho_high_beta = est.rho(s.beta_high);
        row.outcome = classify_scenario(est.R, row.rho_low_beta, row.rho_high_beta, band);
        rows.push_back(std::move(row));
    }
    return rows;
}

}  // namespace eforensics
