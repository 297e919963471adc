#pragma once

// Finite-population (hypergeometric) Z-scores of O per station, relative to its center.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <string>
#include <vector>

#include "eforensics/detail/parallel.hpp"
#include "eforensics/error.hpp"
#include "eforensics/model.hpp"
#include "eforensics/stats.hpp"

namespace eforensics {

inline constexpr double default_kappa_threshold = 3.9;

/// (O - p tau) / sqrt(p (1 - p) tau (v - tau) / (v - 1)).
inline double hypergeometric_z(double observed, double p, double tau, double v) {
    const double deviation = observed - p * tau;
    const double var = p * (1.0 - p) * tau * (v - tau) / (v - 1.0);
    if (!(var > 0.0)) {
        if (deviation == 0.0) {
            return 0.0;
        }
        throw forensics_error(ErrorKind::degenerate_station, "zero variance with nonzero deviation");
    }
    return deviation / std::sqrt(var);
}

/// Integer numerators O_i * v - (sum O) * tau_i; dividing by v gives O_i - p tau_i. They sum to zero exactly.
inline std::vector<count_t> center_deviation_numerators(const Center &center) {
    const count_t v = center.registered_total();
    const count_t o_total = center.O_total();
    std::vector<count_t> out;
    out.reserve(center.stations.size());
    for (const auto &s : center.stations) {
        out.push_back(derived_O(s) * v - o_total * s.registered);
    }
    return out;
}

namespace detail {

inline double z_from_counts(count_t o, count_t tau, count_t o_total, count_t v, const std::string &station_id) {
    const count_t numerator = o * v - o_total * tau;
    const double vd = static_cast<double>(v);
    const double p = static_cast<double>(o_total) / vd;
    const double var = p * (1.0 - p) * static_cast<double>(tau) * static_cast<double>(v - tau) / (vd - 1.0);
    if (!(var > 0.0)) {
        if (numerator == 0) {
            return 0.0;
        }
        throw forensics_error(ErrorKind::degenerate_station, "station '" + station_id +
                                                                 "' has zero hypergeometric variance but O != p tau");
    }
    return (static_cast<double>(numerator) / vd) / std::sqrt(var);
}

}  // namespace detail

/// Z-score of `station` within `center`; the center must hold at least two stations and include the station.
inline double station_z(const StationRecord &station, const Center &center) {
    if (center.stations.size() < 2) {
        throw forensics_error(ErrorKind::degenerate_station, "center '" + center.center_id + "' has fewer than 2 stations");
    }
    const count_t v = center.registered_total();
    if (v < 2) {
        throw forensics_error(ErrorKind::degenerate_station, "center '" + center.center_id + "' has v < 2");
    }
    return detail::z_from_counts(derived_O(station), station.registered, center.O_total(), v, station.station_id);
}

struct ZScoreEntry {
    std::string station_id;
    std::string center_id;
    count_t O = 0;
    double expected = 0.0;  // p * tau
    double z = 0.0;

    friend bool operator==(const ZScoreEntry &, const ZScoreEntry &) = default;
};

struct ZScoreTable {
    std::vector<ZScoreEntry> entries;        // dataset order (center by center)
    std::vector<std::size_t> extreme_order;  // |Z| descending, station_id ascending
    double kappa_threshold = default_kappa_threshold;
    std::size_t kappa = 0;

    [[nodiscard]] std::size_t size() const noexcept { return entries.size(); }

    friend bool operator==(const ZScoreTable &, const ZScoreTable &) = default;
};

inline std::size_t count_outliers(const std::vector<ZScoreEntry> &entries, double threshold) {
    return static_cast<std::size_t>(
        std::count_if(entries.begin(), entries.end(), [&](const ZScoreEntry &e) { return std::abs(e.z) > threshold; }));
}

/**
 * Scores every retained station and fixes the extremeness order that defines M_k.
 *
 * Centers are scored independently (optionally across `threads` workers); the
 * ordering is a single sort with station_id as the tie-breaker.
 */
inline ZScoreTable z_table(const ElectionDataset &ds, double threshold = default_kappa_threshold, unsigned threads = 1) {
    if (ds.centers.empty()) {
        throw forensics_error(ErrorKind::empty_after_cleaning, "dataset '" + ds.election_id + "' has no centers");
    }
    ZScoreTable table;
    table.kappa_threshold = threshold;

    std::vector<std::size_t> offset(ds.centers.size() + 1, 0);
    for (std::size_t c = 0; c < ds.centers.size(); ++c) {
        offset[c + 1] = offset[c] + ds.centers[c].stations.size();
    }
    table.entries.resize(offset.back());

    detail::parallel_chunks(ds.centers.size(), threads, [&](std::size_t begin, std::size_t end) {
        for (std::size_t c = begin; c < end; ++c) {
            const auto &center = ds.centers[c];
            const count_t v = center.registered_total();
            const count_t o_total = center.O_total();
            const double p = v > 0 ? static_cast<double>(o_total) / static_cast<double>(v) : 0.0;
            for (std::size_t i = 0; i < center.stations.size(); ++i) {
                const auto &s = center.stations[i];
                auto &e = table.entries[offset[c] + i];
                e.station_id = s.station_id;
                e.center_id = center.center_id;
                e.O = derived_O(s);
                e.expected = p * static_cast<double>(s.registered);
                e.z = station_z(s, center);
            }
        }
    });

    table.extreme_order.resize(table.entries.size());
    std::iota(table.extreme_order.begin(), table.extreme_order.end(), std::size_t{0});
    std::sort(table.extreme_order.begin(), table.extreme_order.end(), [&](std::size_t a, std::size_t b) {
        const double za = std::abs(table.entries[a].z);
        const double zb = std::abs(table.entries[b].z);
        if (za != zb) {
            return za > zb;
        }
        return table.entries[a].station_id < table.entries[b].station_id;
    });
    table.kappa = count_outliers(table.entries, threshold);
    return table;
}

struct QQPoint {
    double expected_quantile = 0.0;
    double observed_z = 0.0;

    friend bool operator==(const QQPoint &, const QQPoint &) = default;
};

/// Sorted Z paired with Phi^-1((i - 0.5) / n).
inline std::vector<QQPoint> normal_plot_data(const ZScoreTable &table) {
    std::vector<double> z;
    z.reserve(table.entries.size());
    for (const auto &e : table.entries) {
        z.push_back(e.z);
    }
    std::sort(z.begin(), z.end());
    const auto n = static_cast<double>(z.size());
    std::vector<QQPoint> out;
    out.reserve(z.size());
    for (std::size_t i = 0; i < z.size(); ++i) {
        out.push_back({stats::normal_quantile((static_cast<double>(i) + 0.5) / n), z[i]});
    }
    return out;
}

/// Least-squares slope of observed on expected quantiles.
inline double qq_slope(const std::vector<QQPoint> &points) {
    if (points.size() < 2) {
        return 0.0;
    }
    double mx = 0.0;
    double my = 0.0;
    for (const auto &p : points) {
        mx += p.expected_quantile;
        my += p.observed_z;
    }
    mx /= static_cast<double>(points.size());
    my /= static_cast<double>(points.size());
    double sxy = 0.0;
    double sxx = 0.0;
    for (const auto &p : points) {
        sxy += (p.expected_quantile - mx) * (p.observed_z - my);
        sxx += (p.expected_quantile - mx) * (p.expected_quantile - mx);
    }
    return sxy / sxx;
}

struct ZSummary {
    std::size_t K = 0;
    double mean = 0.0;
    double variance = 0.0;
    double expected_kappa = 0.0;  // 2 (1 - Phi(threshold)) K

    friend bool operator==(const ZSummary &, const ZSummary &) = default;
};

inline ZSummary summarize(const ZScoreTable &table) {
    std::vector<double> z;
    z.reserve(table.entries.size());
    for (const auto &e : table.entries) {
        z.push_back(e.z);
    }
    const auto m = stats::sample_moments(z);
    return {table.entries.size(), m.mean, m.variance,
            2.0 * stats::normal_sf(table.kappa_threshold) * static_cast<double>(table.entries.size())};
}

}  // namespace eforensics
