#pragma once

// Ordered-outlier bias test: ratio estimators over the k most extreme stations and
// the standardized gap zeta_k between that ratio and the population ratio.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "eforensics/detail/parallel.hpp"
#include "eforensics/error.hpp"
#include "eforensics/model.hpp"
#include "eforensics/stats.hpp"
#include "eforensics/zscore.hpp"

namespace eforensics {

inline constexpr double band_9999_half_width = 3.9;
inline constexpr double band_99_half_width = 2.58;
inline constexpr std::size_t default_k_min = 100;
inline constexpr std::size_t default_run_threshold = 50;

/// Which mean of valid votes per station scales S_k.
enum class Scaling { population_mean, sample_mean };

constexpr std::string_view to_string(Scaling s) noexcept {
    return s == Scaling::population_mean ? "population-mean" : "sample-mean";
}

inline Scaling parse_scaling(std::string_view text) {
    if (text == "population-mean") {
        return Scaling::population_mean;
    }
    if (text == "sample-mean") {
        return Scaling::sample_mean;
    }
    throw forensics_error(ErrorKind::config_invalid, "unknown scaling '" + std::string(text) + "'");
}

/// M_k as a prefix of the table's extremeness order.
inline std::span<const std::size_t> m_k(const ZScoreTable &table, std::size_t k) {
    if (k < 1 || k > table.size()) {
        throw forensics_error(ErrorKind::k_out_of_range,
                              "k = " + std::to_string(k) + " outside [1, " + std::to_string(table.size()) + "]");
    }
    return std::span<const std::size_t>(table.extreme_order).first(k);
}

namespace detail {

struct valid_pair {
    count_t favorable;
    count_t valid;
};

// Per-entry (W, T) aligned with table.entries.
inline std::vector<valid_pair> aligned_tallies(const ElectionDataset &ds, const ZScoreTable &table) {
    std::vector<valid_pair> out;
    out.reserve(table.entries.size());
    std::size_t i = 0;
    for (const auto &c : ds.centers) {
        for (const auto &s : c.stations) {
            if (i >= table.entries.size() || table.entries[i].station_id != s.station_id) {
                throw forensics_error(ErrorKind::mismatched_pair, "Z-score table does not match dataset '" +
                                                                      ds.election_id + "'");
            }
            out.push_back({s.favorable, s.valid});
            ++i;
        }
    }
    if (i != table.entries.size()) {
        throw forensics_error(ErrorKind::mismatched_pair, "Z-score table has extra entries");
    }
    return out;
}

inline int compare_ratios(count_t a_num, count_t a_den, count_t b_num, count_t b_den) {
    const auto lhs = static_cast<__int128>(a_num) * b_den;
    const auto rhs = static_cast<__int128>(b_num) * a_den;
    return lhs < rhs ? -1 : (lhs > rhs ? 1 : 0);
}

}  // namespace detail

/// r_k over M_k for any 1 <= k <= K; at k = K this is exactly R.
inline double sample_ratio(const ElectionDataset &ds, const ZScoreTable &table, std::size_t k) {
    const auto tallies = detail::aligned_tallies(ds, table);
    count_t w = 0;
    count_t t = 0;
    for (auto idx : m_k(table, k)) {
        w += tallies[idx].favorable;
        t += tallies[idx].valid;
    }
    if (t == 0) {
        throw forensics_error(ErrorKind::zero_valid_votes, "M_k has no valid votes");
    }
    return static_cast<double>(w) / static_cast<double>(t);
}

struct ZetaPoint {
    std::size_t k = 0;
    double r_k = 0.0;
    double s_k = 0.0;
    double S_k = 0.0;
    double zeta = 0.0;
    double p_value = 1.0;
    bool zero_variance = false;

    friend bool operator==(const ZetaPoint &, const ZetaPoint &) = default;
};

namespace detail {

inline ZetaPoint finish_point(std::size_t k, std::size_t K, count_t w_sum, count_t t_sum, double s2, double mu,
                              count_t w_all, count_t t_all) {
    ZetaPoint pt;
    pt.k = k;
    pt.r_k = static_cast<double>(w_sum) / static_cast<double>(t_sum);
    pt.s_k = std::sqrt(std::max(0.0, s2));
    const double kd = static_cast<double>(k);
    pt.S_k = std::sqrt((1.0 - kd / static_cast<double>(K)) * std::max(0.0, s2) / (kd * mu * mu));
    const double R = static_cast<double>(w_all) / static_cast<double>(t_all);
    if (pt.s_k == 0.0 || pt.S_k == 0.0) {
        pt.zero_variance = true;
        const int sign = compare_ratios(w_sum, t_sum, w_all, t_all);
        pt.zeta = sign == 0 ? 0.0 : sign * std::numeric_limits<double>::infinity();
    } else {
        pt.zeta = (pt.r_k - R) / pt.S_k;
    }
    pt.p_value = stats::two_sided_p(pt.zeta);
    return pt;
}

}  // namespace detail

/**
 * r_k, s_k, S_k and zeta_k for one k, computed directly from the members of M_k.
 *
 * s_k^2 = sum (W_i - r_k T_i)^2 / (k - 1), S_k^2 = (1 - k/K) s_k^2 / (k mu^2) with
 * mu the mean valid votes per station over M_k (sample-mean) or over all K stations
 * (population-mean). When s_k = 0 the point is flagged and zeta is 0 or +/-inf.
 */
inline ZetaPoint zeta_k(const ElectionDataset &ds, const ZScoreTable &table, std::size_t k,
                        Scaling scaling = Scaling::population_mean) {
    const std::size_t K = table.size();
    if (k < 2 || k >= K) {
        throw forensics_error(ErrorKind::k_out_of_range,
                              "zeta_k needs 2 <= k < K (k = " + std::to_string(k) + ", K = " + std::to_string(K) + ")");
    }
    const auto tallies = detail::aligned_tallies(ds, table);
    count_t w_all = 0;
    count_t t_all = 0;
    for (const auto &p : tallies) {
        w_all += p.favorable;
        t_all += p.valid;
    }
    if (t_all == 0) {
        throw forensics_error(ErrorKind::zero_valid_votes, "dataset '" + ds.election_id + "' has no valid votes");
    }
    const auto members = m_k(table, k);
    count_t w = 0;
    count_t t = 0;
    for (auto idx : members) {
        w += tallies[idx].favorable;
        t += tallies[idx].valid;
    }
    if (t == 0) {
        throw forensics_error(ErrorKind::zero_valid_votes, "M_k has no valid votes at k = " + std::to_string(k));
    }
    const double r = static_cast<double>(w) / static_cast<double>(t);
    double ss = 0.0;
    for (auto idx : members) {
        const double dev = static_cast<double>(tallies[idx].favorable) - r * static_cast<double>(tallies[idx].valid);
        ss += dev * dev;
    }
    const double mu = scaling == Scaling::population_mean ? static_cast<double>(t_all) / static_cast<double>(K)
                                                          : static_cast<double>(t) / static_cast<double>(k);
    return detail::finish_point(k, K, w, t, ss / static_cast<double>(k - 1), mu, w_all, t_all);
}

struct ZetaSeries {
    std::size_t k_min = default_k_min;
    std::size_t k_max = 0;  // exclusive bound, like k_min
    std::size_t K = 0;
    Scaling scaling = Scaling::population_mean;
    double R = 0.0;
    std::vector<ZetaPoint> points;
    double band_9999 = band_9999_half_width;
    double band_99 = band_99_half_width;
    std::size_t longest_excursion = 0;
    std::size_t longest_excursion_start = 0;  // k where the longest run begins (0 when none)
    double frac_outside_9999 = 0.0;
    double frac_inside_99 = 0.0;
    double min_p_value = 1.0;
    std::size_t min_p_k = 0;
    std::size_t zero_variance_points = 0;

    friend bool operator==(const ZetaSeries &, const ZetaSeries &) = default;
};

/// Recomputes run-length and band statistics from `series.points`.
inline void update_excursions(ZetaSeries &series) {
    series.longest_excursion = 0;
    series.longest_excursion_start = 0;
    series.min_p_value = 1.0;
    series.min_p_k = 0;
    series.zero_variance_points = 0;
    std::size_t outside = 0;
    std::size_t inside99 = 0;
    std::size_t run = 0;
    std::size_t run_start = 0;
    for (const auto &pt : series.points) {
        const double a = std::abs(pt.zeta);
        if (a > series.band_9999) {
            if (run == 0) {
                run_start = pt.k;
            }
            ++run;
            ++outside;
            if (run > series.longest_excursion) {
                series.longest_excursion = run;
                series.longest_excursion_start = run_start;
            }
        } else {
            run = 0;
        }
        if (a < series.band_99) {
            ++inside99;
        }
        if (pt.p_value < series.min_p_value || series.min_p_k == 0) {
            series.min_p_value = pt.p_value;
            series.min_p_k = pt.k;
        }
        if (pt.zero_variance) {
            ++series.zero_variance_points;
        }
    }
    const auto n = static_cast<double>(series.points.size());
    series.frac_outside_9999 = series.points.empty() ? 0.0 : static_cast<double>(outside) / n;
    series.frac_inside_99 = series.points.empty() ? 0.0 : static_cast<double>(inside99) / n;
}

/**
 * zeta_k for every integer k with k_min < k < k_max (k_max = 0 means floor(K/2)).
 *
 * Sums over M_k are accumulated as exact integer prefixes along the fixed extremeness
 * order, so each point is independent of how the k range is split across threads.
 */
inline ZetaSeries zeta_series(const ElectionDataset &ds, const ZScoreTable &table, std::size_t k_min = default_k_min,
                              std::size_t k_max = 0, Scaling scaling = Scaling::population_mean, unsigned threads = 1) {
    const std::size_t K = table.size();
    if (k_max == 0) {
        k_max = K / 2;
    }
    if (k_min < 2 || k_max > K - 1 || k_max < k_min + 2) {
        throw forensics_error(ErrorKind::k_out_of_range, "invalid k range (" + std::to_string(k_min) + ", " +
                                                             std::to_string(k_max) + ") for K = " + std::to_string(K));
    }
    const auto tallies = detail::aligned_tallies(ds, table);

    ZetaSeries series;
    series.k_min = k_min;
    series.k_max = k_max;
    series.K = K;
    series.scaling = scaling;

    count_t w_all = 0;
    count_t t_all = 0;
    for (const auto &p : tallies) {
        w_all += p.favorable;
        t_all += p.valid;
    }
    if (t_all == 0) {
        throw forensics_error(ErrorKind::zero_valid_votes, "dataset '" + ds.election_id + "' has no valid votes");
    }
    series.R = static_cast<double>(w_all) / static_cast<double>(t_all);
    const double mu_population = static_cast<double>(t_all) / static_cast<double>(K);

    // prefix[j] holds sums over the first j stations of the order.
    struct prefix_sums {
        count_t w = 0;
        count_t t = 0;
        __int128 ww = 0;
        __int128 wt = 0;
        __int128 tt = 0;
    };
    std::vector<prefix_sums> prefix(k_max + 1);
    for (std::size_t j = 0; j < k_max; ++j) {
        const auto &p = tallies[table.extreme_order[j]];
        auto next = prefix[j];
        next.w += p.favorable;
        next.t += p.valid;
        next.ww += static_cast<__int128>(p.favorable) * p.favorable;
        next.wt += static_cast<__int128>(p.favorable) * p.valid;
        next.tt += static_cast<__int128>(p.valid) * p.valid;
        prefix[j + 1] = next;
    }

    const std::size_t first_k = k_min + 1;
    const std::size_t n_points = k_max - first_k;
    series.points.resize(n_points);
    detail::parallel_chunks(n_points, threads, [&](std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i) {
            const std::size_t k = first_k + i;
            const auto &ps = prefix[k];
            if (ps.t == 0) {
                throw forensics_error(ErrorKind::zero_valid_votes, "M_k has no valid votes at k = " + std::to_string(k));
            }
            // sum (W - r T)^2 with r = w/t, scaled by t^2 to stay in integers.
            const __int128 a = ps.w;
            const __int128 b = ps.t;
            const __int128 scaled = b * b * ps.ww - 2 * a * b * ps.wt + a * a * ps.tt;
            const double tt = static_cast<double>(ps.t);
            const double ss = static_cast<double>(scaled) / (tt * tt);
            const double mu = scaling == Scaling::population_mean ? mu_population : tt / static_cast<double>(k);
            series.points[i] =
                detail::finish_point(k, K, ps.w, ps.t, ss / static_cast<double>(k - 1), mu, w_all, t_all);
        }
    });
    update_excursions(series);
    return series;
}

/// Copy of `series` restricted to k_min < k < k_max with excursion statistics recomputed.
inline ZetaSeries restrict_series(const ZetaSeries &series, std::size_t k_min, std::size_t k_max) {
    if (k_max < k_min + 2) {
        throw forensics_error(ErrorKind::incompatible_range, "empty k range (" + std::to_string(k_min) + ", " +
                                                                 std::to_string(k_max) + ")");
    }
    if (k_min < series.k_min || k_max > series.k_max) {
        throw forensics_error(ErrorKind::incompatible_range,
                              "series covers (" + std::to_string(series.k_min) + ", " + std::to_string(series.k_max) +
                                  "), requested (" + std::to_string(k_min) + ", " + std::to_string(k_max) + ")");
    }
    ZetaSeries out = series;
    out.k_min = k_min;
    out.k_max = k_max;
    out.points.clear();
    for (const auto &pt : series.points) {
        if (pt.k > k_min && pt.k < k_max) {
            out.points.push_back(pt);
        }
    }
    update_excursions(out);
    return out;
}

enum class VerdictGroup { biased_count, no_evidence };

constexpr std::string_view to_string(VerdictGroup g) noexcept {
    return g == VerdictGroup::biased_count ? "biased-count" : "no-evidence";
}

inline VerdictGroup parse_verdict_group(std::string_view text) {
    if (text == "biased-count") {
        return VerdictGroup::biased_count;
    }
    if (text == "no-evidence") {
        return VerdictGroup::no_evidence;
    }
    throw forensics_error(ErrorKind::config_invalid, "unknown verdict group '" + std::string(text) + "'");
}

struct Verdict {
    bool h1_rejected = false;
    VerdictGroup group = VerdictGroup::no_evidence;
    std::size_t run_threshold = default_run_threshold;
    std::string rationale;

    friend bool operator==(const Verdict &, const Verdict &) = default;
};

/// H1 (extremes are innocent and unbiased) is rejected iff some run of |zeta_k| > 3.9 reaches `run_threshold`.
inline Verdict verdict(const ZetaSeries &series, std::size_t run_threshold = default_run_threshold) {
    if (series.points.empty()) {
        throw forensics_error(ErrorKind::k_out_of_range, "empty zeta series");
    }
    Verdict v;
    v.run_threshold = run_threshold;
    v.h1_rejected = series.longest_excursion >= run_threshold;
    v.group = v.h1_rejected ? VerdictGroup::biased_count : VerdictGroup::no_evidence;
    std::string text = "longest run outside (-3.9, 3.9): " + std::to_string(series.longest_excursion) + " consecutive k";
    if (series.longest_excursion > 0) {
        text += " starting at k = " + std::to_string(series.longest_excursion_start);
    }
    text += " (threshold " + std::to_string(run_threshold) + ") over " + std::to_string(series.points.size()) +
            " points; min p-value at k = " + std::to_string(series.min_p_k);
    text += v.h1_rejected ? "; H1 rejected: outlier stations carry a biased count"
                          : "; no evidence against H1";
    v.rationale = std::move(text);
    return v;
}

}  // namespace eforensics
