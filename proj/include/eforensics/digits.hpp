#pragma once

// Second-significant-digit Benford test over per-station O = registered - valid.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <optional>

#include "eforensics/error.hpp"
#include "eforensics/model.hpp"
#include "eforensics/stats.hpp"

namespace eforensics {

using digit_array = std::array<double, 10>;

/// P(second digit = d) = sum_{j=1..9} log10(1 + 1/(10j + d)).
inline digit_array benford2_law() {
    digit_array p{};
    for (int d = 0; d < 10; ++d) {
        double sum = 0.0;
        for (int j = 1; j <= 9; ++j) {
            sum += std::log10(1.0 + 1.0 / (10.0 * j + d));
        }
        p[static_cast<std::size_t>(d)] = sum;
    }
    return p;
}

inline int second_digit(count_t x) {
    if (x < 10) {
        throw forensics_error(ErrorKind::no_second_digit, std::to_string(x) + " has fewer than two digits");
    }
    while (x >= 100) {
        x /= 10;
    }
    return static_cast<int>(x % 10);
}

inline constexpr std::size_t benford_min_sample = 50;

struct DigitTestReport {
    std::array<count_t, 10> counts{};
    digit_array expected{};
    count_t n_used = 0;
    count_t n_skipped = 0;
    double chi2 = 0.0;
    std::optional<double> p_value;  // empty when n_used < benford_min_sample
    bool insufficient_data = false;

    friend bool operator==(const DigitTestReport &, const DigitTestReport &) = default;
};

/// Pearson chi-square (df = 9) of observed second-digit counts against the Benford law.
inline DigitTestReport benford_test_counts(const std::array<count_t, 10> &counts, count_t n_skipped = 0) {
    DigitTestReport rep;
    rep.counts = counts;
    rep.expected = benford2_law();
    rep.n_skipped = n_skipped;
    for (auto c : counts) {
        rep.n_used += c;
    }
    if (rep.n_used > 0) {
        const auto n = static_cast<double>(rep.n_used);
        for (std::size_t d = 0; d < 10; ++d) {
            const double e = n * rep.expected[d];
            const double diff = static_cast<double>(counts[d]) - e;
            rep.chi2 += diff * diff / e;
        }
    }
    if (static_cast<std::size_t>(rep.n_used) < benford_min_sample) {
        rep.insufficient_data = true;
        return rep;
    }
    double p = stats::chi_square_sf(rep.chi2, 9.0);
    if (p < 1e-300) {
        p = 0.0;
    }
    rep.p_value = std::clamp(p, 0.0, 1.0);
    return rep;
}

inline DigitTestReport benford_test(const ElectionDataset &ds) {
    std::array<count_t, 10> counts{};
    count_t skipped = 0;
    for (const auto &c : ds.centers) {
        for (const auto &s : c.stations) {
            const count_t o = derived_O(s);
            if (o < 10) {
                ++skipped;
                continue;
            }
            ++counts[static_cast<std::size_t>(second_digit(o))];
        }
    }
    return benford_test_counts(counts, skipped);
}

}  // namespace eforensics
