#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "eforensics/error.hpp"

namespace eforensics {

using count_t = std::int64_t;

/// One polling station's tallies. `favorable` is the tracked option; everything else in `valid` is the rest.
struct StationRecord {
    std::string station_id;
    std::string center_id;
    count_t registered = 0;
    count_t valid = 0;
    count_t favorable = 0;
    count_t null_votes = 0;
    bool manual = false;

    friend bool operator==(const StationRecord &, const StationRecord &) = default;
};

/// Returns a description of the first violated record invariant, if any.
inline std::optional<std::string> station_invariant_violation(const StationRecord &s) {
    if (s.registered < 0 || s.valid < 0 || s.favorable < 0 || s.null_votes < 0) {
        return "negative count";
    }
    if (s.favorable > s.valid) {
        return "favorable exceeds valid";
    }
    if (s.valid + s.null_votes > s.registered) {
        return "valid + null_votes exceeds registered";
    }
    return std::nullopt;
}

/// Abstentions plus void ballots: registered - valid.
inline count_t derived_O(const StationRecord &s) noexcept {
    return s.registered - s.valid;
}

inline count_t abstentions(const StationRecord &s) noexcept {
    return s.registered - s.valid - s.null_votes;
}

struct Center {
    std::string center_id;
    std::vector<StationRecord> stations;

    [[nodiscard]] count_t registered_total() const noexcept {
        count_t v = 0;
        for (const auto &s : stations) {
            v += s.registered;
        }
        return v;
    }

    [[nodiscard]] count_t O_total() const noexcept {
        count_t o = 0;
        for (const auto &s : stations) {
            o += derived_O(s);
        }
        return o;
    }

    friend bool operator==(const Center &, const Center &) = default;
};

struct CleaningReport {
    std::vector<std::string> excluded_zero_vote_centers;
    std::vector<std::string> excluded_manual_centers;
    std::vector<std::string> excluded_single_station_centers;
    count_t input_station_count = 0;
    count_t excluded_station_count = 0;
    count_t retained_station_count = 0;  // K
    count_t retained_center_count = 0;
    bool manual_rule_applied = true;
    std::vector<std::string> warnings;

    friend bool operator==(const CleaningReport &, const CleaningReport &) = default;
};

struct ElectionDataset {
    std::string election_id;
    std::vector<Center> centers;
    CleaningReport cleaning;

    [[nodiscard]] std::size_t station_count() const noexcept {
        std::size_t k = 0;
        for (const auto &c : centers) {
            k += c.stations.size();
        }
        return k;
    }

    /// Stations flattened in center order.
    [[nodiscard]] std::vector<StationRecord> records() const {
        std::vector<StationRecord> out;
        out.reserve(station_count());
        for (const auto &c : centers) {
            out.insert(out.end(), c.stations.begin(), c.stations.end());
        }
        return out;
    }

    friend bool operator==(const ElectionDataset &, const ElectionDataset &) = default;
};

/// Vote-weighted favorable share sum(W) / sum(T) over a set of stations.
inline double favorable_ratio(std::span<const StationRecord> stations) {
    count_t w = 0;
    count_t t = 0;
    for (const auto &s : stations) {
        w += s.favorable;
        t += s.valid;
    }
    if (t == 0) {
        throw forensics_error(ErrorKind::zero_valid_votes, "no valid votes in the station set");
    }
    return static_cast<double>(w) / static_cast<double>(t);
}

/// R: favorable share of valid votes over every retained station.
inline double population_ratio(const ElectionDataset &ds) {
    count_t w = 0;
    count_t t = 0;
    for (const auto &c : ds.centers) {
        for (const auto &s : c.stations) {
            w += s.favorable;
            t += s.valid;
        }
    }
    if (t == 0) {
        throw forensics_error(ErrorKind::zero_valid_votes, "dataset '" + ds.election_id + "' has no valid votes");
    }
    return static_cast<double>(w) / static_cast<double>(t);
}

}  // namespace eforensics
