#pragma once

// Tally-file parsing, serialization, and the center-level cleaning sequence.

#include <algorithm>
#include <array>
#include <charconv>
#include <fstream>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "eforensics/error.hpp"
#include "eforensics/model.hpp"

namespace eforensics {

inline constexpr std::array<std::string_view, 7> required_columns{
    "election_id", "center_id", "station_id", "registered", "valid", "favorable", "null_votes"};
inline constexpr std::string_view manual_column = "manual";

/// Maps canonical column names onto the header names used by a particular file.
class ColumnSchema {
public:
    ColumnSchema() = default;

    /// Parses "canonical=header,canonical=header". Unknown canonical names are rejected.
    static ColumnSchema parse(std::string_view spec) {
        ColumnSchema schema;
        std::size_t pos = 0;
        while (pos <= spec.size()) {
            const auto next = spec.find(',', pos);
            const auto item = spec.substr(pos, next == std::string_view::npos ? spec.size() - pos : next - pos);
            if (!item.empty()) {
                const auto eq = item.find('=');
                if (eq == std::string_view::npos || eq == 0 || eq + 1 == item.size()) {
                    throw forensics_error(ErrorKind::config_invalid, "bad schema entry '" + std::string(item) + "'");
                }
                schema.set(std::string(item.substr(0, eq)), std::string(item.substr(eq + 1)));
            }
            if (next == std::string_view::npos) {
                break;
            }
            pos = next + 1;
        }
        return schema;
    }

    void set(const std::string &canonical, const std::string &header) {
        const bool known = canonical == manual_column ||
                           std::find(required_columns.begin(), required_columns.end(), canonical) != required_columns.end();
        if (!known) {
            throw forensics_error(ErrorKind::config_invalid, "unknown column '" + canonical + "' in schema");
        }
        mapping_[canonical] = header;
    }

    [[nodiscard]] std::string header_for(std::string_view canonical) const {
        const auto it = mapping_.find(std::string(canonical));
        return it == mapping_.end() ? std::string(canonical) : it->second;
    }

    [[nodiscard]] const std::map<std::string, std::string> &mapping() const noexcept { return mapping_; }

private:
    std::map<std::string, std::string> mapping_;
};

struct ParseOptions {
    char delimiter = '\0';  // '\0' sniffs from the header line
    ColumnSchema schema;
};

struct ParsedTallies {
    std::string election_id;
    std::vector<StationRecord> records;
    std::vector<std::string> warnings;
};

namespace detail {

inline char sniff_delimiter(std::string_view header) {
    constexpr std::array<char, 4> candidates{',', ';', '\t', '|'};
    char best = ',';
    std::ptrdiff_t best_count = 0;
    for (char c : candidates) {
        const auto n = std::count(header.begin(), header.end(), c);
        if (n > best_count) {
            best = c;
            best_count = n;
        }
    }
    return best;
}

inline std::vector<std::string> split_fields(std::string_view line, char delim, std::size_t line_no) {
    std::vector<std::string> fields;
    std::string cur;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char ch = line[i];
        if (quoted) {
            if (ch == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    cur.push_back('"');
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                cur.push_back(ch);
            }
        } else if (ch == '"' && cur.empty()) {
            quoted = true;
        } else if (ch == delim) {
            fields.push_back(std::move(cur));
            cur.clear();
        } else {
            cur.push_back(ch);
        }
    }
    if (quoted) {
        throw malformed_row_error(line_no, "unterminated quoted field");
    }
    fields.push_back(std::move(cur));
    return fields;
}

inline std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) {
        s.remove_prefix(1);
    }
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
        s.remove_suffix(1);
    }
    return s;
}

inline count_t parse_count(std::string_view text, std::string_view column, std::size_t line_no) {
    text = trim(text);
    count_t value = 0;
    const auto *end = text.data() + text.size();
    const auto [ptr, ec] = std::from_chars(text.data(), end, value);
    if (text.empty() || ec != std::errc{} || ptr != end) {
        throw malformed_row_error(line_no, "column '" + std::string(column) + "' is not an integer: '" +
                                               std::string(text) + "'");
    }
    if (value < 0) {
        throw malformed_row_error(line_no, "column '" + std::string(column) + "' is negative");
    }
    return value;
}

inline std::string quote_if_needed(const std::string &field, char delim) {
    if (field.find(delim) == std::string::npos && field.find('"') == std::string::npos &&
        field.find('\n') == std::string::npos) {
        return field;
    }
    std::string out = "\"";
    for (char c : field) {
        if (c == '"') {
            out += "\"\"";
        } else {
            out.push_back(c);
        }
    }
    out.push_back('"');
    return out;
}

}  // namespace detail

/**
 * Parses delimited tally text with a header row.
 *
 * Throws malformed_row_error for rows that break type or record invariants,
 * MissingColumn when a required header is absent, and DuplicateStation on a
 * repeated station_id. A missing `manual` column defaults every station to
 * automated and adds a warning.
 */
inline ParsedTallies parse_tallies(std::istream &in, const ParseOptions &opts = {}) {
    ParsedTallies out;
    std::string line;
    std::size_t line_no = 0;

    if (!std::getline(in, line)) {
        throw forensics_error(ErrorKind::missing_column, "input is empty; expected a header row");
    }
    ++line_no;
    if (line.size() >= 3 && static_cast<unsigned char>(line[0]) == 0xEF &&
        static_cast<unsigned char>(line[1]) == 0xBB && static_cast<unsigned char>(line[2]) == 0xBF) {
        line.erase(0, 3);
    }
    const char delim = opts.delimiter != '\0' ? opts.delimiter : detail::sniff_delimiter(line);
    const auto header = detail::split_fields(line, delim, line_no);

    std::unordered_map<std::string, std::size_t> index_of;
    for (std::size_t i = 0; i < header.size(); ++i) {
        index_of.emplace(std::string(detail::trim(header[i])), i);
    }
    auto column_index = [&](std::string_view canonical) -> std::optional<std::size_t> {
        const auto it = index_of.find(opts.schema.header_for(canonical));
        if (it == index_of.end()) {
            return std::nullopt;
        }
        return it->second;
    };

    std::array<std::size_t, required_columns.size()> idx{};
    for (std::size_t c = 0; c < required_columns.size(); ++c) {
        const auto found = column_index(required_columns[c]);
        if (!found) {
            throw forensics_error(ErrorKind::missing_column, opts.schema.header_for(required_columns[c]));
        }
        idx[c] = *found;
    }
    const auto manual_idx = column_index(manual_column);
    if (!manual_idx) {
        out.warnings.emplace_back("column 'manual' absent; every station treated as automated");
    }

    std::unordered_set<std::string> seen;
    bool first = true;
    while (std::getline(in, line)) {
        ++line_no;
        if (detail::trim(line).empty()) {
            continue;
        }
        const auto fields = detail::split_fields(line, delim, line_no);
        if (fields.size() != header.size()) {
            throw malformed_row_error(line_no, "expected " + std::to_string(header.size()) + " fields, found " +
                                                   std::to_string(fields.size()));
        }
        const std::string election(detail::trim(fields[idx[0]]));
        if (first) {
            out.election_id = election;
            first = false;
        } else if (election != out.election_id) {
            throw malformed_row_error(line_no, "election_id '" + election + "' differs from '" + out.election_id + "'");
        }

        StationRecord rec;
        rec.center_id = std::string(detail::trim(fields[idx[1]]));
        rec.station_id = std::string(detail::trim(fields[idx[2]]));
        if (rec.center_id.empty() || rec.station_id.empty()) {
            throw malformed_row_error(line_no, "empty center_id or station_id");
        }
        rec.registered = detail::parse_count(fields[idx[3]], required_columns[3], line_no);
        rec.valid = detail::parse_count(fields[idx[4]], required_columns[4], line_no);
        rec.favorable = detail::parse_count(fields[idx[5]], required_columns[5], line_no);
        rec.null_votes = detail::parse_count(fields[idx[6]], required_columns[6], line_no);
        if (manual_idx) {
            const auto flag = detail::trim(fields[*manual_idx]);
            if (flag == "1") {
                rec.manual = true;
            } else if (flag == "0" || flag.empty()) {
                rec.manual = false;
            } else {
                throw malformed_row_error(line_no, "column 'manual' must be 0 or 1");
            }
        }
        if (const auto why = station_invariant_violation(rec)) {
            throw malformed_row_error(line_no, *why);
        }
        if (!seen.insert(rec.station_id).second) {
            throw forensics_error(ErrorKind::duplicate_station, rec.station_id);
        }
        out.records.push_back(std::move(rec));
    }
    return out;
}

inline ParsedTallies parse_tallies_file(const std::string &path, const ParseOptions &opts = {}) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw forensics_error(ErrorKind::io_error, "cannot open '" + path + "'");
    }
    return parse_tallies(in, opts);
}

/// Writes records in the canonical column order, including `manual`.
inline void write_tallies(std::ostream &out, const std::string &election_id, std::span<const StationRecord> records,
                          char delim = ',') {
    for (std::size_t c = 0; c < required_columns.size(); ++c) {
        out << required_columns[c] << delim;
    }
    out << manual_column << '\n';
    const auto eid = detail::quote_if_needed(election_id, delim);
    for (const auto &r : records) {
        out << eid << delim << detail::quote_if_needed(r.center_id, delim) << delim
            << detail::quote_if_needed(r.station_id, delim) << delim << r.registered << delim << r.valid << delim
            << r.favorable << delim << r.null_votes << delim << (r.manual ? 1 : 0) << '\n';
    }
}

struct CleaningOptions {
    bool exclude_manual = true;

    /// Manual-ballot exclusion applies from 2004 onward.
    static CleaningOptions for_year(int year) { return CleaningOptions{year >= 2004}; }
};

/**
 * Groups records by center (first-appearance order) and drops, in order:
 *  1. centers with any station where valid + null_votes == 0,
 *  2. centers with any manual station (when enabled),
 *  3. centers with fewer than two stations.
 * A center is recorded only under the first rule it matches.
 */
inline ElectionDataset clean(const std::string &election_id, std::span<const StationRecord> records,
                             const CleaningOptions &opts = {}) {
    std::vector<Center> grouped;
    std::unordered_map<std::string, std::size_t> center_pos;
    for (const auto &r : records) {
        auto [it, inserted] = center_pos.try_emplace(r.center_id, grouped.size());
        if (inserted) {
            grouped.push_back(Center{r.center_id, {}});
        }
        grouped[it->second].stations.push_back(r);
    }

    ElectionDataset ds;
    ds.election_id = election_id;
    auto &rep = ds.cleaning;
    rep.input_station_count = static_cast<count_t>(records.size());
    rep.manual_rule_applied = opts.exclude_manual;

    for (auto &center : grouped) {
        const auto n = static_cast<count_t>(center.stations.size());
        const bool zero_vote = std::any_of(center.stations.begin(), center.stations.end(),
                                           [](const StationRecord &s) { return s.valid + s.null_votes == 0; });
        if (zero_vote) {
            rep.excluded_zero_vote_centers.push_back(center.center_id);
            rep.excluded_station_count += n;
            continue;
        }
        if (opts.exclude_manual &&
            std::any_of(center.stations.begin(), center.stations.end(), [](const StationRecord &s) { return s.manual; })) {
            rep.excluded_manual_centers.push_back(center.center_id);
            rep.excluded_station_count += n;
            continue;
        }
        if (n < 2) {
            rep.excluded_single_station_centers.push_back(center.center_id);
            rep.excluded_station_count += n;
            continue;
        }
        rep.retained_station_count += n;
        ds.centers.push_back(std::move(center));
    }
    rep.retained_center_count = static_cast<count_t>(ds.centers.size());
    if (ds.centers.empty()) {
        throw forensics_error(ErrorKind::empty_after_cleaning, "no center of '" + election_id + "' survived cleaning");
    }
    return ds;
}

inline ElectionDataset clean(const ParsedTallies &parsed, const CleaningOptions &opts = {}) {
    auto ds = clean(parsed.election_id, parsed.records, opts);
    ds.cleaning.warnings.insert(ds.cleaning.warnings.begin(), parsed.warnings.begin(), parsed.warnings.end());
    return ds;
}

}  // namespace eforensics
