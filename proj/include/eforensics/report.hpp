#pragma once

// End-to-end pipeline, the consolidated dossier and multi-election comparison.

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <cstdio>
#include <optional>
#include <string>
#include <vector>

#include "eforensics/digits.hpp"
#include "eforensics/error.hpp"
#include "eforensics/estimate.hpp"
#include "eforensics/ingest.hpp"
#include "eforensics/json_io.hpp"
#include "eforensics/model.hpp"
#include "eforensics/zeta.hpp"
#include "eforensics/zscore.hpp"

namespace eforensics {

inline constexpr int dossier_schema_version = 1;

struct PipelineOptions {
    double kappa_threshold = default_kappa_threshold;
    std::size_t k_min = default_k_min;
    std::size_t k_max = 0;  // 0: floor(K/2)
    Scaling scaling = Scaling::population_mean;
    std::size_t run_threshold = default_run_threshold;
    DeadHeatBand dead_heat;
    bool exclude_manual = true;
    bool force_estimate = false;
    std::vector<double> beta_grid = default_beta_grid();
    std::vector<Scenario> scenarios = default_scenarios();
    std::size_t resample_replicates = 0;  // 0 disables the epsilon bootstrap
    std::uint64_t seed = 0;
    unsigned threads = 1;
    ColumnSchema schema;
    char delimiter = '\0';
};

/// Every threshold that shaped the report. Thread count is deliberately absent.
struct DossierHeader {
    int schema_version = dossier_schema_version;
    std::string election_id;
    std::string input;
    double kappa_threshold = default_kappa_threshold;
    double band_9999 = band_9999_half_width;
    double band_99 = band_99_half_width;
    std::size_t run_threshold = default_run_threshold;
    DeadHeatBand dead_heat;
    std::size_t k_min = default_k_min;
    std::size_t k_max_requested = 0;
    std::string scaling = std::string(to_string(Scaling::population_mean));
    bool exclude_manual = true;
    bool force_estimate = false;
    std::size_t resample_replicates = 0;
    std::uint64_t seed = 0;

    friend bool operator==(const DossierHeader &, const DossierHeader &) = default;
};

struct ZScoreSection {
    ZSummary summary;
    std::size_t kappa = 0;
    double qq_slope = 0.0;
    std::vector<ZScoreEntry> outliers;  // |Z| > threshold, most extreme first

    friend bool operator==(const ZScoreSection &, const ZScoreSection &) = default;
};

struct StageError {
    std::string stage;
    std::string kind;
    std::string message;

    friend bool operator==(const StageError &, const StageError &) = default;
};

struct DossierSummary {
    std::string group = "incomplete";  // biased-count, no-evidence or incomplete
    std::size_t K = 0;
    std::optional<double> R;
    std::vector<std::string> lines;

    friend bool operator==(const DossierSummary &, const DossierSummary &) = default;
};

struct Dossier {
    DossierHeader header;
    std::optional<CleaningReport> cleaning;
    std::optional<DigitTestReport> benford;
    std::optional<ZScoreSection> zscore;
    std::optional<ZetaSeries> zeta;
    std::optional<Verdict> verdict;
    std::optional<FraudEstimate> estimate;
    std::vector<ScenarioRow> scenarios;
    DossierSummary summary;
    std::vector<StageError> errors;

    friend bool operator==(const Dossier &, const Dossier &) = default;
};

// JSON

inline void to_json(json &j, const DossierHeader &h) {
    j = json{{"schema_version", h.schema_version},
             {"election_id", h.election_id},
             {"input", h.input},
             {"kappa_threshold", h.kappa_threshold},
             {"band_9999", h.band_9999},
             {"band_99", h.band_99},
             {"run_threshold", h.run_threshold},
             {"dead_heat_band", h.dead_heat},
             {"k_min", h.k_min},
             {"k_max_requested", h.k_max_requested},
             {"scaling", h.scaling},
             {"exclude_manual", h.exclude_manual},
             {"force_estimate", h.force_estimate},
             {"resample_replicates", h.resample_replicates},
             {"seed", h.seed}};
}
inline void from_json(const json &j, DossierHeader &h) {
    j.at("schema_version").get_to(h.schema_version);
    if (h.schema_version != dossier_schema_version) {
        throw forensics_error(ErrorKind::config_invalid, "unsupported dossier schema_version");
    }
    j.at("election_id").get_to(h.election_id);
    j.at("input").get_to(h.input);
    j.at("kappa_threshold").get_to(h.kappa_threshold);
    j.at("band_9999").get_to(h.band_9999);
    j.at("band_99").get_to(h.band_99);
    j.at("run_threshold").get_to(h.run_threshold);
    j.at("dead_heat_band").get_to(h.dead_heat);
    j.at("k_min").get_to(h.k_min);
    j.at("k_max_requested").get_to(h.k_max_requested);
    j.at("scaling").get_to(h.scaling);
    j.at("exclude_manual").get_to(h.exclude_manual);
    j.at("force_estimate").get_to(h.force_estimate);
    j.at("resample_replicates").get_to(h.resample_replicates);
    j.at("seed").get_to(h.seed);
}

inline void to_json(json &j, const ZScoreSection &z) {
    j = json{{"summary", z.summary}, {"kappa", z.kappa}, {"qq_slope", z.qq_slope}, {"outliers", z.outliers}};
}
inline void from_json(const json &j, ZScoreSection &z) {
    j.at("summary").get_to(z.summary);
    j.at("kappa").get_to(z.kappa);
    j.at("qq_slope").get_to(z.qq_slope);
    j.at("outliers").get_to(z.outliers);
}

inline void to_json(json &j, const StageError &e) {
    j = json{{"stage", e.stage}, {"kind", e.kind}, {"message", e.message}};
}
inline void from_json(const json &j, StageError &e) {
    j.at("stage").get_to(e.stage);
    j.at("kind").get_to(e.kind);
    j.at("message").get_to(e.message);
}

inline void to_json(json &j, const DossierSummary &s) {
    j = json{{"group", s.group}, {"K", s.K}, {"lines", s.lines}};
    jsonio::put_optional(j, "R", s.R);
}
inline void from_json(const json &j, DossierSummary &s) {
    j.at("group").get_to(s.group);
    j.at("K").get_to(s.K);
    j.at("lines").get_to(s.lines);
    s.R = jsonio::get_optional<double>(j, "R");
}

inline void to_json(json &j, const Dossier &d) {
    j = json{{"header", d.header}, {"scenarios", d.scenarios}, {"summary", d.summary}, {"errors", d.errors}};
    jsonio::put_optional(j, "cleaning", d.cleaning);
    jsonio::put_optional(j, "benford", d.benford);
    jsonio::put_optional(j, "zscore", d.zscore);
    jsonio::put_optional(j, "zeta", d.zeta);
    jsonio::put_optional(j, "verdict", d.verdict);
    jsonio::put_optional(j, "estimate", d.estimate);
}
inline void from_json(const json &j, Dossier &d) {
    j.at("header").get_to(d.header);
    j.at("scenarios").get_to(d.scenarios);
    j.at("summary").get_to(d.summary);
    j.at("errors").get_to(d.errors);
    d.cleaning = jsonio::get_optional<CleaningReport>(j, "cleaning");
    d.benford = jsonio::get_optional<DigitTestReport>(j, "benford");
    d.zscore = jsonio::get_optional<ZScoreSection>(j, "zscore");
    d.zeta = jsonio::get_optional<ZetaSeries>(j, "zeta");
    d.verdict = jsonio::get_optional<Verdict>(j, "verdict");
    d.estimate = jsonio::get_optional<FraudEstimate>(j, "estimate");
}

/// Canonical text form: sorted keys, two-space indent, trailing newline.
inline std::string serialize(const Dossier &d) {
    return json(d).dump(2) + "\n";
}

inline Dossier parse_dossier(const std::string &text) {
    try {
        return json::parse(text).get<Dossier>();
    } catch (const json::exception &e) {
        throw forensics_error(ErrorKind::config_invalid, std::string("malformed dossier: ") + e.what());
    }
}

inline Dossier load_dossier(const std::string &path) {
    try {
        return jsonio::read_file(path).get<Dossier>();
    } catch (const json::exception &e) {
        throw forensics_error(ErrorKind::config_invalid, "malformed dossier '" + path + "': " + e.what());
    }
}

/// Pipeline settings file: {"schema_version": 1, ...}; absent keys keep their defaults.
inline PipelineOptions load_pipeline_options(const std::string &path, PipelineOptions opts = {}) {
    const auto j = jsonio::read_file(path);
    try {
        if (j.value("schema_version", 0) != 1) {
            throw forensics_error(ErrorKind::config_invalid, "pipeline config needs schema_version 1");
        }
        jsonio::read_if(j, "kappa_threshold", opts.kappa_threshold);
        jsonio::read_if(j, "k_min", opts.k_min);
        jsonio::read_if(j, "k_max", opts.k_max);
        if (j.contains("scaling")) {
            opts.scaling = parse_scaling(j.at("scaling").get<std::string>());
        }
        jsonio::read_if(j, "run_threshold", opts.run_threshold);
        jsonio::read_if(j, "dead_heat_band", opts.dead_heat);
        jsonio::read_if(j, "exclude_manual", opts.exclude_manual);
        jsonio::read_if(j, "force_estimate", opts.force_estimate);
        jsonio::read_if(j, "beta_grid", opts.beta_grid);
        jsonio::read_if(j, "scenarios", opts.scenarios);
        jsonio::read_if(j, "resample_replicates", opts.resample_replicates);
        jsonio::read_if(j, "seed", opts.seed);
    } catch (const json::exception &e) {
        throw forensics_error(ErrorKind::config_invalid, "bad pipeline config '" + path + "': " + e.what());
    }
    return opts;
}

namespace detail {

inline std::string fixed(double v, int digits = 4) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", digits, v);
    return buf;
}

inline std::string sci(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.3g", v);
    return buf;
}

inline void summarize(Dossier &d) {
    auto &s = d.summary;
    s.lines.clear();
    s.group = d.verdict ? std::string(to_string(d.verdict->group)) : "incomplete";
    s.K = d.cleaning ? static_cast<std::size_t>(d.cleaning->retained_station_count) : 0;
    s.R = d.zeta ? std::optional<double>(d.zeta->R) : std::nullopt;
    s.lines.push_back("election " + d.header.election_id + ": " + s.group);
    if (d.cleaning) {
        s.lines.push_back("stations retained K = " + std::to_string(d.cleaning->retained_station_count) + " of " +
                          std::to_string(d.cleaning->input_station_count) + " in " +
                          std::to_string(d.cleaning->retained_center_count) + " centers");
    }
    if (d.benford) {
        s.lines.push_back("second-digit test on O: chi2 = " + fixed(d.benford->chi2, 3) +
                          (d.benford->p_value ? ", p = " + sci(*d.benford->p_value) : ", insufficient data"));
    }
    if (d.zscore) {
        s.lines.push_back("stations with |Z| > " + fixed(d.header.kappa_threshold, 2) + ": " +
                          std::to_string(d.zscore->kappa) + " (expected " + fixed(d.zscore->summary.expected_kappa, 2) +
                          ")");
    }
    if (d.zeta) {
        s.lines.push_back("longest run of |zeta_k| > " + fixed(d.header.band_9999, 2) + ": " +
                          std::to_string(d.zeta->longest_excursion) + " over " + std::to_string(d.zeta->k_min) +
                          " < k < " + std::to_string(d.zeta->k_max) + "; min p = " + sci(d.zeta->min_p_value));
    }
    if (d.estimate) {
        const auto &e = *d.estimate;
        s.lines.push_back("R = " + fixed(e.R) + ", r_kappa = " + fixed(e.r_kappa) + ", rho_1 = " + fixed(e.rho(1.0)) +
                          ", excess factor " + fixed(e.excess_factor, 1));
        s.lines.push_back(e.crossover_beta ? "rho_beta crosses 0.5 at beta = " + fixed(*e.crossover_beta)
                                           : "rho_beta stays on the reported side of 0.5 for all beta in [0, 1]");
        for (const auto &row : d.scenarios) {
            s.lines.push_back("scenario " + row.label + " [" + fixed(row.beta_low, 2) + ", " + fixed(row.beta_high, 2) +
                              "]: " + std::string(to_string(row.outcome)));
        }
    }
    for (const auto &err : d.errors) {
        s.lines.push_back(err.stage + " failed: " + err.kind + ": " + err.message);
    }
}

template <typename Fn>
bool run_stage(Dossier &d, const char *stage, Fn &&fn) {
    try {
        fn();
        return true;
    } catch (const forensics_error &e) {
        d.errors.push_back({stage, std::string(to_string(e.kind())), e.what()});
        return false;
    }
}

}  // namespace detail

inline DossierHeader make_header(const PipelineOptions &opts, const std::string &input) {
    DossierHeader h;
    h.input = input;
    h.kappa_threshold = opts.kappa_threshold;
    h.run_threshold = opts.run_threshold;
    h.dead_heat = opts.dead_heat;
    h.k_min = opts.k_min;
    h.k_max_requested = opts.k_max;
    h.scaling = std::string(to_string(opts.scaling));
    h.exclude_manual = opts.exclude_manual;
    h.force_estimate = opts.force_estimate;
    h.resample_replicates = opts.resample_replicates;
    h.seed = opts.seed;
    return h;
}

/**
 * benford -> zscore -> zeta -> verdict -> estimate on an already-cleaned dataset.
 *
 * The estimate runs when H1 is rejected or when forced. Each stage failure is
 * recorded with its stage label and skips only the stages that depend on it.
 */
inline Dossier analyze(const ElectionDataset &ds, const PipelineOptions &opts, const std::string &input = {}) {
    Dossier d;
    d.header = make_header(opts, input);
    d.header.election_id = ds.election_id;
    d.cleaning = ds.cleaning;

    detail::run_stage(d, "benford", [&] { d.benford = benford_test(ds); });

    ZScoreTable table;
    const bool have_z = detail::run_stage(d, "zscore", [&] {
        table = z_table(ds, opts.kappa_threshold, opts.threads);
        ZScoreSection sec;
        sec.summary = summarize(table);
        sec.kappa = table.kappa;
        sec.qq_slope = qq_slope(normal_plot_data(table));
        for (auto idx : outlier_indices(table)) {
            sec.outliers.push_back(table.entries[idx]);
        }
        d.zscore = std::move(sec);
    });

    if (have_z) {
        const bool have_zeta = detail::run_stage(d, "zeta", [&] {
            d.zeta = zeta_series(ds, table, opts.k_min, opts.k_max, opts.scaling, opts.threads);
        });
        if (have_zeta) {
            detail::run_stage(d, "verdict", [&] { d.verdict = verdict(*d.zeta, opts.run_threshold); });
        }
        if (opts.force_estimate || (d.verdict && d.verdict->h1_rejected)) {
            detail::run_stage(d, "estimate", [&] {
                auto est = fraud_estimate(ds, table, opts.beta_grid, d.verdict);
                if (opts.resample_replicates > 0) {
                    attach_resample(est, ds, table, opts.resample_replicates, opts.seed);
                }
                d.scenarios = scenario_table(est, opts.scenarios, opts.dead_heat);
                d.estimate = std::move(est);
            });
        }
    }
    detail::summarize(d);
    return d;
}

/// Full pipeline from a tallies file. Ingest failures yield a dossier with only the header and an ingest error.
inline Dossier pipeline(const std::string &tallies_path, const PipelineOptions &opts) {
    ElectionDataset ds;
    Dossier failed;
    failed.header = make_header(opts, tallies_path);
    const bool ok = detail::run_stage(failed, "ingest", [&] {
        ParseOptions po;
        po.delimiter = opts.delimiter;
        po.schema = opts.schema;
        ds = clean(parse_tallies_file(tallies_path, po), CleaningOptions{opts.exclude_manual});
    });
    if (!ok) {
        detail::summarize(failed);
        return failed;
    }
    return analyze(ds, opts, tallies_path);
}

// comparison

struct ComparisonRow {
    std::string election_id;
    std::size_t K = 0;
    std::size_t longest_excursion = 0;
    double frac_outside_9999 = 0.0;
    double frac_inside_99 = 0.0;
    double min_p_value = 1.0;
    std::size_t min_p_k = 0;
    std::string group;
};

struct ComparisonGroup {
    std::string group;
    std::vector<std::string> members;
};

struct Comparison {
    std::size_t k_min = default_k_min;
    std::size_t k_max = 0;
    std::vector<ComparisonRow> rows;
    std::vector<ZetaSeries> series;  // restricted to the common range, same order as rows
    std::vector<ComparisonGroup> groups;
};

/**
 * Restricts every election's zeta series to the common range
 * (max k_min, min floor(K/2)) and regroups by run length on that range.
 */
inline Comparison compare(const std::vector<Dossier> &dossiers) {
    if (dossiers.size() < 2) {
        throw forensics_error(ErrorKind::incompatible_range, "comparison needs at least two dossiers");
    }
    Comparison cmp;
    cmp.k_max = static_cast<std::size_t>(-1);
    for (const auto &d : dossiers) {
        if (!d.zeta) {
            throw forensics_error(ErrorKind::incompatible_range,
                                  "dossier '" + d.header.election_id + "' has no zeta series");
        }
        cmp.k_min = std::max(cmp.k_min, d.zeta->k_min);
        cmp.k_max = std::min(cmp.k_max, d.zeta->K / 2);
    }
    if (cmp.k_max < cmp.k_min + 2) {
        throw forensics_error(ErrorKind::incompatible_range, "common k range (" + std::to_string(cmp.k_min) + ", " +
                                                                 std::to_string(cmp.k_max) + ") is empty");
    }
    std::vector<std::string> biased;
    std::vector<std::string> clean_group;
    for (const auto &d : dossiers) {
        auto s = restrict_series(*d.zeta, cmp.k_min, cmp.k_max);
        const std::size_t run = d.verdict ? d.verdict->run_threshold : d.header.run_threshold;
        const auto v = verdict(s, run);
        ComparisonRow row;
        row.election_id = d.header.election_id;
        row.K = d.zeta->K;
        row.longest_excursion = s.longest_excursion;
        row.frac_outside_9999 = s.frac_outside_9999;
        row.frac_inside_99 = s.frac_inside_99;
        row.min_p_value = s.min_p_value;
        row.min_p_k = s.min_p_k;
        row.group = std::string(to_string(v.group));
        auto &bucket = v.h1_rejected ? biased : clean_group;
        if (std::find(bucket.begin(), bucket.end(), row.election_id) == bucket.end()) {
            bucket.push_back(row.election_id);
        }
        cmp.rows.push_back(std::move(row));
        cmp.series.push_back(std::move(s));
    }
    if (!biased.empty()) {
        cmp.groups.push_back({std::string(to_string(VerdictGroup::biased_count)), std::move(biased)});
    }
    if (!clean_group.empty()) {
        cmp.groups.push_back({std::string(to_string(VerdictGroup::no_evidence)), std::move(clean_group)});
    }
    return cmp;
}

inline void to_json(json &j, const ComparisonRow &r) {
    j = json{{"election_id", r.election_id},
             {"K", r.K},
             {"longest_excursion", r.longest_excursion},
             {"frac_outside_9999", r.frac_outside_9999},
             {"frac_inside_99", r.frac_inside_99},
             {"min_p_value", r.min_p_value},
             {"min_p_k", r.min_p_k},
             {"group", r.group}};
}

inline void to_json(json &j, const Comparison &c) {
    json groups = json::array();
    for (const auto &g : c.groups) {
        groups.push_back(json{{"group", g.group}, {"members", g.members}});
    }
    j = json{{"k_min", c.k_min}, {"k_max", c.k_max}, {"rows", c.rows}, {"groups", groups}};
}

}  // namespace eforensics
