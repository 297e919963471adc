#pragma once

// JSON encodings for reports, generator configs and ground truth.
// Non-finite doubles (zeta at zero-variance points) travel as "inf", "-inf" or "nan".

#include <cmath>
#include <fstream>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "eforensics/digits.hpp"
#include "eforensics/error.hpp"
#include "eforensics/estimate.hpp"
#include "eforensics/model.hpp"
#include "eforensics/synth.hpp"
#include "eforensics/zeta.hpp"
#include "eforensics/zscore.hpp"

namespace eforensics {

using json = nlohmann::json;

namespace jsonio {

inline json encode_double(double v) {
    if (std::isnan(v)) {
        return "nan";
    }
    if (std::isinf(v)) {
        return v > 0 ? "inf" : "-inf";
    }
    return v;
}

inline double decode_double(const json &j) {
    if (j.is_number()) {
        return j.get<double>();
    }
    if (j.is_string()) {
        const auto s = j.get<std::string>();
        if (s == "inf") return std::numeric_limits<double>::infinity();
        if (s == "-inf") return -std::numeric_limits<double>::infinity();
        if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
    }
    throw forensics_error(ErrorKind::config_invalid, "expected a number, got " + j.dump());
}

template <typename T>
void put_optional(json &j, const char *key, const std::optional<T> &v) {
    j[key] = v ? json(*v) : json(nullptr);
}

template <typename T>
std::optional<T> get_optional(const json &j, const char *key) {
    if (!j.contains(key) || j.at(key).is_null()) {
        return std::nullopt;
    }
    return j.at(key).get<T>();
}

/// Reads `key` into `out` when present, leaving the default otherwise.
template <typename T>
void read_if(const json &j, const char *key, T &out) {
    if (j.contains(key)) {
        out = j.at(key).get<T>();
    }
}

inline json read_file(const std::string &path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw forensics_error(ErrorKind::io_error, "cannot open '" + path + "'");
    }
    try {
        return json::parse(in);
    } catch (const json::exception &e) {
        throw forensics_error(ErrorKind::config_invalid, "'" + path + "' is not valid JSON: " + e.what());
    }
}

}  // namespace jsonio

// model

inline void to_json(json &j, const StationRecord &s) {
    j = json{{"station_id", s.station_id}, {"center_id", s.center_id}, {"registered", s.registered},
             {"valid", s.valid},           {"favorable", s.favorable}, {"null_votes", s.null_votes},
             {"manual", s.manual}};
}
inline void from_json(const json &j, StationRecord &s) {
    j.at("station_id").get_to(s.station_id);
    j.at("center_id").get_to(s.center_id);
    j.at("registered").get_to(s.registered);
    j.at("valid").get_to(s.valid);
    j.at("favorable").get_to(s.favorable);
    j.at("null_votes").get_to(s.null_votes);
    s.manual = j.value("manual", false);
}

inline void to_json(json &j, const CleaningReport &r) {
    j = json{{"excluded_zero_vote_centers", r.excluded_zero_vote_centers},
             {"excluded_manual_centers", r.excluded_manual_centers},
             {"excluded_single_station_centers", r.excluded_single_station_centers},
             {"input_station_count", r.input_station_count},
             {"excluded_station_count", r.excluded_station_count},
             {"retained_station_count", r.retained_station_count},
             {"retained_center_count", r.retained_center_count},
             {"manual_rule_applied", r.manual_rule_applied},
             {"warnings", r.warnings}};
}
inline void from_json(const json &j, CleaningReport &r) {
    j.at("excluded_zero_vote_centers").get_to(r.excluded_zero_vote_centers);
    j.at("excluded_manual_centers").get_to(r.excluded_manual_centers);
    j.at("excluded_single_station_centers").get_to(r.excluded_single_station_centers);
    j.at("input_station_count").get_to(r.input_station_count);
    j.at("excluded_station_count").get_to(r.excluded_station_count);
    j.at("retained_station_count").get_to(r.retained_station_count);
    j.at("retained_center_count").get_to(r.retained_center_count);
    j.at("manual_rule_applied").get_to(r.manual_rule_applied);
    j.at("warnings").get_to(r.warnings);
}

// digits

inline void to_json(json &j, const DigitTestReport &r) {
    j = json{{"counts", r.counts},   {"expected", r.expected},   {"n_used", r.n_used},
             {"n_skipped", r.n_skipped}, {"chi2", r.chi2}, {"insufficient_data", r.insufficient_data}};
    jsonio::put_optional(j, "p_value", r.p_value);
}
inline void from_json(const json &j, DigitTestReport &r) {
    j.at("counts").get_to(r.counts);
    j.at("expected").get_to(r.expected);
    j.at("n_used").get_to(r.n_used);
    j.at("n_skipped").get_to(r.n_skipped);
    j.at("chi2").get_to(r.chi2);
    j.at("insufficient_data").get_to(r.insufficient_data);
    r.p_value = jsonio::get_optional<double>(j, "p_value");
}

// zscore

inline void to_json(json &j, const ZScoreEntry &e) {
    j = json{{"station_id", e.station_id}, {"center_id", e.center_id}, {"O", e.O}, {"expected", e.expected}, {"z", e.z}};
}
inline void from_json(const json &j, ZScoreEntry &e) {
    j.at("station_id").get_to(e.station_id);
    j.at("center_id").get_to(e.center_id);
    j.at("O").get_to(e.O);
    j.at("expected").get_to(e.expected);
    j.at("z").get_to(e.z);
}

inline void to_json(json &j, const ZSummary &s) {
    j = json{{"K", s.K}, {"mean", s.mean}, {"variance", s.variance}, {"expected_kappa", s.expected_kappa}};
}
inline void from_json(const json &j, ZSummary &s) {
    j.at("K").get_to(s.K);
    j.at("mean").get_to(s.mean);
    j.at("variance").get_to(s.variance);
    j.at("expected_kappa").get_to(s.expected_kappa);
}

// zeta

inline void to_json(json &j, const ZetaPoint &p) {
    j = json{{"k", p.k},
             {"r_k", jsonio::encode_double(p.r_k)},
             {"s_k", jsonio::encode_double(p.s_k)},
             {"S_k", jsonio::encode_double(p.S_k)},
             {"zeta", jsonio::encode_double(p.zeta)},
             {"p_value", jsonio::encode_double(p.p_value)},
             {"zero_variance", p.zero_variance}};
}
inline void from_json(const json &j, ZetaPoint &p) {
    j.at("k").get_to(p.k);
    p.r_k = jsonio::decode_double(j.at("r_k"));
    p.s_k = jsonio::decode_double(j.at("s_k"));
    p.S_k = jsonio::decode_double(j.at("S_k"));
    p.zeta = jsonio::decode_double(j.at("zeta"));
    p.p_value = jsonio::decode_double(j.at("p_value"));
    j.at("zero_variance").get_to(p.zero_variance);
}

inline void to_json(json &j, const ZetaSeries &s) {
    j = json{{"k_min", s.k_min},
             {"k_max", s.k_max},
             {"K", s.K},
             {"scaling", std::string(to_string(s.scaling))},
             {"R", s.R},
             {"band_9999", s.band_9999},
             {"band_99", s.band_99},
             {"longest_excursion", s.longest_excursion},
             {"longest_excursion_start", s.longest_excursion_start},
             {"frac_outside_9999", s.frac_outside_9999},
             {"frac_inside_99", s.frac_inside_99},
             {"min_p_value", s.min_p_value},
             {"min_p_k", s.min_p_k},
             {"zero_variance_points", s.zero_variance_points},
             {"points", s.points}};
}
inline void from_json(const json &j, ZetaSeries &s) {
    j.at("k_min").get_to(s.k_min);
    j.at("k_max").get_to(s.k_max);
    j.at("K").get_to(s.K);
    s.scaling = parse_scaling(j.at("scaling").get<std::string>());
    j.at("R").get_to(s.R);
    j.at("band_9999").get_to(s.band_9999);
    j.at("band_99").get_to(s.band_99);
    j.at("longest_excursion").get_to(s.longest_excursion);
    j.at("longest_excursion_start").get_to(s.longest_excursion_start);
    j.at("frac_outside_9999").get_to(s.frac_outside_9999);
    j.at("frac_inside_99").get_to(s.frac_inside_99);
    j.at("min_p_value").get_to(s.min_p_value);
    j.at("min_p_k").get_to(s.min_p_k);
    j.at("zero_variance_points").get_to(s.zero_variance_points);
    j.at("points").get_to(s.points);
}

inline void to_json(json &j, const Verdict &v) {
    j = json{{"h1_rejected", v.h1_rejected},
             {"group", std::string(to_string(v.group))},
             {"run_threshold", v.run_threshold},
             {"rationale", v.rationale}};
}
inline void from_json(const json &j, Verdict &v) {
    j.at("h1_rejected").get_to(v.h1_rejected);
    v.group = parse_verdict_group(j.at("group").get<std::string>());
    j.at("run_threshold").get_to(v.run_threshold);
    j.at("rationale").get_to(v.rationale);
}

// estimate

inline void to_json(json &j, const RhoPoint &p) {
    j = json{{"beta", p.beta}, {"rho", p.rho}};
}
inline void from_json(const json &j, RhoPoint &p) {
    j.at("beta").get_to(p.beta);
    j.at("rho").get_to(p.rho);
}

inline void to_json(json &j, const EpsilonResample &r) {
    j = json{{"replicates", r.replicates}, {"seed", r.seed}, {"sd", r.sd}, {"q025", r.q025}, {"q975", r.q975}};
}
inline void from_json(const json &j, EpsilonResample &r) {
    j.at("replicates").get_to(r.replicates);
    j.at("seed").get_to(r.seed);
    j.at("sd").get_to(r.sd);
    j.at("q025").get_to(r.q025);
    j.at("q975").get_to(r.q975);
}

inline void to_json(json &j, const FraudEstimate &e) {
    j = json{{"threshold", e.threshold},
             {"K", e.K},
             {"kappa", e.kappa},
             {"expected_kappa", e.expected_kappa},
             {"excess_factor", jsonio::encode_double(e.excess_factor)},
             {"r_kappa", e.r_kappa},
             {"R", e.R},
             {"epsilon_hat", e.epsilon_hat},
             {"rho_curve", e.rho_curve},
             {"warnings", e.warnings},
             {"assumption", e.assumption}};
    jsonio::put_optional(j, "crossover_beta", e.crossover_beta);
    jsonio::put_optional(j, "resample", e.resample);
}
inline void from_json(const json &j, FraudEstimate &e) {
    j.at("threshold").get_to(e.threshold);
    j.at("K").get_to(e.K);
    j.at("kappa").get_to(e.kappa);
    j.at("expected_kappa").get_to(e.expected_kappa);
    e.excess_factor = jsonio::decode_double(j.at("excess_factor"));
    j.at("r_kappa").get_to(e.r_kappa);
    j.at("R").get_to(e.R);
    j.at("epsilon_hat").get_to(e.epsilon_hat);
    j.at("rho_curve").get_to(e.rho_curve);
    j.at("warnings").get_to(e.warnings);
    j.at("assumption").get_to(e.assumption);
    e.crossover_beta = jsonio::get_optional<double>(j, "crossover_beta");
    e.resample = jsonio::get_optional<EpsilonResample>(j, "resample");
}

inline void to_json(json &j, const Scenario &s) {
    j = json{{"label", s.label}, {"beta_low", s.beta_low}, {"beta_high", s.beta_high}};
}
inline void from_json(const json &j, Scenario &s) {
    j.at("label").get_to(s.label);
    j.at("beta_low").get_to(s.beta_low);
    j.at("beta_high").get_to(s.beta_high);
}

inline void to_json(json &j, const ScenarioRow &r) {
    j = json{{"label", r.label},
             {"beta_low", r.beta_low},
             {"beta_high", r.beta_high},
             {"rho_low_beta", r.rho_low_beta},
             {"rho_high_beta", r.rho_high_beta},
             {"outcome", std::string(to_string(r.outcome))}};
}
inline void from_json(const json &j, ScenarioRow &r) {
    j.at("label").get_to(r.label);
    j.at("beta_low").get_to(r.beta_low);
    j.at("beta_high").get_to(r.beta_high);
    j.at("rho_low_beta").get_to(r.rho_low_beta);
    j.at("rho_high_beta").get_to(r.rho_high_beta);
    r.outcome = parse_scenario_outcome(j.at("outcome").get<std::string>());
}

inline void to_json(json &j, const DeadHeatBand &b) {
    j = json::array({b.low, b.high});
}
inline void from_json(const json &j, DeadHeatBand &b) {
    if (!j.is_array() || j.size() != 2) {
        throw forensics_error(ErrorKind::config_invalid, "dead-heat band must be [low, high]");
    }
    b.low = j[0].get<double>();
    b.high = j[1].get<double>();
}

/// Accepts either a bare array of scenarios or {"schema_version": 1, "scenarios": [...]}.
inline std::vector<Scenario> load_scenarios(const std::string &path) {
    const auto j = jsonio::read_file(path);
    try {
        const json &arr = j.is_array() ? j : j.at("scenarios");
        if (j.is_object() && j.value("schema_version", 1) != 1) {
            throw forensics_error(ErrorKind::config_invalid, "unsupported scenarios schema_version");
        }
        return arr.get<std::vector<Scenario>>();
    } catch (const json::exception &e) {
        throw forensics_error(ErrorKind::config_invalid, "bad scenarios file '" + path + "': " + e.what());
    }
}

// synth

namespace synth {

inline void to_json(json &j, const IntDistribution &d) {
    switch (d.kind) {
        case IntDistribution::Kind::constant: j = json{{"kind", "constant"}, {"value", d.min}}; return;
        case IntDistribution::Kind::uniform: j = json{{"kind", "uniform"}, {"min", d.min}, {"max", d.max}}; return;
        case IntDistribution::Kind::log_uniform:
            j = json{{"kind", "log-uniform"}, {"min", d.min}, {"max", d.max}};
            return;
    }
}
inline void from_json(const json &j, IntDistribution &d) {
    const auto kind = j.at("kind").get<std::string>();
    if (kind == "constant") {
        d.kind = IntDistribution::Kind::constant;
        d.min = d.max = j.at("value").get<std::int64_t>();
    } else if (kind == "uniform" || kind == "log-uniform") {
        d.kind = kind == "uniform" ? IntDistribution::Kind::uniform : IntDistribution::Kind::log_uniform;
        d.min = j.at("min").get<std::int64_t>();
        d.max = j.at("max").get<std::int64_t>();
    } else {
        throw forensics_error(ErrorKind::config_invalid, "unknown integer distribution '" + kind + "'");
    }
}

inline void to_json(json &j, const ProbDistribution &d) {
    switch (d.kind) {
        case ProbDistribution::Kind::constant: j = json{{"kind", "constant"}, {"value", d.value}}; return;
        case ProbDistribution::Kind::uniform: j = json{{"kind", "uniform"}, {"low", d.low}, {"high", d.high}}; return;
        case ProbDistribution::Kind::beta: j = json{{"kind", "beta"}, {"a", d.a}, {"b", d.b}}; return;
    }
}
inline void from_json(const json &j, ProbDistribution &d) {
    const auto kind = j.at("kind").get<std::string>();
    d = ProbDistribution{};
    if (kind == "constant") {
        d.kind = ProbDistribution::Kind::constant;
        d.value = j.at("value").get<double>();
    } else if (kind == "uniform") {
        d.kind = ProbDistribution::Kind::uniform;
        d.low = j.at("low").get<double>();
        d.high = j.at("high").get<double>();
    } else if (kind == "beta") {
        d.kind = ProbDistribution::Kind::beta;
        d.a = j.at("a").get<int>();
        d.b = j.at("b").get<int>();
    } else {
        throw forensics_error(ErrorKind::config_invalid, "unknown probability distribution '" + kind + "'");
    }
}

inline void to_json(json &j, const InjectionPlan &p) {
    j = json{{"kind", std::string(to_string(p.kind))},
             {"target_fraction", p.target_fraction},
             {"targeting", std::string(to_string(p.targeting))},
             {"shift_strength", p.shift_strength},
             {"strength_profile", std::string(to_string(p.strength_profile))},
             {"relocation_strength", p.relocation_strength}};
}
inline void from_json(const json &j, InjectionPlan &p) {
    p = InjectionPlan{};
    if (j.contains("kind")) p.kind = parse_injection_kind(j.at("kind").get<std::string>());
    jsonio::read_if(j, "target_fraction", p.target_fraction);
    if (j.contains("targeting")) p.targeting = parse_targeting(j.at("targeting").get<std::string>());
    jsonio::read_if(j, "shift_strength", p.shift_strength);
    if (j.contains("strength_profile")) {
        p.strength_profile = parse_strength_profile(j.at("strength_profile").get<std::string>());
    }
    jsonio::read_if(j, "relocation_strength", p.relocation_strength);
}

inline void to_json(json &j, const GeneratorConfig &c) {
    j = json{{"schema_version", c.schema_version},
             {"seed", c.seed},
             {"election_id", c.election_id},
             {"n_centers", c.n_centers},
             {"stations_per_center", c.stations_per_center},
             {"registered_per_station", c.registered_per_station},
             {"alpha_center", c.alpha_center},
             {"pi_center", c.pi_center},
             {"null_share", c.null_share},
             {"injection", c.injection}};
}
/// Missing keys keep their defaults, so a config may list only what it changes.
inline void from_json(const json &j, GeneratorConfig &c) {
    c = GeneratorConfig{};
    if (!j.contains("schema_version")) {
        throw forensics_error(ErrorKind::config_invalid, "generator config lacks schema_version");
    }
    j.at("schema_version").get_to(c.schema_version);
    jsonio::read_if(j, "seed", c.seed);
    jsonio::read_if(j, "election_id", c.election_id);
    jsonio::read_if(j, "n_centers", c.n_centers);
    jsonio::read_if(j, "stations_per_center", c.stations_per_center);
    jsonio::read_if(j, "registered_per_station", c.registered_per_station);
    jsonio::read_if(j, "alpha_center", c.alpha_center);
    jsonio::read_if(j, "pi_center", c.pi_center);
    jsonio::read_if(j, "null_share", c.null_share);
    jsonio::read_if(j, "injection", c.injection);
}

inline void to_json(json &j, const GroundTruth &t) {
    j = json{{"schema_version", config_schema_version},
             {"election_id", t.election_id},
             {"seed", t.seed},
             {"injection_kind", std::string(to_string(t.kind))},
             {"rho_true", t.rho_true},
             {"realized_beta", t.realized_beta},
             {"injected_station_ids", t.injected_station_ids},
             {"pre_injection_totals",
              {{"favorable", t.pre_favorable}, {"valid", t.pre_valid}, {"null_votes", t.pre_null},
               {"registered", t.pre_registered}}},
             {"pre_injection", t.pre_injection}};
}
inline void from_json(const json &j, GroundTruth &t) {
    j.at("election_id").get_to(t.election_id);
    j.at("seed").get_to(t.seed);
    t.kind = parse_injection_kind(j.at("injection_kind").get<std::string>());
    j.at("rho_true").get_to(t.rho_true);
    j.at("realized_beta").get_to(t.realized_beta);
    j.at("injected_station_ids").get_to(t.injected_station_ids);
    const auto &tot = j.at("pre_injection_totals");
    tot.at("favorable").get_to(t.pre_favorable);
    tot.at("valid").get_to(t.pre_valid);
    tot.at("null_votes").get_to(t.pre_null);
    tot.at("registered").get_to(t.pre_registered);
    j.at("pre_injection").get_to(t.pre_injection);
}

inline GeneratorConfig load_config(const std::string &path) {
    const auto j = jsonio::read_file(path);
    GeneratorConfig cfg;
    try {
        cfg = j.get<GeneratorConfig>();
    } catch (const json::exception &e) {
        throw forensics_error(ErrorKind::config_invalid, "bad generator config '" + path + "': " + e.what());
    }
    validate(cfg);
    return cfg;
}

}  // namespace synth

}  // namespace eforensics
