#pragma once

// Synthetic elections with known ground truth: a clean binomial model per center,
// optionally followed by share-preserving relocation (type B) or vote-shifting
// manipulation (type C) on a chosen set of stations.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <cstdio>
#include <numeric>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "eforensics/detail/parallel.hpp"
#include "eforensics/error.hpp"
#include "eforensics/ingest.hpp"
#include "eforensics/model.hpp"
#include "eforensics/rng.hpp"

namespace eforensics::synth {

struct IntDistribution {
    enum class Kind { constant, uniform, log_uniform };
    Kind kind = Kind::uniform;
    std::int64_t min = 0;
    std::int64_t max = 0;

    [[nodiscard]] std::int64_t sample(rng::Xoshiro256 &gen) const {
        switch (kind) {
            case Kind::constant: return min;
            case Kind::uniform: return gen.uniform_int(min, max);
            case Kind::log_uniform: {
                const double lo = std::log(static_cast<double>(min));
                const double hi = std::log(static_cast<double>(max));
                const auto x = static_cast<std::int64_t>(std::floor(std::exp(lo + gen.uniform01() * (hi - lo))));
                return std::clamp(x, min, max);
            }
        }
        return min;
    }

    friend bool operator==(const IntDistribution &, const IntDistribution &) = default;
};

struct ProbDistribution {
    enum class Kind { constant, uniform, beta };
    Kind kind = Kind::beta;
    double value = 0.5;  // constant
    double low = 0.0;    // uniform
    double high = 1.0;
    int a = 1;  // integer Beta shapes
    int b = 1;

    [[nodiscard]] double sample(rng::Xoshiro256 &gen) const {
        switch (kind) {
            case Kind::constant: return value;
            case Kind::uniform: return low + (high - low) * gen.uniform01();
            case Kind::beta: return rng::beta_int(gen, a, b);
        }
        return value;
    }

    friend bool operator==(const ProbDistribution &, const ProbDistribution &) = default;
};

enum class InjectionKind { none, type_b, type_c };
enum class Targeting { uniform, high_support, low_support };
enum class StrengthProfile { fixed, uniform };

constexpr std::string_view to_string(InjectionKind k) noexcept {
    switch (k) {
        case InjectionKind::none: return "none";
        case InjectionKind::type_b: return "type_b";
        case InjectionKind::type_c: return "type_c";
    }
    return "none";
}
constexpr std::string_view to_string(Targeting t) noexcept {
    switch (t) {
        case Targeting::uniform: return "uniform";
        case Targeting::high_support: return "high-support";
        case Targeting::low_support: return "low-support";
    }
    return "uniform";
}
constexpr std::string_view to_string(StrengthProfile s) noexcept {
    return s == StrengthProfile::fixed ? "fixed" : "uniform";
}

inline InjectionKind parse_injection_kind(std::string_view s) {
    if (s == "none") return InjectionKind::none;
    if (s == "type_b") return InjectionKind::type_b;
    if (s == "type_c") return InjectionKind::type_c;
    throw forensics_error(ErrorKind::config_invalid, "unknown injection kind '" + std::string(s) + "'");
}
inline Targeting parse_targeting(std::string_view s) {
    if (s == "uniform") return Targeting::uniform;
    if (s == "high-support") return Targeting::high_support;
    if (s == "low-support") return Targeting::low_support;
    throw forensics_error(ErrorKind::config_invalid, "unknown targeting '" + std::string(s) + "'");
}
inline StrengthProfile parse_strength_profile(std::string_view s) {
    if (s == "fixed") return StrengthProfile::fixed;
    if (s == "uniform") return StrengthProfile::uniform;
    throw forensics_error(ErrorKind::config_invalid, "unknown strength profile '" + std::string(s) + "'");
}

struct InjectionPlan {
    InjectionKind kind = InjectionKind::none;
    double target_fraction = 0.0;  // share of all stations touched
    Targeting targeting = Targeting::uniform;
    // type C: fraction of O converted to favorable votes; with the uniform profile each
    // station draws its own fraction from (0, shift_strength].
    double shift_strength = 0.8;
    StrengthProfile strength_profile = StrengthProfile::fixed;
    // type B: fraction of the donor's registered voters moved to a sibling station.
    double relocation_strength = 0.3;

    friend bool operator==(const InjectionPlan &, const InjectionPlan &) = default;
};

inline constexpr int config_schema_version = 1;

/// Defaults mirror configs/generator_defaults.json.
struct GeneratorConfig {
    int schema_version = config_schema_version;
    std::uint64_t seed = 1;
    std::string election_id = "synthetic";
    std::int64_t n_centers = 1700;
    IntDistribution stations_per_center{IntDistribution::Kind::uniform, 2, 10};
    IntDistribution registered_per_station{IntDistribution::Kind::log_uniform, 150, 1500};
    ProbDistribution alpha_center{ProbDistribution::Kind::beta, 0.5, 0.0, 1.0, 3, 7};
    ProbDistribution pi_center{ProbDistribution::Kind::beta, 0.5, 0.0, 1.0, 24, 16};
    double null_share = 0.05;  // share of O recorded as void ballots
    InjectionPlan injection;

    friend bool operator==(const GeneratorConfig &, const GeneratorConfig &) = default;
};

namespace detail {

inline void require(bool ok, const std::string &what) {
    if (!ok) {
        throw forensics_error(ErrorKind::config_invalid, what);
    }
}

inline void validate_prob(const ProbDistribution &d, const std::string &name) {
    switch (d.kind) {
        case ProbDistribution::Kind::constant:
            require(d.value > 0.0 && d.value < 1.0, name + ": constant must lie in (0, 1)");
            break;
        case ProbDistribution::Kind::uniform:
            require(d.low > 0.0 && d.high < 1.0 && d.low <= d.high, name + ": uniform bounds must satisfy 0 < low <= high < 1");
            break;
        case ProbDistribution::Kind::beta:
            require(d.a >= 1 && d.b >= 1 && d.a + d.b <= 100000, name + ": beta shapes must be positive integers");
            break;
    }
}

}  // namespace detail

inline void validate(const GeneratorConfig &cfg) {
    using detail::require;
    require(cfg.schema_version == config_schema_version, "unsupported schema_version");
    require(cfg.n_centers >= 1, "n_centers must be >= 1");
    const auto &spc = cfg.stations_per_center;
    require(spc.min >= 2 && spc.max >= spc.min, "stations_per_center minimum must be >= 2 and <= maximum");
    const auto &reg = cfg.registered_per_station;
    require(reg.min >= 1 && reg.max >= reg.min, "registered_per_station bounds must satisfy 1 <= min <= max");
    detail::validate_prob(cfg.alpha_center, "alpha_center");
    detail::validate_prob(cfg.pi_center, "pi_center");
    require(cfg.null_share >= 0.0 && cfg.null_share < 1.0, "null_share must lie in [0, 1)");
    const auto &inj = cfg.injection;
    require(inj.target_fraction >= 0.0 && inj.target_fraction <= 1.0, "target_fraction must lie in [0, 1]");
    require(inj.shift_strength > 0.0 && inj.shift_strength <= 1.0, "shift_strength must lie in (0, 1]");
    require(inj.relocation_strength > 0.0 && inj.relocation_strength <= 0.5, "relocation_strength must lie in (0, 0.5]");
}

struct GroundTruth {
    std::string election_id;
    std::uint64_t seed = 0;
    InjectionKind kind = InjectionKind::none;
    double rho_true = 0.0;
    double realized_beta = 0.0;
    std::vector<std::string> injected_station_ids;
    std::vector<StationRecord> pre_injection;  // retained stations, dataset order
    count_t pre_favorable = 0;
    count_t pre_valid = 0;
    count_t pre_null = 0;
    count_t pre_registered = 0;

    friend bool operator==(const GroundTruth &, const GroundTruth &) = default;
};

struct Generated {
    ElectionDataset dataset;
    GroundTruth truth;
};

inline std::string center_label(std::int64_t c) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "C%06lld", static_cast<long long>(c));
    return buf;
}

inline std::string station_label(std::int64_t c, std::int64_t s) {
    char buf[48];
    std::snprintf(buf, sizeof buf, "C%06lld-S%03lld", static_cast<long long>(c), static_cast<long long>(s));
    return buf;
}

namespace detail {

inline constexpr std::uint64_t injection_stream = 0xFFFF'FFFF'FFFF'FFFFULL;

// favorable/valid ordering without division; zero-valid stations sort as share 0.
inline bool share_greater(count_t w1, count_t t1, count_t w2, count_t t2) {
    const auto lhs = static_cast<__int128>(t1 == 0 ? 0 : w1) * (t2 == 0 ? 1 : t2);
    const auto rhs = static_cast<__int128>(t2 == 0 ? 0 : w2) * (t1 == 0 ? 1 : t1);
    return lhs > rhs;
}

inline count_t round_div(count_t num, count_t den) {
    return (2 * num + den) / (2 * den);
}

inline std::vector<std::size_t> inject_type_c(std::vector<StationRecord> &recs, const InjectionPlan &plan,
                                              rng::Xoshiro256 &gen) {
    std::vector<std::size_t> eligible;
    for (std::size_t i = 0; i < recs.size(); ++i) {
        if (derived_O(recs[i]) >= 1) {
            eligible.push_back(i);
        }
    }
    auto m = static_cast<std::size_t>(std::llround(plan.target_fraction * static_cast<double>(recs.size())));
    m = std::min(m, eligible.size());

    if (plan.targeting == Targeting::uniform) {
        for (std::size_t i = 0; i < m; ++i) {
            const auto j = i + static_cast<std::size_t>(gen.below(eligible.size() - i));
            std::swap(eligible[i], eligible[j]);
        }
    } else {
        const bool high = plan.targeting == Targeting::high_support;
        std::stable_sort(eligible.begin(), eligible.end(), [&](std::size_t a, std::size_t b) {
            const auto &ra = recs[a];
            const auto &rb = recs[b];
            return high ? share_greater(ra.favorable, ra.valid, rb.favorable, rb.valid)
                        : share_greater(rb.favorable, rb.valid, ra.favorable, ra.valid);
        });
    }
    eligible.resize(m);
    std::sort(eligible.begin(), eligible.end());

    for (auto idx : eligible) {
        auto &r = recs[idx];
        const count_t o = derived_O(r);
        const double g = plan.strength_profile == StrengthProfile::fixed ? plan.shift_strength
                                                                         : plan.shift_strength * gen.uniform01();
        const count_t d = std::clamp<count_t>(static_cast<count_t>(std::floor(g * static_cast<double>(o))), 1, o);
        const count_t from_abstentions = std::min(d, abstentions(r));
        r.null_votes -= d - from_abstentions;
        r.valid += d;
        r.favorable += d;
    }
    return eligible;
}

inline std::vector<std::size_t> inject_type_b(std::vector<StationRecord> &recs,
                                              const std::vector<std::size_t> &center_of,
                                              const std::vector<std::vector<std::size_t>> &members,
                                              const InjectionPlan &plan, rng::Xoshiro256 &gen) {
    const auto touched = static_cast<std::size_t>(std::llround(plan.target_fraction * static_cast<double>(recs.size())));
    const std::size_t pairs_wanted = touched / 2;

    std::vector<std::size_t> order(recs.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    if (plan.targeting == Targeting::uniform) {
        for (std::size_t i = order.size(); i > 1; --i) {
            std::swap(order[i - 1], order[static_cast<std::size_t>(gen.below(i))]);
        }
    } else {
        std::vector<count_t> cw(members.size(), 0);
        std::vector<count_t> ct(members.size(), 0);
        for (std::size_t i = 0; i < recs.size(); ++i) {
            cw[center_of[i]] += recs[i].favorable;
            ct[center_of[i]] += recs[i].valid;
        }
        const bool high = plan.targeting == Targeting::high_support;
        std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            const auto ca = center_of[a];
            const auto cb = center_of[b];
            return high ? share_greater(cw[ca], ct[ca], cw[cb], ct[cb]) : share_greater(cw[cb], ct[cb], cw[ca], ct[ca]);
        });
    }

    std::vector<char> used(recs.size(), 0);
    std::vector<std::size_t> injected;
    std::size_t pairs = 0;
    std::vector<std::size_t> candidates;
    for (auto donor : order) {
        if (pairs >= pairs_wanted) {
            break;
        }
        if (used[donor]) {
            continue;
        }
        candidates.clear();
        for (auto j : members[center_of[donor]]) {
            if (j != donor && !used[j]) {
                candidates.push_back(j);
            }
        }
        if (candidates.empty()) {
            continue;
        }
        const auto recipient = candidates[static_cast<std::size_t>(gen.below(candidates.size()))];
        used[donor] = used[recipient] = 1;
        ++pairs;
        injected.push_back(donor);
        injected.push_back(recipient);

        auto &a = recs[donor];
        auto &b = recs[recipient];
        const count_t tau = a.registered;
        const count_t moved =
            std::clamp<count_t>(std::llround(plan.relocation_strength * static_cast<double>(tau)), 1, tau / 2);
        const count_t kept = tau - moved;
        const count_t valid_new = round_div(a.valid * kept, tau);
        const count_t fav_new = a.valid > 0 ? round_div(a.favorable * valid_new, a.valid) : 0;
        const count_t null_new = std::min(round_div(a.null_votes * kept, tau), kept - valid_new);
        a.registered = kept;
        a.valid = valid_new;
        a.favorable = fav_new;
        a.null_votes = null_new;
        b.registered += moved;  // relocated voters abstain at the recipient
    }
    std::sort(injected.begin(), injected.end());
    return injected;
}

}  // namespace detail

/**
 * Generates one election.
 *
 * Each center draws from its own substream (seed, center index): station count,
 * abstention-or-null probability alpha_c, favorable share pi_c, then per station
 * tau, O ~ Bin(tau, alpha_c), W ~ Bin(tau - O, pi_c), nulls ~ Bin(O, null_share).
 * The injection phase uses a separate substream. The result passes through the
 * standard cleaning sequence (manual rule on).
 */
inline Generated generate(const GeneratorConfig &cfg, unsigned threads = 1) {
    validate(cfg);
    const auto n_centers = static_cast<std::size_t>(cfg.n_centers);
    std::vector<std::vector<StationRecord>> per_center(n_centers);

    ::eforensics::detail::parallel_chunks(n_centers, threads, [&](std::size_t begin, std::size_t end) {
        for (std::size_t c = begin; c < end; ++c) {
            rng::Xoshiro256 gen(rng::substream_seed(cfg.seed, c));
            const auto n = cfg.stations_per_center.sample(gen);
            const double alpha = cfg.alpha_center.sample(gen);
            const double pi = cfg.pi_center.sample(gen);
            auto &stations = per_center[c];
            stations.reserve(static_cast<std::size_t>(n));
            for (std::int64_t s = 0; s < n; ++s) {
                StationRecord r;
                r.station_id = station_label(static_cast<std::int64_t>(c) + 1, s + 1);
                r.center_id = center_label(static_cast<std::int64_t>(c) + 1);
                r.registered = cfg.registered_per_station.sample(gen);
                const count_t o = rng::binomial(gen, r.registered, alpha);
                r.valid = r.registered - o;
                r.favorable = rng::binomial(gen, r.valid, pi);
                r.null_votes = rng::binomial(gen, o, cfg.null_share);
                stations.push_back(std::move(r));
            }
        }
    });

    std::vector<StationRecord> recs;
    std::vector<std::size_t> center_of;
    std::vector<std::vector<std::size_t>> members(n_centers);
    for (std::size_t c = 0; c < n_centers; ++c) {
        for (auto &r : per_center[c]) {
            members[c].push_back(recs.size());
            center_of.push_back(c);
            recs.push_back(std::move(r));
        }
    }
    const auto pre = recs;

    rng::Xoshiro256 inj_gen(rng::substream_seed(cfg.seed, detail::injection_stream));
    std::vector<std::size_t> injected;
    switch (cfg.injection.kind) {
        case InjectionKind::none: break;
        case InjectionKind::type_c: injected = detail::inject_type_c(recs, cfg.injection, inj_gen); break;
        case InjectionKind::type_b:
            injected = detail::inject_type_b(recs, center_of, members, cfg.injection, inj_gen);
            break;
    }

    Generated out;
    out.dataset = clean(cfg.election_id, recs, CleaningOptions{true});

    auto &truth = out.truth;
    truth.election_id = cfg.election_id;
    truth.seed = cfg.seed;
    truth.kind = cfg.injection.kind;
    std::unordered_map<std::string_view, std::size_t> index_of;
    for (std::size_t i = 0; i < pre.size(); ++i) {
        index_of.emplace(pre[i].station_id, i);
    }
    std::vector<char> is_injected(recs.size(), 0);
    for (auto i : injected) {
        is_injected[i] = 1;
    }
    std::size_t retained_injected = 0;
    for (const auto &c : out.dataset.centers) {
        for (const auto &s : c.stations) {
            const auto i = index_of.at(s.station_id);
            const auto &p = pre[i];
            truth.pre_injection.push_back(p);
            truth.pre_favorable += p.favorable;
            truth.pre_valid += p.valid;
            truth.pre_null += p.null_votes;
            truth.pre_registered += p.registered;
            if (is_injected[i]) {
                truth.injected_station_ids.push_back(p.station_id);
                ++retained_injected;
            }
        }
    }
    truth.rho_true = truth.pre_valid > 0 ? static_cast<double>(truth.pre_favorable) / static_cast<double>(truth.pre_valid)
                                         : 0.0;
    const auto K = out.dataset.station_count();
    truth.realized_beta = K > 0 ? static_cast<double>(retained_injected) / static_cast<double>(K) : 0.0;
    return out;
}

struct ReplayReport {
    bool ok = true;
    std::size_t checked_stations = 0;
    std::vector<std::string> failures;
};

/**
 * Re-derives the generator's guarantees from a dataset and its ground truth:
 * untouched stations equal their pre-injection tallies, type-C stations gained
 * favorable votes and lost O, type-B stations kept W/T within 1/T.
 */
inline ReplayReport replay_check(const ElectionDataset &ds, const GroundTruth &truth) {
    if (ds.election_id != truth.election_id) {
        throw forensics_error(ErrorKind::mismatched_pair, "election ids differ: '" + ds.election_id + "' vs '" +
                                                              truth.election_id + "'");
    }
    if (ds.station_count() != truth.pre_injection.size()) {
        throw forensics_error(ErrorKind::mismatched_pair, "station counts differ");
    }
    std::unordered_map<std::string_view, const StationRecord *> pre;
    for (const auto &p : truth.pre_injection) {
        pre.emplace(p.station_id, &p);
    }
    std::unordered_map<std::string_view, bool> injected;
    for (const auto &id : truth.injected_station_ids) {
        injected.emplace(id, true);
    }

    ReplayReport rep;
    auto fail = [&](const std::string &station, const std::string &why) {
        rep.ok = false;
        rep.failures.push_back(station + ": " + why);
    };
    count_t registered_total = 0;
    for (const auto &c : ds.centers) {
        for (const auto &s : c.stations) {
            const auto it = pre.find(s.station_id);
            if (it == pre.end()) {
                throw forensics_error(ErrorKind::mismatched_pair, "station '" + s.station_id + "' absent from ground truth");
            }
            const auto &p = *it->second;
            ++rep.checked_stations;
            registered_total += s.registered;
            if (!injected.contains(s.station_id)) {
                if (!(s == p)) {
                    fail(s.station_id, "untouched station differs from its pre-injection tallies");
                }
                continue;
            }
            if (truth.kind == InjectionKind::type_c) {
                if (!(s.favorable > p.favorable)) {
                    fail(s.station_id, "type-C station did not gain favorable votes");
                }
                if (!(derived_O(s) < derived_O(p))) {
                    fail(s.station_id, "type-C station did not lose O");
                }
                if (s.registered != p.registered || s.valid - p.valid != s.favorable - p.favorable) {
                    fail(s.station_id, "type-C shift is not a pure O-to-favorable conversion");
                }
            } else if (truth.kind == InjectionKind::type_b) {
                if (p.valid > 0 && s.valid > 0) {
                    // |W/T - W0/T0| <= 1/T0, cross-multiplied.
                    const auto lhs = static_cast<__int128>(s.favorable) * p.valid - static_cast<__int128>(p.favorable) * s.valid;
                    const auto bound = static_cast<__int128>(s.valid);
                    if (lhs > bound || -lhs > bound) {
                        fail(s.station_id, "type-B relocation changed the favorable share beyond 1/T");
                    }
                } else if (s.favorable != 0 && s.valid == 0) {
                    fail(s.station_id, "type-B station has favorable votes without valid votes");
                }
            } else {
                fail(s.station_id, "listed as injected but ground truth has no injection");
            }
        }
    }
    if (truth.kind == InjectionKind::type_b && registered_total != truth.pre_registered) {
        rep.ok = false;
        rep.failures.emplace_back("type-B relocation did not conserve registered voters");
    }
    return rep;
}

}  // namespace eforensics::synth
