#include <gtest/gtest.h>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <thread>
#include <vector>

#include "eforensics/detail/parallel.hpp"
#include "eforensics/synth.hpp"
#include "eforensics/zeta.hpp"

using namespace eforensics;

namespace {

ElectionDataset clean_election(std::uint64_t seed, std::int64_t centers) {
    synth::GeneratorConfig cfg;
    cfg.seed = seed;
    cfg.n_centers = centers;
    return synth::generate(cfg).dataset;
}

ZetaSeries series_from(const std::vector<double> &zetas) {
    ZetaSeries s;
    s.k_min = 1;
    s.K = zetas.size() * 2 + 4;
    std::size_t k = 2;
    for (double z : zetas) {
        ZetaPoint p;
        p.k = k++;
        p.zeta = z;
        p.p_value = stats::two_sided_p(z);
        s.points.push_back(p);
    }
    s.k_max = k;
    update_excursions(s);
    return s;
}

}  // namespace

TEST(Zeta, HandEvaluatedPoint) {
    // M_k = {(50,100), (70,100)}, K = 1000, mu = 100, R = 0.55
    const auto p = detail::finish_point(2, 1000, 120, 200, 200.0, 100.0, 550, 1000);
    EXPECT_DOUBLE_EQ(p.r_k, 0.6);
    EXPECT_NEAR(p.S_k * p.S_k, 0.00998, 1e-15);
    EXPECT_NEAR(p.zeta, 0.5005007512521914, 1e-12);
    EXPECT_FALSE(p.zero_variance);
}

TEST(Zeta, ZeroVarianceIsFlagged) {
    std::vector<StationRecord> recs;
    for (int i = 0; i < 8; ++i) {
        recs.push_back({"s" + std::to_string(i), "c" + std::to_string(i / 2), 120, 100, 60, 5, false});
    }
    const auto ds = clean("x", recs);
    const auto t = z_table(ds);
    const auto p = zeta_k(ds, t, 4);
    EXPECT_TRUE(p.zero_variance);
    EXPECT_EQ(p.zeta, 0.0);
    EXPECT_EQ(p.r_k, 0.6);
    EXPECT_EQ(p.p_value, 1.0);

    const auto up = detail::finish_point(3, 100, 70, 100, 0.0, 50.0, 55, 100);
    EXPECT_TRUE(up.zero_variance);
    EXPECT_EQ(up.zeta, std::numeric_limits<double>::infinity());
    EXPECT_EQ(up.p_value, 0.0);
}

TEST(Zeta, MkIsNestedPrefixOfExtremeOrder) {
    const auto ds = clean_election(4, 300);
    const auto t = z_table(ds);
    const std::size_t K = t.size();
    EXPECT_EQ(m_k(t, K).size(), K);
    const auto first = m_k(t, 1);
    ASSERT_EQ(first.size(), 1u);
    for (const auto &e : t.entries) {
        EXPECT_LE(std::abs(e.z), std::abs(t.entries[first[0]].z));
    }
    for (std::size_t j = 1; j < K; ++j) {
        const auto a = m_k(t, j);
        const auto b = m_k(t, j + 1);
        EXPECT_TRUE(std::equal(a.begin(), a.end(), b.begin()));
    }
    EXPECT_THROW((void)m_k(t, 0), forensics_error);
    EXPECT_THROW((void)m_k(t, K + 1), forensics_error);
}

TEST(Zeta, FullSampleRecoversR) {
    for (std::uint64_t seed : {1, 2, 3}) {
        const auto ds = clean_election(seed, 200);
        const auto t = z_table(ds);
        EXPECT_EQ(sample_ratio(ds, t, t.size()), population_ratio(ds));
    }
}

TEST(Zeta, SeriesMatchesDirectComputation) {
    synth::GeneratorConfig cfg;
    cfg.n_centers = 800;
    cfg.injection.kind = synth::InjectionKind::type_c;
    cfg.injection.target_fraction = 0.05;
    const auto ds = synth::generate(cfg).dataset;
    const auto t = z_table(ds);
    for (auto scaling : {Scaling::population_mean, Scaling::sample_mean}) {
        const auto s = zeta_series(ds, t, 100, 0, scaling, 3);
        EXPECT_EQ(s.k_max, t.size() / 2);
        ASSERT_EQ(s.points.size(), s.k_max - s.k_min - 1);
        for (std::size_t i = 0; i < s.points.size(); i += 37) {
            const auto &p = s.points[i];
            EXPECT_EQ(p.k, s.k_min + 1 + i);
            const auto d = zeta_k(ds, t, p.k, scaling);
            EXPECT_NEAR(p.zeta, d.zeta, 1e-12 * std::max(1.0, std::abs(d.zeta)));
            EXPECT_NEAR(p.r_k, d.r_k, 1e-14);
            EXPECT_NEAR(p.S_k, d.S_k, 1e-12 * d.S_k);
            EXPECT_GE(p.p_value, 0.0);
            EXPECT_LE(p.p_value, 1.0);
        }
        EXPECT_EQ(s, zeta_series(ds, t, 100, 0, scaling, 1));
    }
}

TEST(Zeta, StandardErrorShrinksWithK) {
    // s_k and mu fixed: S_k carries only the (1 - k/K)/k factor
    double prev = std::numeric_limits<double>::infinity();
    for (std::size_t k = 2; k < 1000; ++k) {
        const auto p = detail::finish_point(k, 1000, 60 * static_cast<count_t>(k), 100 * static_cast<count_t>(k), 200.0,
                                            100.0, 550, 1000);
        EXPECT_LT(p.S_k, prev);
        prev = p.S_k;
    }
}

TEST(Zeta, RangeValidation) {
    const auto ds = clean_election(5, 100);
    const auto t = z_table(ds);
    EXPECT_THROW((void)zeta_series(ds, t, 1, 50), forensics_error);
    EXPECT_THROW((void)zeta_series(ds, t, 100, t.size()), forensics_error);
    EXPECT_THROW((void)zeta_series(ds, t, 50, 51), forensics_error);
    EXPECT_THROW((void)zeta_k(ds, t, t.size()), forensics_error);
}

TEST(Zeta, RestrictSeries) {
    const auto ds = clean_election(6, 600);
    const auto t = z_table(ds);
    const auto s = zeta_series(ds, t);
    const auto r = restrict_series(s, 200, 900);
    EXPECT_EQ(r.k_min, 200u);
    EXPECT_EQ(r.k_max, 900u);
    ASSERT_EQ(r.points.size(), 699u);
    EXPECT_EQ(r.points.front(), s.points[200 - s.k_min]);
    EXPECT_EQ(r, zeta_series(ds, t, 200, 900));
    EXPECT_THROW((void)restrict_series(s, 50, 900), forensics_error);
    EXPECT_THROW((void)restrict_series(s, 200, s.k_max + 1), forensics_error);
}

TEST(Verdict, RunThresholdBoundaries) {
    EXPECT_EQ(verdict(series_from(std::vector<double>(500, 1.0))).group, VerdictGroup::no_evidence);

    std::vector<double> z(600, 0.5);
    std::fill(z.begin() + 100, z.begin() + 149, 4.5);
    const auto s49 = series_from(z);
    EXPECT_EQ(s49.longest_excursion, 49u);
    EXPECT_EQ(s49.longest_excursion_start, 102u);
    EXPECT_FALSE(verdict(s49).h1_rejected);
    EXPECT_TRUE(verdict(s49, 49).h1_rejected);

    z[149] = -4.0;
    EXPECT_EQ(verdict(series_from(z)).group, VerdictGroup::biased_count);

    const auto all = series_from(std::vector<double>(600, 5.0));
    const auto v = verdict(all);
    EXPECT_TRUE(v.h1_rejected);
    EXPECT_EQ(all.longest_excursion, 600u);
    EXPECT_EQ(all.frac_outside_9999, 1.0);
    EXPECT_FALSE(v.rationale.empty());

    EXPECT_THROW((void)verdict(ZetaSeries{}), forensics_error);
}

TEST(Verdict, BandStatistics) {
    const auto s = series_from({0.0, 1.0, 3.0, 4.0, -3.95, 2.0});
    EXPECT_EQ(s.longest_excursion, 2u);
    EXPECT_DOUBLE_EQ(s.frac_outside_9999, 2.0 / 6.0);
    EXPECT_DOUBLE_EQ(s.frac_inside_99, 3.0 / 6.0);
    EXPECT_EQ(s.min_p_k, 5u);
}

TEST(Zeta, NullDistributionAtK500) {
    constexpr int seeds = 200;
    std::vector<double> z(seeds);
    std::atomic<int> outside{0};
    detail::parallel_chunks(seeds, std::max(1u, std::thread::hardware_concurrency()), [&](std::size_t lo, std::size_t hi) {
        for (std::size_t i = lo; i < hi; ++i) {
            const auto ds = clean_election(100 + i, 850);
            const auto t = z_table(ds);
            z[i] = zeta_k(ds, t, 500).zeta;
            if (std::abs(z[i]) >= 3.9) {
                ++outside;
            }
        }
    });
    const auto m = stats::sample_moments(z);
    EXPECT_LE(std::abs(m.mean), 0.15);
    EXPECT_GE(m.variance, 0.7);
    EXPECT_LE(m.variance, 1.3);
    EXPECT_LE(outside.load(), seeds / 100);
}

TEST(Zeta, TypeCPushesSeriesAboveR) {
    synth::GeneratorConfig cfg;
    cfg.n_centers = 1700;
    cfg.injection.kind = synth::InjectionKind::type_c;
    cfg.injection.target_fraction = 0.03;
    const auto ds = synth::generate(cfg).dataset;
    const auto s = zeta_series(ds, z_table(ds));
    EXPECT_GT(s.longest_excursion, 500u);
    EXPECT_LT(s.min_p_value, 1e-6);
    for (const auto &p : s.points) {
        if (std::abs(p.zeta) > 3.9) {
            EXPECT_GT(p.zeta, 0.0) << p.k;
        }
    }
    EXPECT_EQ(verdict(s).group, VerdictGroup::biased_count);
}
