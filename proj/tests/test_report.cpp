#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "eforensics/plots.hpp"
#include "eforensics/report.hpp"
#include "eforensics/synth.hpp"

using namespace eforensics;
namespace fs = std::filesystem;

namespace {

ElectionDataset election(std::uint64_t seed, double type_c_fraction = 0.0) {
    synth::GeneratorConfig cfg;
    cfg.seed = seed;
    if (type_c_fraction > 0.0) {
        cfg.injection.kind = synth::InjectionKind::type_c;
        cfg.injection.target_fraction = type_c_fraction;
    }
    return synth::generate(cfg).dataset;
}

fs::path scratch(const std::string &name) {
    const auto dir = fs::temp_directory_path() / ("eforensics_test_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

Dossier flat_dossier(const std::string &id, std::size_t K, double zeta) {
    Dossier d;
    d.header.election_id = id;
    ZetaSeries s;
    s.K = K;
    s.k_min = 100;
    s.k_max = K / 2;
    for (std::size_t k = s.k_min + 1; k < s.k_max; ++k) {
        ZetaPoint p;
        p.k = k;
        p.zeta = zeta;
        p.p_value = stats::two_sided_p(zeta);
        s.points.push_back(p);
    }
    update_excursions(s);
    if (!s.points.empty()) {
        d.verdict = verdict(s);
    }
    d.zeta = std::move(s);
    return d;
}

}  // namespace

TEST(Report, CleanElectionHasNoEvidenceAndNoEstimate) {
    const auto d = analyze(election(1), PipelineOptions{});
    EXPECT_TRUE(d.errors.empty());
    ASSERT_TRUE(d.verdict);
    EXPECT_EQ(d.verdict->group, VerdictGroup::no_evidence);
    EXPECT_FALSE(d.estimate);
    EXPECT_TRUE(d.scenarios.empty());
    EXPECT_EQ(d.summary.group, "no-evidence");
    ASSERT_TRUE(d.zscore);
    EXPECT_EQ(d.zscore->kappa, d.zscore->outliers.size());
    ASSERT_TRUE(d.zeta);
    EXPECT_EQ(d.zeta->k_max, d.zeta->K / 2);
    EXPECT_FALSE(d.summary.lines.empty());
}

TEST(Report, TypeCElectionIsBiasedWithEstimate) {
    const auto ds = election(2, 0.03);
    const auto d = analyze(ds, PipelineOptions{});
    EXPECT_TRUE(d.errors.empty());
    EXPECT_EQ(d.summary.group, "biased-count");
    ASSERT_TRUE(d.estimate);
    EXPECT_GT(d.estimate->epsilon_hat, 0.0);
    EXPECT_EQ(d.estimate->R, population_ratio(ds));
    EXPECT_EQ(d.scenarios.size(), default_scenarios().size());
    EXPECT_FALSE(d.estimate->assumption.empty());
    ASSERT_TRUE(d.summary.R);
    EXPECT_EQ(*d.summary.R, d.estimate->R);
}

TEST(Report, ForcedEstimateOnCleanElectionCarriesWarning) {
    PipelineOptions opts;
    opts.force_estimate = true;
    opts.kappa_threshold = 3.0;
    const auto d = analyze(election(3), opts);
    ASSERT_TRUE(d.estimate);
    EXPECT_EQ(d.estimate->warnings.size(), 1u);
    EXPECT_EQ(d.summary.group, "no-evidence");
}

TEST(Report, DossierJsonRoundTrip) {
    PipelineOptions opts;
    opts.resample_replicates = 50;
    const auto d = analyze(election(4, 0.03), opts, "in.csv");
    const auto text = serialize(d);
    EXPECT_EQ(parse_dossier(text), d);
    EXPECT_EQ(serialize(parse_dossier(text)), text);
    EXPECT_EQ(text.back(), '\n');
}

TEST(Report, DeterministicAcrossThreadCounts) {
    const auto ds = election(5, 0.03);
    PipelineOptions one;
    one.resample_replicates = 100;
    auto many = one;
    many.threads = 6;
    EXPECT_EQ(serialize(analyze(ds, one)), serialize(analyze(ds, many)));
}

TEST(Report, MalformedInputYieldsIngestError) {
    const auto dir = scratch("malformed");
    const auto path = dir / "bad.csv";
    std::ofstream(path) << "election_id,center_id,station_id,registered,valid,favorable,null_votes,manual\n"
                        << "E,C,S1,100,50,20,0,0\nE,C,S2,100,50,60,0,0\n";
    const auto d = pipeline(path.string(), PipelineOptions{});
    ASSERT_EQ(d.errors.size(), 1u);
    EXPECT_EQ(d.errors[0].stage, "ingest");
    EXPECT_EQ(d.errors[0].kind, "MalformedRow");
    EXPECT_NE(d.errors[0].message.find('3'), std::string::npos);
    EXPECT_FALSE(d.zscore);
    EXPECT_EQ(d.summary.group, "incomplete");
}

TEST(Report, PipelineFromFileMatchesAnalyze) {
    const auto dir = scratch("roundtrip");
    const auto ds = election(6, 0.03);
    const auto path = dir / "tallies.csv";
    {
        std::ofstream out(path);
        write_tallies(out, ds.election_id, ds.records());
    }
    const auto d = pipeline(path.string(), PipelineOptions{});
    EXPECT_EQ(d, analyze(ds, PipelineOptions{}, path.string()));
}

TEST(Report, ShippedPipelineConfigLoads) {
    const auto opts = load_pipeline_options(EFORENSICS_SOURCE_DIR "/configs/pipeline.json");
    EXPECT_EQ(make_header(opts, "x").k_min, opts.k_min);
    EXPECT_FALSE(opts.scenarios.empty());
    const auto scenarios = load_scenarios(EFORENSICS_SOURCE_DIR "/configs/scenarios.json");
    EXPECT_FALSE(scenarios.empty());
}

TEST(Compare, CommonRangeAndGroups) {
    const auto a = flat_dossier("a", 3730, 5.0);
    const auto b = flat_dossier("b", 5000, 0.0);
    const auto c = flat_dossier("c", 4000, 0.5);
    const auto cmp = compare({a, b, c});
    EXPECT_EQ(cmp.k_min, 100u);
    EXPECT_EQ(cmp.k_max, 1865u);
    ASSERT_EQ(cmp.groups.size(), 2u);
    EXPECT_EQ(cmp.groups[0].group, "biased-count");
    EXPECT_EQ(cmp.groups[0].members, std::vector<std::string>{"a"});
    EXPECT_EQ(cmp.groups[1].members, (std::vector<std::string>{"b", "c"}));
    for (const auto &s : cmp.series) {
        EXPECT_EQ(s.k_max, 1865u);
        EXPECT_EQ(s.points.size(), 1764u);
    }
    EXPECT_EQ(cmp.rows[1].K, 5000u);
}

TEST(Compare, IdenticalDossiersFormOneGroup) {
    const auto d = analyze(election(7), PipelineOptions{});
    const auto cmp = compare({d, d});
    ASSERT_EQ(cmp.groups.size(), 1u);
    EXPECT_EQ(cmp.groups[0].members.size(), 1u);
    EXPECT_EQ(cmp.rows.size(), 2u);
}

TEST(Compare, IncompatibleRanges) {
    try {
        (void)compare({flat_dossier("a", 3730, 0.0), flat_dossier("b", 202, 0.0)});
        FAIL();
    } catch (const forensics_error &e) {
        EXPECT_EQ(e.kind(), ErrorKind::incompatible_range);
    }
    EXPECT_THROW((void)compare({flat_dossier("a", 3730, 0.0)}), forensics_error);
    Dossier empty;
    EXPECT_THROW((void)compare({flat_dossier("a", 3730, 0.0), empty}), forensics_error);
}

TEST(Plots, CsvRoundTripAndSvgRendering) {
    const auto ds = election(8, 0.03);
    const auto d = analyze(ds, PipelineOptions{});
    const auto before = serialize(d);
    const auto dir = scratch("plots");
    {
        std::ofstream z(dir / "zeta.csv");
        plots::write_zeta_csv(z, *d.zeta);
        std::ofstream r(dir / "rho.csv");
        plots::write_rho_csv(r, *d.estimate);
        std::ofstream b(dir / "benford.csv");
        plots::write_benford_csv(b, *d.benford);
        std::ofstream q(dir / "qq.csv");
        plots::write_qq_csv(q, normal_plot_data(z_table(ds)));
    }
    const auto t = plots::read_csv(dir / "zeta.csv");
    const auto &zeta = t.column("zeta_k");
    ASSERT_EQ(zeta.size(), d.zeta->points.size());
    for (std::size_t i = 0; i < zeta.size(); ++i) {
        EXPECT_EQ(zeta[i], d.zeta->points[i].zeta);
    }
    EXPECT_THROW((void)t.column("nope"), forensics_error);

    const auto written = plots::render_directory(dir, dir / "svg");
    EXPECT_EQ(written.size(), 4u);
    for (const auto &p : written) {
        std::ifstream in(p);
        std::stringstream text;
        text << in.rdbuf();
        EXPECT_NE(text.str().find("<svg"), std::string::npos) << p;
        EXPECT_NE(text.str().find("</svg>"), std::string::npos) << p;
    }
    EXPECT_EQ(serialize(d), before);
}
