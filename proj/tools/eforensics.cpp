// eforensics: command-line front end.
//
// Exit codes: 0 success, 1 usage or configuration, 2 data error, 3 internal error.

#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "eforensics/eforensics.hpp"

namespace fs = std::filesystem;
using namespace eforensics;

namespace {

enum exit_code : int { ok = 0, usage = 1, data_error = 2, internal = 3 };

struct GlobalFlags {
    bool json = false;
    std::string csv_dir;
    std::string svg_dir;
    std::optional<std::uint64_t> seed;
    unsigned threads = 1;
};

struct InputFlags {
    std::string schema;
    std::string delimiter;
    bool keep_manual = false;
};

int exit_for(const forensics_error &e) {
    return e.kind() == ErrorKind::config_invalid ? usage : data_error;
}

void write_text(const fs::path &path, const std::string &text) {
    if (path.has_parent_path()) {
        fs::create_directories(path.parent_path());
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw forensics_error(ErrorKind::io_error, "cannot write '" + path.string() + "'");
    }
    out << text;
}

template <typename Fn>
void write_with(const fs::path &path, Fn &&fn) {
    std::ostringstream os;
    fn(os);
    write_text(path, os.str());
}

ParseOptions parse_options(const InputFlags &in) {
    ParseOptions po;
    if (!in.schema.empty()) {
        po.schema = ColumnSchema::parse(in.schema);
    }
    if (!in.delimiter.empty()) {
        po.delimiter = in.delimiter == "\\t" || in.delimiter == "tab" ? '\t' : in.delimiter.front();
    }
    return po;
}

ElectionDataset load(const std::string &path, const InputFlags &in) {
    return clean(parse_tallies_file(path, parse_options(in)), CleaningOptions{!in.keep_manual});
}

void add_input_flags(CLI::App *cmd, InputFlags &in) {
    cmd->add_option("--schema", in.schema, "Column remapping, e.g. favorable=si,valid=validos");
    cmd->add_option("--delimiter", in.delimiter, "Field delimiter (default: sniffed from the header; 'tab' for TAB)");
    cmd->add_flag("--keep-manual", in.keep_manual, "Do not drop centers with manually counted stations");
}

std::vector<double> parse_grid(const std::string &text) {
    std::vector<double> grid;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            std::size_t used = 0;
            grid.push_back(std::stod(item, &used));
            if (used != item.size()) {
                throw std::invalid_argument(item);
            }
        } catch (const std::exception &) {
            throw forensics_error(ErrorKind::config_invalid, "bad beta grid value '" + item + "'");
        }
    }
    if (grid.empty()) {
        throw forensics_error(ErrorKind::config_invalid, "empty beta grid");
    }
    return grid;
}

std::size_t parse_kmax(const std::string &text) {
    if (text == "auto") {
        return 0;
    }
    try {
        return static_cast<std::size_t>(std::stoull(text));
    } catch (const std::exception &) {
        throw forensics_error(ErrorKind::config_invalid, "--kmax expects an integer or 'auto'");
    }
}

void print_lines(const std::vector<std::string> &lines) {
    for (const auto &l : lines) {
        std::cout << l << '\n';
    }
}

/// Writes the four plot-data files for a dossier, then SVGs when requested.
void emit_plot_data(const Dossier &d, const ElectionDataset *ds, const GlobalFlags &g, const std::string &prefix) {
    if (g.csv_dir.empty() && g.svg_dir.empty()) {
        return;
    }
    const fs::path dir = g.csv_dir.empty() ? fs::path(g.svg_dir) : fs::path(g.csv_dir);
    fs::create_directories(dir);
    if (d.benford) {
        write_with(dir / (prefix + "benford.csv"), [&](std::ostream &o) { plots::write_benford_csv(o, *d.benford); });
    }
    if (ds != nullptr && d.zscore) {
        const auto table = z_table(*ds, d.header.kappa_threshold, g.threads);
        write_with(dir / (prefix + "qq.csv"), [&](std::ostream &o) { plots::write_qq_csv(o, normal_plot_data(table)); });
    }
    if (d.zeta) {
        write_with(dir / (prefix + "zeta.csv"), [&](std::ostream &o) { plots::write_zeta_csv(o, *d.zeta); });
    }
    if (d.estimate) {
        write_with(dir / (prefix + "rho.csv"), [&](std::ostream &o) { plots::write_rho_csv(o, *d.estimate); });
    }
    if (!g.svg_dir.empty()) {
        plots::render_directory(dir, g.svg_dir, prefix, d.header.band_9999, d.header.band_99, d.header.dead_heat);
    }
}

void render_single(const fs::path &csv, const GlobalFlags &g, const char *stem) {
    if (g.svg_dir.empty()) {
        return;
    }
    fs::create_directories(g.svg_dir);
    const auto table = plots::read_csv(csv);
    write_with(fs::path(g.svg_dir) / (std::string(stem) + ".svg"), [&](std::ostream &o) {
        if (std::string(stem) == "benford") plots::render_benford_svg(o, table);
        else if (std::string(stem) == "qq") plots::render_qq_svg(o, table);
        else if (std::string(stem) == "zeta") plots::render_zeta_svg(o, table);
        else plots::render_rho_svg(o, table);
    });
}

/// Plot data path for a single-analysis command: explicit flag wins, else --csv-dir, else a temp file if only SVG is wanted.
std::optional<fs::path> plot_path(const std::string &flag, const GlobalFlags &g, const char *stem) {
    if (!flag.empty()) return fs::path(flag);
    if (!g.csv_dir.empty()) return fs::path(g.csv_dir) / (std::string(stem) + ".csv");
    if (!g.svg_dir.empty()) return fs::path(g.svg_dir) / (std::string(stem) + ".csv");
    return std::nullopt;
}

}  // namespace

int main(int argc, char **argv) {
    CLI::App app{"Statistical forensics for station-level election tallies"};
    app.require_subcommand(1);
    app.set_version_flag("--version", "eforensics 1.0.0");

    GlobalFlags g;
    app.add_flag("--json", g.json, "Print machine-readable JSON on stdout");
    app.add_option("--csv-dir", g.csv_dir, "Directory for CSV plot data");
    app.add_option("--svg-dir", g.svg_dir, "Directory for SVG figures (drawn from the CSV plot data)");
    app.add_option("--seed", g.seed, "Seed for randomized steps (synth, resampling)");
    app.add_option("--threads", g.threads, "Worker threads")->check(CLI::Range(1u, 1024u));

    InputFlags in;

    // ingest
    auto *ingest_cmd = app.add_subcommand("ingest", "Parse and clean a tallies file; print the cleaning report");
    std::string ingest_path;
    std::string ingest_out;
    ingest_cmd->add_option("tallies", ingest_path, "Tallies file")->required();
    ingest_cmd->add_option("--out", ingest_out, "Write retained stations as canonical CSV");
    add_input_flags(ingest_cmd, in);

    // benford
    auto *benford_cmd = app.add_subcommand("benford", "Second-digit Benford test on O = registered - valid");
    std::string benford_path;
    std::string benford_plot;
    benford_cmd->add_option("tallies", benford_path, "Tallies file")->required();
    benford_cmd->add_option("--plot-data", benford_plot, "CSV: digit, observed_freq, benford_freq");
    add_input_flags(benford_cmd, in);

    // zscore
    auto *zscore_cmd = app.add_subcommand("zscore", "Hypergeometric Z-scores of O per station");
    std::string zscore_path;
    std::string zscore_qq;
    double threshold = default_kappa_threshold;
    zscore_cmd->add_option("tallies", zscore_path, "Tallies file")->required();
    zscore_cmd->add_option("--threshold", threshold, "Outlier threshold on |Z|")->capture_default_str();
    zscore_cmd->add_option("--qq", zscore_qq, "CSV: expected_quantile, observed_z");
    add_input_flags(zscore_cmd, in);

    // zeta
    auto *zeta_cmd = app.add_subcommand("zeta", "zeta_k series over the k most extreme stations and the H1 verdict");
    std::string zeta_path;
    std::string zeta_csv;
    std::size_t kmin = default_k_min;
    std::string kmax = "auto";
    std::string scaling = "population-mean";
    std::size_t run_threshold = default_run_threshold;
    zeta_cmd->add_option("tallies", zeta_path, "Tallies file")->required();
    zeta_cmd->add_option("--kmin", kmin, "Exclusive lower bound on k")->capture_default_str();
    zeta_cmd->add_option("--kmax", kmax, "Exclusive upper bound on k, or auto for floor(K/2)")->capture_default_str();
    zeta_cmd->add_option("--scaling", scaling, "population-mean or sample-mean")->capture_default_str();
    zeta_cmd->add_option("--run-threshold", run_threshold, "Run length outside +/-3.9 that rejects H1")
        ->capture_default_str();
    zeta_cmd->add_option("--threshold", threshold, "Outlier threshold on |Z| (affects kappa only)");
    zeta_cmd->add_option("--series", zeta_csv, "CSV: k, r_k, S_k, zeta_k, p_value");
    add_input_flags(zeta_cmd, in);

    // estimate
    auto *estimate_cmd = app.add_subcommand("estimate", "Counterfactual rho_beta from the |Z| outliers");
    std::string estimate_path;
    std::string beta_grid;
    std::string scenarios_path;
    std::size_t resample = 0;
    estimate_cmd->add_option("tallies", estimate_path, "Tallies file")->required();
    estimate_cmd->add_option("--threshold", threshold, "Outlier threshold on |Z|")->capture_default_str();
    estimate_cmd->add_option("--beta-grid", beta_grid, "Comma-separated beta values in [0, 1]");
    estimate_cmd->add_option("--scenarios", scenarios_path, "JSON scenario list");
    estimate_cmd->add_option("--resample", resample, "Bootstrap replicates for epsilon (0: off)");
    add_input_flags(estimate_cmd, in);

    // synth
    auto *synth_cmd = app.add_subcommand("synth", "Generate a synthetic election with ground truth");
    std::string synth_config;
    std::string synth_out;
    std::string synth_truth;
    synth_cmd->add_option("--config", synth_config, "Generator config JSON (defaults when omitted)");
    synth_cmd->add_option("--out", synth_out, "Tallies CSV to write")->required();
    synth_cmd->add_option("--truth", synth_truth, "Ground-truth JSON to write");

    // pipeline
    auto *pipeline_cmd = app.add_subcommand("pipeline", "Run every stage and write the dossier");
    std::vector<std::string> pipeline_paths;
    std::string pipeline_config;
    std::string pipeline_out;
    bool force = false;
    pipeline_cmd->add_option("tallies", pipeline_paths, "Tallies file(s)")->required();
    pipeline_cmd->add_option("--config", pipeline_config, "Pipeline settings JSON");
    pipeline_cmd->add_option("--out", pipeline_out, "Dossier JSON file (one input) or directory (several inputs)");
    pipeline_cmd->add_flag("--force", force, "Run the estimate even when H1 is not rejected");
    pipeline_cmd->add_option("--threshold", threshold, "Outlier threshold on |Z|");
    pipeline_cmd->add_option("--kmin", kmin, "Exclusive lower bound on k");
    pipeline_cmd->add_option("--kmax", kmax, "Exclusive upper bound on k, or auto");
    pipeline_cmd->add_option("--scaling", scaling, "population-mean or sample-mean");
    pipeline_cmd->add_option("--run-threshold", run_threshold, "Run length that rejects H1");
    pipeline_cmd->add_option("--beta-grid", beta_grid, "Comma-separated beta values in [0, 1]");
    pipeline_cmd->add_option("--scenarios", scenarios_path, "JSON scenario list");
    pipeline_cmd->add_option("--resample", resample, "Bootstrap replicates for epsilon (0: off)");
    add_input_flags(pipeline_cmd, in);

    // compare
    auto *compare_cmd = app.add_subcommand("compare", "Compare dossiers on their common k range");
    std::vector<std::string> dossier_paths;
    compare_cmd->add_option("dossiers", dossier_paths, "Dossier JSON files")->required()->expected(2, -1);

    for (auto *cmd : app.get_subcommands({})) {
        cmd->fallthrough();
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError &e) {
        const int rc = app.exit(e);
        return rc == 0 ? ok : usage;
    }

    try {
        if (*ingest_cmd) {
            const auto parsed = parse_tallies_file(ingest_path, parse_options(in));
            const auto ds = clean(parsed, CleaningOptions{!in.keep_manual});
            if (!ingest_out.empty()) {
                const auto recs = ds.records();
                write_with(ingest_out, [&](std::ostream &o) { write_tallies(o, ds.election_id, recs); });
            }
            const json report{{"election_id", ds.election_id}, {"cleaning", ds.cleaning}};
            if (g.json) {
                std::cout << report.dump(2) << '\n';
            } else {
                const auto &c = ds.cleaning;
                std::cout << "election " << ds.election_id << ": " << c.retained_station_count << " of "
                          << c.input_station_count << " stations retained in " << c.retained_center_count
                          << " centers\n"
                          << "excluded centers: " << c.excluded_zero_vote_centers.size() << " zero-vote, "
                          << c.excluded_manual_centers.size() << " manual, " << c.excluded_single_station_centers.size()
                          << " single-station\n";
                print_lines(c.warnings);
            }
            return ok;
        }

        if (*benford_cmd) {
            const auto ds = load(benford_path, in);
            const auto rep = benford_test(ds);
            if (const auto p = plot_path(benford_plot, g, "benford")) {
                write_with(*p, [&](std::ostream &o) { plots::write_benford_csv(o, rep); });
                render_single(*p, g, "benford");
            }
            if (g.json) {
                std::cout << json{{"election_id", ds.election_id}, {"cleaning", ds.cleaning}, {"benford", rep}}.dump(2)
                          << '\n';
            } else {
                std::cout << "stations used " << rep.n_used << ", skipped (O < 10) " << rep.n_skipped << '\n';
                std::cout << "digit observed expected\n";
                for (std::size_t d = 0; d < 10; ++d) {
                    std::printf("%5zu %8lld %8.1f\n", d, static_cast<long long>(rep.counts[d]),
                                rep.expected[d] * static_cast<double>(rep.n_used));
                }
                std::cout << "chi2 (df 9) = " << rep.chi2;
                if (rep.p_value) {
                    std::cout << ", p = " << *rep.p_value << '\n';
                } else {
                    std::cout << ", insufficient data (< " << benford_min_sample << " stations)\n";
                }
            }
            return ok;
        }

        if (*zscore_cmd) {
            const auto ds = load(zscore_path, in);
            const auto table = z_table(ds, threshold, g.threads);
            const auto summary = summarize(table);
            if (const auto p = plot_path(zscore_qq, g, "qq")) {
                write_with(*p, [&](std::ostream &o) { plots::write_qq_csv(o, normal_plot_data(table)); });
                render_single(*p, g, "qq");
            }
            std::vector<ZScoreEntry> outliers;
            for (auto idx : outlier_indices(table)) {
                outliers.push_back(table.entries[idx]);
            }
            if (g.json) {
                std::cout << json{{"election_id", ds.election_id}, {"cleaning", ds.cleaning}, {"threshold", threshold},
                                  {"summary", summary}, {"kappa", table.kappa}, {"outliers", outliers}}
                                 .dump(2)
                          << '\n';
            } else {
                std::cout << "K = " << summary.K << ", mean(Z) = " << summary.mean << ", var(Z) = " << summary.variance
                          << '\n'
                          << "stations with |Z| > " << threshold << ": " << table.kappa << " (expected "
                          << summary.expected_kappa << ")\n";
                for (const auto &e : outliers) {
                    std::cout << "  " << e.station_id << " (" << e.center_id << ") Z = " << e.z << '\n';
                }
            }
            return ok;
        }

        if (*zeta_cmd) {
            const auto ds = load(zeta_path, in);
            const auto table = z_table(ds, threshold, g.threads);
            const auto series = zeta_series(ds, table, kmin, parse_kmax(kmax), parse_scaling(scaling), g.threads);
            const auto v = verdict(series, run_threshold);
            if (const auto p = plot_path(zeta_csv, g, "zeta")) {
                write_with(*p, [&](std::ostream &o) { plots::write_zeta_csv(o, series); });
                render_single(*p, g, "zeta");
            }
            if (g.json) {
                std::cout << json{{"election_id", ds.election_id}, {"cleaning", ds.cleaning}, {"zeta", series},
                                  {"verdict", v}}
                                 .dump(2)
                          << '\n';
            } else {
                std::cout << "R = " << series.R << ", k in (" << series.k_min << ", " << series.k_max << ")\n"
                          << "fraction outside +/-3.9: " << series.frac_outside_9999 << ", inside +/-2.58: "
                          << series.frac_inside_99 << '\n'
                          << v.rationale << '\n'
                          << "verdict: " << to_string(v.group) << '\n';
            }
            return ok;
        }

        if (*estimate_cmd) {
            const auto ds = load(estimate_path, in);
            const auto table = z_table(ds, threshold, g.threads);
            std::optional<Verdict> v;
            try {
                v = verdict(zeta_series(ds, table, default_k_min, 0, Scaling::population_mean, g.threads));
            } catch (const forensics_error &) {
                // too few stations for a series; the estimate still runs
            }
            const auto grid = beta_grid.empty() ? default_beta_grid() : parse_grid(beta_grid);
            auto est = fraud_estimate(ds, table, grid, v);
            if (resample > 0) {
                attach_resample(est, ds, table, resample, g.seed.value_or(0));
            }
            const auto scen = scenarios_path.empty() ? default_scenarios() : load_scenarios(scenarios_path);
            const auto rows = scenario_table(est, scen);
            if (!g.csv_dir.empty() || !g.svg_dir.empty()) {
                const auto p = *plot_path({}, g, "rho");
                write_with(p, [&](std::ostream &o) { plots::write_rho_csv(o, est); });
                render_single(p, g, "rho");
            }
            if (g.json) {
                std::cout << json{{"election_id", ds.election_id}, {"cleaning", ds.cleaning}, {"estimate", est},
                                  {"scenarios", rows}}
                                 .dump(2)
                          << '\n';
            } else {
                std::cout << "kappa = " << est.kappa << " (expected " << est.expected_kappa << ", excess factor "
                          << est.excess_factor << ")\n"
                          << "R = " << est.R << ", r_kappa = " << est.r_kappa << ", epsilon = " << est.epsilon_hat
                          << '\n';
                for (const auto &p : est.rho_curve) {
                    std::printf("  beta %.2f  rho %.4f\n", p.beta, p.rho);
                }
                if (est.crossover_beta) {
                    std::cout << "rho_beta reaches 0.5 at beta = " << *est.crossover_beta << '\n';
                } else {
                    std::cout << "rho_beta stays above 0.5 for every beta in [0, 1]\n";
                }
                for (const auto &r : rows) {
                    std::cout << "scenario " << r.label << ": " << to_string(r.outcome) << '\n';
                }
                print_lines(est.warnings);
                std::cout << est.assumption << '\n';
            }
            return ok;
        }

        if (*synth_cmd) {
            auto cfg = synth_config.empty() ? synth::GeneratorConfig{} : synth::load_config(synth_config);
            if (g.seed) {
                cfg.seed = *g.seed;
            }
            const auto gen = synth::generate(cfg, g.threads);
            const auto recs = gen.dataset.records();
            write_with(synth_out, [&](std::ostream &o) { write_tallies(o, gen.dataset.election_id, recs); });
            if (!synth_truth.empty()) {
                write_text(synth_truth, json(gen.truth).dump(2) + "\n");
            }
            if (g.json) {
                std::cout << json{{"election_id", gen.truth.election_id},
                                  {"stations", recs.size()},
                                  {"rho_true", gen.truth.rho_true},
                                  {"realized_beta", gen.truth.realized_beta},
                                  {"injected", gen.truth.injected_station_ids.size()}}
                                 .dump(2)
                          << '\n';
            } else {
                std::cout << "wrote " << recs.size() << " stations to " << synth_out << "; rho_true = "
                          << gen.truth.rho_true << ", injected " << gen.truth.injected_station_ids.size() << '\n';
            }
            return ok;
        }

        if (*pipeline_cmd) {
            PipelineOptions opts;
            if (!pipeline_config.empty()) {
                opts = load_pipeline_options(pipeline_config);
            }
            if (pipeline_cmd->count("--threshold")) opts.kappa_threshold = threshold;
            if (pipeline_cmd->count("--kmin")) opts.k_min = kmin;
            if (pipeline_cmd->count("--kmax")) opts.k_max = parse_kmax(kmax);
            if (pipeline_cmd->count("--scaling")) opts.scaling = parse_scaling(scaling);
            if (pipeline_cmd->count("--run-threshold")) opts.run_threshold = run_threshold;
            if (pipeline_cmd->count("--beta-grid")) opts.beta_grid = parse_grid(beta_grid);
            if (pipeline_cmd->count("--scenarios")) opts.scenarios = load_scenarios(scenarios_path);
            if (pipeline_cmd->count("--resample")) opts.resample_replicates = resample;
            if (force) opts.force_estimate = true;
            if (in.keep_manual) opts.exclude_manual = false;
            if (g.seed) opts.seed = *g.seed;
            opts.threads = g.threads;
            if (!in.schema.empty() || !in.delimiter.empty()) {
                const auto po = parse_options(in);
                opts.schema = po.schema;
                opts.delimiter = po.delimiter;
            }

            const bool many = pipeline_paths.size() > 1;
            std::vector<Dossier> dossiers(pipeline_paths.size());
            std::vector<std::optional<ElectionDataset>> datasets(pipeline_paths.size());
            std::vector<std::exception_ptr> failures(pipeline_paths.size());
            {
                std::vector<std::jthread> workers;
                for (std::size_t i = 0; i < pipeline_paths.size(); ++i) {
                    workers.emplace_back([&, i] {
                        try {
                            dossiers[i] = pipeline(pipeline_paths[i], opts);
                            if (dossiers[i].zscore && (!g.csv_dir.empty() || !g.svg_dir.empty())) {
                                datasets[i] = clean(parse_tallies_file(pipeline_paths[i], {opts.delimiter, opts.schema}),
                                                    CleaningOptions{opts.exclude_manual});
                            }
                        } catch (...) {
                            failures[i] = std::current_exception();
                        }
                    });
                }
            }
            for (const auto &f : failures) {
                if (f) {
                    std::rethrow_exception(f);
                }
            }

            int rc = ok;
            for (std::size_t i = 0; i < dossiers.size(); ++i) {
                const auto &d = dossiers[i];
                const std::string stem = fs::path(pipeline_paths[i]).stem().string();
                const std::string text = serialize(d);
                if (!pipeline_out.empty()) {
                    write_text(many ? fs::path(pipeline_out) / (stem + ".dossier.json") : fs::path(pipeline_out), text);
                }
                emit_plot_data(d, datasets[i] ? &*datasets[i] : nullptr, g, many ? stem + "." : std::string{});
                if (g.json && !many) {
                    std::cout << text;
                } else if (!g.json) {
                    print_lines(d.summary.lines);
                }
                if (!d.errors.empty()) {
                    for (const auto &e : d.errors) {
                        std::cerr << "error [" << e.stage << "] " << e.kind << ": " << e.message << '\n';
                    }
                    rc = data_error;
                }
            }
            if (g.json && many) {
                json arr = json::array();
                for (const auto &d : dossiers) {
                    arr.push_back(d);
                }
                std::cout << arr.dump(2) << '\n';
            }
            return rc;
        }

        if (*compare_cmd) {
            std::vector<Dossier> dossiers;
            for (const auto &p : dossier_paths) {
                dossiers.push_back(load_dossier(p));
            }
            const auto cmp = compare(dossiers);
            if (!g.csv_dir.empty()) {
                fs::create_directories(g.csv_dir);
                for (std::size_t i = 0; i < cmp.series.size(); ++i) {
                    const auto csv = fs::path(g.csv_dir) / (cmp.rows[i].election_id + ".zeta.csv");
                    write_with(csv, [&](std::ostream &o) { plots::write_zeta_csv(o, cmp.series[i]); });
                }
            }
            if (g.json) {
                std::cout << json(cmp).dump(2) << '\n';
            } else {
                std::cout << "common range " << cmp.k_min << " < k < " << cmp.k_max << '\n';
                for (const auto &r : cmp.rows) {
                    std::cout << "  " << r.election_id << ": K = " << r.K << ", longest run " << r.longest_excursion
                              << ", min p " << r.min_p_value << ", " << r.group << '\n';
                }
                for (const auto &grp : cmp.groups) {
                    std::cout << grp.group << ':';
                    for (const auto &m : grp.members) {
                        std::cout << ' ' << m;
                    }
                    std::cout << '\n';
                }
            }
            return ok;
        }
    } catch (const malformed_row_error &e) {
        std::cerr << "error [ingest] " << to_string(e.kind()) << ": " << e.what() << '\n';
        return data_error;
    } catch (const forensics_error &e) {
        std::cerr << "error: " << to_string(e.kind()) << ": " << e.what() << '\n';
        return exit_for(e);
    } catch (const std::exception &e) {
        std::cerr << "internal error: " << e.what() << '\n';
        return internal;
    }
    return usage;
}
