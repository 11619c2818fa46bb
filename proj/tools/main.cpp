#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>

#include <nlohmann/json.hpp>

#include "cirsplit/abc.hpp"
#include "cirsplit/config.hpp"
#include "cirsplit/csv_io.hpp"
#include "cirsplit/errors.hpp"
#include "cirsplit/parallel.hpp"
#include "cirsplit/stats.hpp"
#include "cirsplit/validation.hpp"

namespace fs = std::filesystem;
using namespace cirsplit;

namespace {

struct GlobalOptions {
    std::string config_path;
    std::string scale = "desk";
    std::string out_override;
    std::uint64_t seed_override = 0;
    bool seed_set = false;
    unsigned threads = 1;
};

ExperimentConfig load_config(const GlobalOptions& opts) {
    if (opts.config_path.empty()) throw config_error("--config is required");
    ExperimentConfig cfg = load_experiment_config(opts.config_path, opts.scale);
    if (opts.seed_set) cfg.seed = opts.seed_override;
    if (!opts.out_override.empty()) cfg.out_dir = opts.out_override;
    cfg.abc.threads = opts.threads;
    return cfg;
}

std::string h_tag(double h) {
    std::string s = format_double(h);
    for (char& c : s)
        if (c == '.') c = 'p';
    return s;
}

int cmd_simulate(const GlobalOptions& opts) {
    const ExperimentConfig cfg = load_config(opts);
    const BuiltExperiment built = build_experiment(cfg);
    fs::create_directories(cfg.out_dir);

    RunSummary summary;
    summary.scheme = to_string(built.scheme);
    summary.seed = cfg.seed;
    for (std::size_t p = 0; p < cfg.simulate.paths; ++p) {
        SchemeConfig scheme{built.scheme, derive_seed(cfg.seed, {0x51, p}), {}};
        const Trajectory traj =
            simulate_path(*built.net, scheme, cfg.x0, built.theta_true, cfg.grid);
        const std::string stem = "trajectory_" + std::to_string(p);
        if (cfg.simulate.fine_output)
            write_trajectory_csv(fs::path(cfg.out_dir) / (stem + "_fine.csv"), traj, true);
        write_trajectory_csv(fs::path(cfg.out_dir) / (stem + "_obs.csv"), traj, false);
        summary.paths += 1;
        summary.clamps += traj.clamps;
        if (traj.diverged) ++summary.diverged;
    }
    write_run_summary_json(fs::path(cfg.out_dir) / "run_summary.json", {summary});
    std::cout << "wrote " << cfg.simulate.paths << " trajectories to " << cfg.out_dir << "\n";
    return 0;
}

int cmd_dist_preserve(const GlobalOptions& opts) {
    const ExperimentConfig cfg = load_config(opts);
    const BuiltExperiment built = build_experiment(cfg);
    fs::create_directories(cfg.out_dir);
    const auto& dp = cfg.dist_preserve;

    std::vector<std::string> schemes = dp.schemes;
    if (schemes.empty()) schemes = {to_string(built.scheme), "eum-truncate"};

    const std::size_t component = dp.component;
    if (component >= built.net->species_count()) throw config_error("component out of range");

    auto sample_endpoints = [&](SchemeKind kind, double h, std::uint64_t tag)
        -> std::vector<std::vector<double>> {
        std::vector<std::size_t> capture;
        capture.reserve(dp.times.size());
        for (double t : dp.times) capture.push_back(static_cast<std::size_t>(std::llround(t / h)));
        std::vector<std::vector<double>> samples(dp.times.size(),
                                                 std::vector<double>(dp.paths, 0.0));
        parallel_for(dp.paths, opts.threads, [&](std::size_t p) {
            SchemeConfig scheme{kind, derive_seed(cfg.seed, {tag, p}), {}};
            const CheckpointResult res = simulate_checkpoints(*built.net, scheme, cfg.x0,
                                                              built.theta_true, h, capture);
            for (std::size_t ti = 0; ti < dp.times.size(); ++ti)
                samples[ti][p] = res.states(static_cast<Eigen::Index>(ti),
                                            static_cast<Eigen::Index>(component));
        });
        return samples;
    };

    // Reference: the model's splitting scheme at the finest step.
    std::map<double, std::vector<double>> reference;
    {
        const auto ref = sample_endpoints(built.scheme, dp.ref_h, 0x900);
        for (std::size_t ti = 0; ti < dp.times.size(); ++ti) reference[dp.times[ti]] = ref[ti];
    }

    std::ofstream ks_out;
    if (dp.paths > 1) {
        ks_out.open(fs::path(cfg.out_dir) / "ks_table.csv");
        ks_out << "scheme,h,t,ks_vs_reference,paths\n";
    }

    std::uint64_t tag = 0x901;
    for (const auto& scheme_name : schemes) {
        const SchemeKind kind = scheme_from_string(scheme_name);
        for (double h : dp.h_grid) {
            const auto samples = sample_endpoints(kind, h, tag++);
            for (std::size_t ti = 0; ti < dp.times.size(); ++ti) {
                CsvTable table;
                table.header = {"t", "path", "value"};
                table.values.resize(static_cast<Eigen::Index>(dp.paths), 3);
                for (std::size_t p = 0; p < dp.paths; ++p) {
                    table.values(static_cast<Eigen::Index>(p), 0) = dp.times[ti];
                    table.values(static_cast<Eigen::Index>(p), 1) = static_cast<double>(p);
                    table.values(static_cast<Eigen::Index>(p), 2) = samples[ti][p];
                }
                write_csv(fs::path(cfg.out_dir) / ("samples_" + scheme_name + "_h" + h_tag(h) +
                                                   "_t" + h_tag(dp.times[ti]) + ".csv"),
                          table);
                if (dp.paths > 1) {
                    const double ks = ks_distance(samples[ti], reference[dp.times[ti]]);
                    ks_out << scheme_name << "," << format_double(h) << ","
                           << format_double(dp.times[ti]) << "," << format_double(ks) << ","
                           << dp.paths << "\n";
                }
            }
        }
    }
    std::cout << "end-time samples written to " << cfg.out_dir << "\n";
    return 0;
}

int cmd_phase_portrait(const GlobalOptions& opts) {
    const ExperimentConfig cfg = load_config(opts);
    const BuiltExperiment built = build_experiment(cfg);
    fs::create_directories(cfg.out_dir);
    const auto& pp = cfg.phase_portrait;

    nlohmann::json report = nlohmann::json::array();
    const std::vector<SchemeKind> kinds{built.scheme, SchemeKind::EulerMaruyamaTruncate};
    std::uint64_t tag = 0xA01;
    for (SchemeKind kind : kinds) {
        for (double h : pp.h_grid) {
            const std::size_t steps = static_cast<std::size_t>(std::llround(pp.t_end / h));
            TimeGrid grid{0.0, steps, h, 1};
            std::vector<std::uint64_t> nonfinite(pp.paths, 0), clamped(pp.paths, 0);
            std::vector<ClampCounters> clamp_slots(pp.paths);
            const std::uint64_t scheme_tag = tag++;
            parallel_for(pp.paths, opts.threads, [&](std::size_t p) {
                SchemeConfig scheme{kind, derive_seed(cfg.seed, {scheme_tag, p}), {}};
                if (p < pp.trajectories_per_h) {
                    const Trajectory traj =
                        simulate_path(*built.net, scheme, cfg.x0, built.theta_true, grid);
                    write_trajectory_csv(fs::path(cfg.out_dir) /
                                             ("portrait_" + to_string(kind) + "_h" + h_tag(h) +
                                              "_path" + std::to_string(p) + ".csv"),
                                         traj, true);
                    nonfinite[p] = traj.diverged ? 1 : 0;
                    clamped[p] = traj.clamps.total() > 0 ? 1 : 0;
                    clamp_slots[p] = traj.clamps;
                } else {
                    const EndpointResult res = simulate_endpoint(*built.net, scheme, cfg.x0,
                                                                 built.theta_true, h, steps);
                    nonfinite[p] = res.diverged ? 1 : 0;
                    clamped[p] = res.clamps.total() > 0 ? 1 : 0;
                    clamp_slots[p] = res.clamps;
                }
            });
            std::uint64_t n_nonfinite = 0, n_clamped = 0;
            ClampCounters totals;
            for (std::size_t p = 0; p < pp.paths; ++p) {
                n_nonfinite += nonfinite[p];
                n_clamped += clamped[p];
                totals += clamp_slots[p];
            }
            report.push_back({{"scheme", to_string(kind)},
                              {"h", h},
                              {"paths", pp.paths},
                              {"paths_nonfinite", n_nonfinite},
                              {"paths_with_clamps", n_clamped},
                              {"clamp_total", totals.total()}});
        }
    }
    std::ofstream out(fs::path(cfg.out_dir) / "breakdown.json");
    out << report.dump(2) << "\n";
    std::cout << "phase portraits written to " << cfg.out_dir << "\n";
    return 0;
}

int cmd_infer(const GlobalOptions& opts) {
    const ExperimentConfig cfg = load_config(opts);
    const BuiltExperiment built = build_experiment(cfg);
    fs::create_directories(cfg.out_dir);

    Dataset dataset;
    if (cfg.dataset_file) {
        dataset = read_dataset_csv(*cfg.dataset_file);
    } else {
        const std::uint64_t data_seed = derive_seed(cfg.seed, {0xDA7A});
        SchemeConfig scheme{built.scheme, derive_seed(data_seed, {0}), {}};
        const Trajectory traj =
            simulate_path(*built.net, scheme, cfg.x0, built.theta_true, cfg.grid);
        RngStream measure = RngStream::derived(data_seed, {1});
        dataset = observe(traj, built.problem.materialize_obs(built.theta_true), measure);
        dataset.provenance = DatasetProvenance{data_seed, cfg.theta_true, to_string(built.scheme)};
        write_dataset_csv(fs::path(cfg.out_dir) / "dataset.csv", dataset);
        write_dataset_provenance(fs::path(cfg.out_dir) / "dataset_provenance.json", dataset);
    }

    auto run_one = [&](bool dc, const std::string& label, std::uint64_t master) {
        const AbcRunResult result =
            dc ? run_abc_smc_dc(built.problem, dataset, built.prior, cfg.abc, master)
               : run_abc_smc(built.problem, dataset, built.prior, cfg.abc, master);
        for (const auto& cloud : result.clouds)
            write_cloud_csv(fs::path(cfg.out_dir) /
                                ("cloud_" + label + "_" + std::to_string(cloud.round) + ".csv"),
                            cloud);
        write_diagnostics_json(fs::path(cfg.out_dir) / ("diagnostics_" + label + ".json"), result,
                               label);
        std::cout << label << ": " << result.clouds.size() << " rounds";
        if (result.early_stopped) std::cout << " (stopped early: " << result.stop_reason << ")";
        std::cout << "\n";
    };

    if (cfg.abc_run == "forward" || cfg.abc_run == "both")
        run_one(false, "fwd", derive_seed(cfg.seed, {0xF0}));
    if (cfg.abc_run == "dc" || cfg.abc_run == "both")
        run_one(true, "dc", derive_seed(cfg.seed, {0xDC}));
    return 0;
}

int cmd_validate(const GlobalOptions& opts) {
    std::uint64_t seed = 20240801;
    if (opts.seed_set) seed = opts.seed_override;
    const ValidationReport report = run_validation_suite(seed);
    if (!opts.out_override.empty()) {
        fs::create_directories(opts.out_override);
        std::ofstream out(fs::path(opts.out_override) / "validation_report.json");
        out << report.to_json() << "\n";
    }
    for (const auto& c : report.criteria)
        std::cout << (c.pass ? "PASS" : "FAIL") << "  " << c.name << "  (" << c.detail << ")\n";
    return report.all_pass() ? 0 : 1;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Structure-preserving simulation and likelihood-free inference "
                 "for chemical Langevin equations"};
    app.require_subcommand(1);

    GlobalOptions opts;
    app.add_option("--config", opts.config_path, "experiment config (.toml or .json)");
    app.add_option("--scale", opts.scale, "settings block to apply: desk or paper")
        ->check(CLI::IsMember({"desk", "paper"}));
    app.add_option("--out", opts.out_override, "output directory override");
    auto* seed_opt = app.add_option("--seed", opts.seed_override, "master seed override");
    app.add_option("--threads", opts.threads, "worker threads");
    app.fallthrough();

    auto* simulate = app.add_subcommand("simulate", "simulate seeded trajectories");
    auto* dist = app.add_subcommand("dist-preserve", "end-time distribution sweep across schemes");
    auto* portrait = app.add_subcommand("phase-portrait", "trajectory sweeps and breakdown report");
    auto* infer = app.add_subcommand("infer", "likelihood-free posterior sampling");
    auto* validate = app.add_subcommand("validate", "run the oracle check suite");

    CLI11_PARSE(app, argc, argv);
    opts.seed_set = seed_opt->count() > 0;

    try {
        if (simulate->parsed()) return cmd_simulate(opts);
        if (dist->parsed()) return cmd_dist_preserve(opts);
        if (portrait->parsed()) return cmd_phase_portrait(opts);
        if (infer->parsed()) return cmd_infer(opts);
        if (validate->parsed()) return cmd_validate(opts);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
