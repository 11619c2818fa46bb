#pragma once

#include <Eigen/Dense>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "cirsplit/abc.hpp"
#include "cirsplit/integrators.hpp"
#include "cirsplit/reaction_network.hpp"

namespace cirsplit {

/// Settings for the end-time distribution sweep.
struct DistPreserveConfig {
    std::vector<double> h_grid{1e-3, 0.1, 0.5};
    std::vector<double> times{100.0};
    std::size_t paths = 2000;
    std::size_t component = 1; // 0-based species index
    double ref_h = 1e-3;
    std::vector<std::string> schemes; // defaults to {splitting, eum-truncate}
};

struct PhasePortraitConfig {
    std::vector<double> h_grid{1e-3, 0.05, 0.1};
    double t_end = 50.0;
    std::size_t paths = 100;
    std::size_t trajectories_per_h = 3; // written out as CSV
};

struct SimulateConfig {
    std::size_t paths = 1;
    bool fine_output = true;
};

/// One experiment: model, grid, truth, observation, prior and sampler
/// settings, loaded from a TOML or JSON file with per-scale overrides.
struct ExperimentConfig {
    std::string model = "two_pool"; // built-in name or path to a network JSON
    std::string scheme;             // empty = model default splitting scheme
    std::uint64_t seed = 1;
    std::string out_dir = "out";

    Eigen::VectorXd theta_true;
    Eigen::VectorXd x0;
    TimeGrid grid;

    std::vector<std::size_t> observed;
    bool noisy = true;
    bool sigma_known = true;
    double sigma_err = 1.0;
    std::size_t sigma_theta_index = 0;

    Eigen::VectorXd prior_low, prior_high;
    std::vector<std::size_t> infer_indices;

    AbcSettings abc;
    std::string abc_run = "both"; // forward | dc | both
    std::optional<std::string> dataset_file;

    SimulateConfig simulate;
    DistPreserveConfig dist_preserve;
    PhasePortraitConfig phase_portrait;
};

/// Parse a config file (.toml or .json); `scale` merges the matching
/// [scale.<name>] block over the defaults ("" = none).
ExperimentConfig load_experiment_config(const std::filesystem::path& path,
                                        const std::string& scale);

/// Materialized experiment: owns the network, exposes the problem pieces.
struct BuiltExperiment {
    std::shared_ptr<ReactionNetwork> net;
    SimulationProblem problem;
    UniformBoxPrior prior;
    Parameters theta_true;
    SchemeKind scheme = SchemeKind::SplitGenericLieTrotter;
};

BuiltExperiment build_experiment(const ExperimentConfig& config);

/// Model default splitting scheme for the built-ins.
SchemeKind default_scheme(const ReactionNetwork& net);

} // namespace cirsplit
