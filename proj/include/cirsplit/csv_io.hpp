#pragma once

#include <Eigen/Dense>
#include <filesystem>
#include <string>
#include <vector>

#include "cirsplit/abc.hpp"
#include "cirsplit/integrators.hpp"
#include "cirsplit/observation.hpp"

namespace cirsplit {

/// Shortest round-trip decimal rendering of a double.
std::string format_double(double v);

/// Generic numeric table with a header row.
struct CsvTable {
    std::vector<std::string> header;
    Eigen::MatrixXd values;
};

void write_csv(const std::filesystem::path& path, const CsvTable& table);
CsvTable read_csv(const std::filesystem::path& path);

/// Header `t,species_1..species_d`; fine or observation resolution.
void write_trajectory_csv(const std::filesystem::path& path, const Trajectory& traj,
                          bool fine_resolution);

/// Header `t,y_1..y_do`.
void write_dataset_csv(const std::filesystem::path& path, const Dataset& dataset);
Dataset read_dataset_csv(const std::filesystem::path& path);

/// Provenance sidecar for a synthetic dataset.
void write_dataset_provenance(const std::filesystem::path& path, const Dataset& dataset);

/// Header `theta_1..theta_p,weight,distance`.
void write_cloud_csv(const std::filesystem::path& path, const ParticleCloud& cloud);
ParticleCloud read_cloud_csv(const std::filesystem::path& path);

/// Per-round diagnostics plus run-level counters as JSON.
void write_diagnostics_json(const std::filesystem::path& path, const AbcRunResult& result,
                            const std::string& label);

/// Clamp counters and divergence flags for a batch of simulations.
struct RunSummary {
    std::string scheme;
    std::uint64_t paths = 0;
    std::uint64_t diverged = 0;
    ClampCounters clamps;
    std::uint64_t seed = 0;
};
void write_run_summary_json(const std::filesystem::path& path,
                            const std::vector<RunSummary>& summaries);

} // namespace cirsplit
