#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "cirsplit/integrators.hpp"
#include "cirsplit/rng.hpp"

namespace cirsplit {

/// Partial observation through a row-selection matrix, with optional
/// additive Gaussian measurement noise.
struct ObservationModel {
    std::vector<std::size_t> observed; // selected species, one per output row
    bool has_noise = false;
    Eigen::MatrixXd noise_cov; // d_o x d_o, symmetric PSD; ignored when noiseless

    std::size_t output_dim() const { return observed.size(); }
    Eigen::MatrixXd selection_matrix(std::size_t d) const;
    Eigen::VectorXd project(const Eigen::VectorXd& x) const;
    void validate(std::size_t species_count) const;

    static ObservationModel iso_noise(std::vector<std::size_t> observed, double sigma_err);
    static ObservationModel noiseless(std::vector<std::size_t> observed);
};

struct DatasetProvenance {
    std::uint64_t seed = 0;
    Eigen::VectorXd theta_true;
    std::string scheme;
};

/// Records on the observation grid: times t_0..t_n with one d_o-vector each.
struct Dataset {
    std::vector<double> times;
    Eigen::MatrixXd records; // (n+1) x d_o
    std::optional<DatasetProvenance> provenance;

    std::size_t interval_count() const { return times.empty() ? 0 : times.size() - 1; }
    /// Rows 1..n (the initial record carries no dynamics).
    Eigen::MatrixXd records_after_start() const;
};

/// Project a trajectory onto the observation grid, adding one measurement
/// noise draw per time when the model carries noise.
Dataset observe(const Trajectory& traj, const ObservationModel& model, RngStream& rng);

/// Gaussian observation log-density with a 1e-10 diagonal jitter retry for
/// near-singular covariances.
double obs_log_density(const Eigen::VectorXd& y, const Eigen::VectorXd& mean,
                       const Eigen::MatrixXd& cov);

} // namespace cirsplit
