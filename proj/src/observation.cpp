#include "cirsplit/observation.hpp"

#include <cmath>

#include "cirsplit/errors.hpp"
#include "cirsplit/stats.hpp"

namespace cirsplit {

Eigen::MatrixXd ObservationModel::selection_matrix(std::size_t d) const {
    Eigen::MatrixXd l = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(observed.size()),
                                              static_cast<Eigen::Index>(d));
    for (std::size_t k = 0; k < observed.size(); ++k)
        l(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(observed[k])) = 1.0;
    return l;
}

Eigen::VectorXd ObservationModel::project(const Eigen::VectorXd& x) const {
    Eigen::VectorXd y(static_cast<Eigen::Index>(observed.size()));
    for (std::size_t k = 0; k < observed.size(); ++k)
        y(static_cast<Eigen::Index>(k)) = x(static_cast<Eigen::Index>(observed[k]));
    return y;
}

void ObservationModel::validate(std::size_t species_count) const {
    if (observed.empty()) throw config_error("observation model selects no species");
    for (std::size_t k = 0; k < observed.size(); ++k) {
        if (observed[k] >= species_count) throw config_error("observed species out of range");
        for (std::size_t m = k + 1; m < observed.size(); ++m)
            if (observed[k] == observed[m]) throw config_error("observed species repeated");
    }
    if (has_noise) {
        const auto d_o = static_cast<Eigen::Index>(observed.size());
        if (noise_cov.rows() != d_o || noise_cov.cols() != d_o)
            throw config_error("noise covariance dimension mismatch");
        if (!noise_cov.isApprox(noise_cov.transpose(), 1e-12))
            throw config_error("noise covariance must be symmetric");
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(noise_cov);
        if (es.eigenvalues().minCoeff() < -1e-12)
            throw config_error("noise covariance must be positive semidefinite");
    }
}

ObservationModel ObservationModel::iso_noise(std::vector<std::size_t> observed, double sigma_err) {
    ObservationModel m;
    const auto d_o = static_cast<Eigen::Index>(observed.size());
    m.observed = std::move(observed);
    m.has_noise = true;
    m.noise_cov = sigma_err * sigma_err * Eigen::MatrixXd::Identity(d_o, d_o);
    return m;
}

ObservationModel ObservationModel::noiseless(std::vector<std::size_t> observed) {
    ObservationModel m;
    m.observed = std::move(observed);
    m.has_noise = false;
    return m;
}

Eigen::MatrixXd Dataset::records_after_start() const {
    if (records.rows() <= 1) return Eigen::MatrixXd(0, records.cols());
    return records.bottomRows(records.rows() - 1);
}

Dataset observe(const Trajectory& traj, const ObservationModel& model, RngStream& rng) {
    model.validate(static_cast<std::size_t>(traj.states.cols()));
    const Eigen::MatrixXd obs = traj.observation_states();
    const auto rows = obs.rows();
    const auto d_o = static_cast<Eigen::Index>(model.output_dim());

    Eigen::MatrixXd noise_chol;
    if (model.has_noise) {
        Eigen::LLT<Eigen::MatrixXd> llt(model.noise_cov);
        if (llt.info() == Eigen::Success) {
            noise_chol = llt.matrixL();
        } else {
            // PSD but rank-deficient (e.g. the zero matrix): eigen factor.
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(model.noise_cov);
            noise_chol = es.eigenvectors() *
                         es.eigenvalues().cwiseMax(0.0).cwiseSqrt().asDiagonal();
        }
    }

    Dataset ds;
    ds.times.resize(static_cast<std::size_t>(rows));
    ds.records.resize(rows, d_o);
    for (Eigen::Index l = 0; l < rows; ++l) {
        ds.times[static_cast<std::size_t>(l)] = traj.grid.obs_time(static_cast<std::size_t>(l));
        Eigen::VectorXd y = model.project(obs.row(l).transpose());
        if (model.has_noise) {
            Eigen::VectorXd z(d_o);
            for (Eigen::Index k = 0; k < d_o; ++k) z(k) = rng.gauss();
            y += noise_chol * z;
        }
        ds.records.row(l) = y.transpose();
    }
    return ds;
}

double obs_log_density(const Eigen::VectorXd& y, const Eigen::VectorXd& mean,
                       const Eigen::MatrixXd& cov) {
    return mvn_log_density(y, mean, cov);
}

} // namespace cirsplit
