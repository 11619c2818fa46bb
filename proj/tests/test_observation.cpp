#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "cirsplit/observation.hpp"
#include "cirsplit/stats.hpp"
#include "test_helpers.hpp"

using namespace cirsplit;
using namespace cirsplit::testing;

namespace {

Trajectory tiny_trajectory() {
    Trajectory traj;
    traj.grid = TimeGrid{0.0, 3, 1.0, 2};
    traj.states.resize(7, 2);
    for (Eigen::Index r = 0; r < 7; ++r) {
        traj.states(r, 0) = static_cast<double>(r);
        traj.states(r, 1) = 10.0 + static_cast<double>(r);
    }
    return traj;
}

} // namespace

TEST_CASE("full noiseless observation is the identity on the observation grid") {
    const Trajectory traj = tiny_trajectory();
    RngStream rng(1);
    const Dataset ds = observe(traj, ObservationModel::noiseless({0, 1}), rng);
    CHECK((ds.records - traj.observation_states()).norm() == doctest::Approx(0.0));
    CHECK(ds.times.size() == 4);
    CHECK(ds.times[3] == doctest::Approx(3.0));
    CHECK(ds.interval_count() == 3);
    CHECK(ds.records_after_start().rows() == 3);
}

TEST_CASE("zero covariance with the noise flag behaves like no noise") {
    const Trajectory traj = tiny_trajectory();
    ObservationModel model;
    model.observed = {0, 1};
    model.has_noise = true;
    model.noise_cov = Eigen::MatrixXd::Zero(2, 2);
    RngStream rng(2);
    const Dataset ds = observe(traj, model, rng);
    CHECK((ds.records - traj.observation_states()).norm() == doctest::Approx(0.0));
}

TEST_CASE("oscillator protein selection") {
    Trajectory traj;
    traj.grid = TimeGrid{0.0, 1, 1.0, 1};
    traj.states.resize(2, 6);
    traj.states << 1, 2, 3, 4, 5, 6,
                   7, 8, 9, 10, 11, 12;
    const ObservationModel model = ObservationModel::iso_noise({1, 3, 5}, 5.0);
    CHECK(model.output_dim() == 3);
    const Eigen::MatrixXd l = model.selection_matrix(6);
    CHECK(l.rows() == 3);
    CHECK(l(0, 1) == 1.0);
    CHECK(l(1, 3) == 1.0);
    CHECK(l(2, 5) == 1.0);
    CHECK(l.sum() == doctest::Approx(3.0));
    const Eigen::VectorXd y = model.project(traj.states.row(0).transpose());
    CHECK(y(0) == 2.0);
    CHECK(y(1) == 4.0);
    CHECK(y(2) == 6.0);
}

TEST_CASE("observation model validation") {
    ObservationModel dup;
    dup.observed = {0, 0};
    CHECK_THROWS(dup.validate(2));
    ObservationModel range;
    range.observed = {5};
    CHECK_THROWS(range.validate(2));
}

TEST_CASE("measurement noise has the requested second moments") {
    Trajectory traj;
    traj.grid = TimeGrid{0.0, 1, 1.0, 1};
    traj.states = Eigen::MatrixXd::Zero(2, 1);
    const double sigma = 5.0;
    const ObservationModel model = ObservationModel::iso_noise({0}, sigma);
    const std::size_t n = 100000;
    std::vector<double> noise(n);
    RngStream rng(3);
    for (std::size_t i = 0; i < n; ++i) noise[i] = observe(traj, model, rng).records(1, 0);
    CHECK(std::abs(mean(noise)) <= 3.0 * mean_standard_error(noise));
    CHECK(std::abs(variance(noise) - sigma * sigma) <= 3.0 * variance_standard_error(noise));
}

TEST_CASE("observation log-density closed forms") {
    const Eigen::VectorXd zero = Eigen::VectorXd::Zero(1);
    const Eigen::MatrixXd unit = Eigen::MatrixXd::Identity(1, 1);
    CHECK(obs_log_density(zero, zero, unit) ==
          doctest::Approx(-0.5 * std::log(2.0 * M_PI)).epsilon(1e-12));

    const double sigma = 2.5;
    Eigen::VectorXd y(1), m(1);
    y << sigma;
    m << 0.0;
    const Eigen::MatrixXd cov = sigma * sigma * unit;
    CHECK(obs_log_density(y, m, cov) ==
          doctest::Approx(-0.5 * std::log(2.0 * M_PI * sigma * sigma) - 0.5).epsilon(1e-12));
    CHECK(obs_log_density(y, m, cov) == doctest::Approx(obs_log_density(m, y, cov)));
}

TEST_CASE("one-dimensional density integrates to one") {
    const Eigen::VectorXd m = Eigen::VectorXd::Constant(1, 0.3);
    const Eigen::MatrixXd cov = Eigen::MatrixXd::Constant(1, 1, 1.7);
    const double lo = 0.3 - 12.0, hi = 0.3 + 12.0;
    const std::size_t cells = 20000;
    const double dx = (hi - lo) / static_cast<double>(cells);
    double integral = 0.0;
    for (std::size_t i = 0; i <= cells; ++i) {
        Eigen::VectorXd y = Eigen::VectorXd::Constant(1, lo + dx * static_cast<double>(i));
        const double f = std::exp(obs_log_density(y, m, cov));
        integral += (i == 0 || i == cells) ? 0.5 * f : f;
    }
    integral *= dx;
    CHECK(integral == doctest::Approx(1.0).epsilon(1e-4));
}

TEST_CASE("near-singular covariance is jittered rather than fatal") {
    Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(2, 2);
    const Eigen::VectorXd y = Eigen::VectorXd::Zero(2);
    CHECK(std::isfinite(obs_log_density(y, y, cov)));
}
