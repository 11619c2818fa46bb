#pragma once

#include <Eigen/Dense>
#include <initializer_list>
#include <vector>

#include "cirsplit/reaction_network.hpp"

namespace cirsplit::testing {

inline Parameters make_theta(std::initializer_list<double> values, std::size_t kinetic = 0) {
    Parameters theta;
    theta.values.resize(static_cast<Eigen::Index>(values.size()));
    Eigen::Index i = 0;
    for (double v : values) theta.values(i++) = v;
    theta.kinetic_count = kinetic == 0 ? values.size() : kinetic;
    return theta;
}

inline Eigen::VectorXd make_state(std::initializer_list<double> values) {
    Eigen::VectorXd x(static_cast<Eigen::Index>(values.size()));
    Eigen::Index i = 0;
    for (double v : values) x(i++) = v;
    return x;
}

/// Single species, single reaction X -> 0 with rate theta[0].
inline ReactionNetwork pure_decay() {
    Eigen::MatrixXi nu(1, 1);
    nu << -1;
    std::vector<PropensitySpec> props;
    props.push_back(MassAction{0, {1}});
    return ReactionNetwork({"X"}, nu, std::move(props));
}

/// Single species, 0 -> X at constant rate theta[0].
inline ReactionNetwork pure_birth() {
    Eigen::MatrixXi nu(1, 1);
    nu << 1;
    std::vector<PropensitySpec> props;
    props.push_back(ConstantRate{0});
    return ReactionNetwork({"X"}, nu, std::move(props));
}

/// Autocatalytic 2X -> 3X: quadratic in its own species, so the
/// componentwise square-root decomposition must be rejected.
inline ReactionNetwork autocatalytic() {
    Eigen::MatrixXi nu(1, 1);
    nu << 1;
    std::vector<PropensitySpec> props;
    props.push_back(MassAction{0, {2}});
    return ReactionNetwork({"X"}, nu, std::move(props));
}

/// Linear two-species system dx = A x with
/// A = [[-a11, a12], [a21, -a22]], all propensities mass-action.
/// theta = (a11, a12, a21, a22).
inline ReactionNetwork coupled_linear() {
    Eigen::MatrixXi nu(2, 4);
    // X1 -> 0, X2 -> X2 + X1, X1 -> X1 + X2, X2 -> 0
    nu << -1, 1, 0, 0,
           0, 0, 1, -1;
    std::vector<PropensitySpec> props;
    props.push_back(MassAction{0, {1, 0}});
    props.push_back(MassAction{1, {0, 1}});
    props.push_back(MassAction{2, {1, 0}});
    props.push_back(MassAction{3, {0, 1}});
    return ReactionNetwork({"X1", "X2"}, nu, std::move(props));
}

/// X -> 2X with rate theta[0]; drift is +theta[0] x.
inline ReactionNetwork pure_growth() {
    Eigen::MatrixXi nu(1, 1);
    nu << 1;
    std::vector<PropensitySpec> props;
    props.push_back(MassAction{0, {1}});
    return ReactionNetwork({"X"}, nu, std::move(props));
}

} // namespace cirsplit::testing
