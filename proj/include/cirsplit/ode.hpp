#pragma once

#include <Eigen/Dense>
#include <span>
#include <vector>

#include "cirsplit/reaction_network.hpp"

namespace cirsplit {

/// Langevin drift without state-sign checks or propensity clamping, for
/// deterministic integrators whose intermediate stages may leave the
/// nonnegative orthant.
Eigen::VectorXd ode_drift(const ReactionNetwork& net, const Eigen::VectorXd& x,
                          const Parameters& theta);

/// Exact componentwise flows of the drift, each component affine in its own
/// coordinate given the others, composed symmetrically over the given
/// species blocks: half-steps outward, full step for the last block.
/// Throws when a component's drift is not affine in its own coordinate.
Eigen::VectorXd cond_linear_ode_step(const ReactionNetwork& net, const Eigen::VectorXd& x,
                                     const Parameters& theta, double h,
                                     std::span<const std::vector<std::size_t>> blocks);

/// Default blocks: one per species for generic networks, the
/// (mRNA block, protein block) pairing for the oscillator.
Eigen::VectorXd cond_linear_ode_step(const ReactionNetwork& net, const Eigen::VectorXd& x,
                                     const Parameters& theta, double h);

std::vector<std::vector<std::size_t>> default_ode_blocks(const ReactionNetwork& net);

/// Classical fourth-order Runge-Kutta on the drift; comparison baseline.
Eigen::VectorXd rk4_step(const ReactionNetwork& net, const Eigen::VectorXd& x,
                         const Parameters& theta, double h);

} // namespace cirsplit
