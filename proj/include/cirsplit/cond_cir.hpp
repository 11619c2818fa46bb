#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <vector>

#include "cirsplit/reaction_network.hpp"

namespace cirsplit {

/// Frozen-coordinate decomposition of one species' Langevin equation:
/// dX_i = (a_tilde - b_tilde X_i) dt
///        + (sum_{j in r_in} c_in dW_j) sqrt(X_i) + sum_{j in r_out} c_out dW_j.
/// r_in holds reactions whose propensity carries X_i linearly, r_out those
/// that move X_i without depending on it. Reactions with zero net
/// stoichiometry for the species contribute nothing and are omitted.
struct CondCirCoefficients {
    std::size_t species = 0;
    double a_tilde = 0.0;
    double b_tilde = 0.0;
    std::vector<std::size_t> r_in;
    std::vector<std::size_t> r_out;
    std::vector<double> c_in;  // aligned with r_in
    std::vector<double> c_out; // aligned with r_out
    double c_in_sq_sum = 0.0;  // sum of c_in^2

    /// c-coefficient for reaction j; 0 when j moves other species only.
    double c_tilde(std::size_t reaction) const;

    /// Drift of species i at level x_i with the other coordinates frozen.
    double drift_at(double x_i) const { return a_tilde - b_tilde * x_i; }

    /// Diagonal of the diffusion matrix for species i at level x_i.
    double diffusion_at(double x_i) const;
};

/// Decompose species i at the frozen state. Throws not_conditionally_cir
/// when any reaction that moves species i has a propensity that is not
/// affine in x_i (quadratic mass action or a Hill term in x_i itself).
CondCirCoefficients cond_cir_coefficients(const ReactionNetwork& net,
                                          const Eigen::VectorXd& x_frozen,
                                          const Parameters& theta, std::size_t species);

} // namespace cirsplit
