#pragma once

#include <Eigen/Dense>
#include <vector>

#include "cirsplit/reaction_network.hpp"
#include "cirsplit/rng.hpp"

namespace cirsplit {

/// Mean-reverting square-root process dX = beta (alpha - X) dt + sigma sqrt(X) dW.
struct CirParams {
    double alpha = 1.0;
    double beta = 1.0;
    double sigma = 1.0;

    /// Paths stay strictly positive when 2 alpha beta > sigma^2.
    bool feller() const { return 2.0 * alpha * beta > sigma * sigma; }
    void validate() const;
};

/// Exact transition draw over a step of length h starting at x >= 0,
/// realized as a Poisson-mixed gamma (noncentral chi-square with possibly
/// fractional degrees of freedom).
double cir_exact_sample(const CirParams& p, double x, double h, RngStream& rng);

/// Conditional transition mean alpha + (x - alpha) exp(-beta h).
double cir_transition_mean(const CirParams& p, double x, double h);
/// Conditional transition variance.
double cir_transition_variance(const CirParams& p, double x, double h);

/// Exact jump-process path: exponential waiting times at the total
/// propensity, categorical reaction choice, integer state jumps.
struct SsaPath {
    std::vector<double> times;                 // event times, starting at 0
    std::vector<Eigen::VectorXd> states;       // state after each event
    const Eigen::VectorXd& state_at(double t) const;
};

SsaPath gillespie_ssa(const ReactionNetwork& net, const Eigen::VectorXd& x0,
                      const Parameters& theta, double t_end, RngStream& rng);

/// State at t_end without storing the event history.
Eigen::VectorXd gillespie_final_state(const ReactionNetwork& net, const Eigen::VectorXd& x0,
                                      const Parameters& theta, double t_end, RngStream& rng);

} // namespace cirsplit
