#include "cirsplit/exact.hpp"

#include <cmath>

#include "cirsplit/errors.hpp"

namespace cirsplit {

void CirParams::validate() const {
    if (!(alpha > 0.0) || !(beta > 0.0) || !(sigma > 0.0))
        throw std::domain_error("CIR parameters must be positive");
}

double cir_exact_sample(const CirParams& p, double x, double h, RngStream& rng) {
    p.validate();
    if (x < 0.0) throw std::domain_error("CIR state must be nonnegative");
    if (!(h > 0.0)) throw std::domain_error("CIR step must be positive");

    const double decay = std::exp(-p.beta * h);
    const double c = p.sigma * p.sigma * (1.0 - decay) / (4.0 * p.beta);
    const double dof = 4.0 * p.alpha * p.beta / (p.sigma * p.sigma);
    const double noncentrality = x * decay / c;

    const double mixing = static_cast<double>(rng.poisson(0.5 * noncentrality));
    const double shape = 0.5 * dof + mixing;
    const double chi_sq = rng.gamma(shape, 2.0);
    return c * chi_sq;
}

double cir_transition_mean(const CirParams& p, double x, double h) {
    const double decay = std::exp(-p.beta * h);
    return p.alpha + (x - p.alpha) * decay;
}

double cir_transition_variance(const CirParams& p, double x, double h) {
    const double decay = std::exp(-p.beta * h);
    const double s2b = p.sigma * p.sigma / p.beta;
    return x * s2b * (decay - decay * decay) + 0.5 * p.alpha * s2b * (1.0 - decay) * (1.0 - decay);
}

const Eigen::VectorXd& SsaPath::state_at(double t) const {
    if (states.empty()) throw config_error("empty jump path");
    std::size_t lo = 0, hi = times.size();
    while (lo + 1 < hi) {
        const std::size_t mid = (lo + hi) / 2;
        if (times[mid] <= t) lo = mid;
        else hi = mid;
    }
    return states[lo];
}

namespace {

template <typename OnEvent>
void run_ssa(const ReactionNetwork& net, const Eigen::VectorXd& x0, const Parameters& theta,
             double t_end, RngStream& rng, OnEvent&& on_event) {
    validate_parameters(net, theta);
    Eigen::VectorXd state = x0;
    const auto& nu = net.stoichiometry();
    double t = 0.0;
    for (;;) {
        const Eigen::VectorXd a = evaluate_propensities(net, state, theta);
        const double total = a.sum();
        if (total <= 0.0) return; // absorbed
        t += rng.exponential(total);
        if (t >= t_end) return;
        const std::size_t j = rng.categorical({a.data(), static_cast<std::size_t>(a.size())});
        for (Eigen::Index i = 0; i < state.size(); ++i)
            state(i) += nu(i, static_cast<Eigen::Index>(j));
        on_event(t, state);
    }
}

} // namespace

SsaPath gillespie_ssa(const ReactionNetwork& net, const Eigen::VectorXd& x0,
                      const Parameters& theta, double t_end, RngStream& rng) {
    SsaPath path;
    path.times.push_back(0.0);
    path.states.push_back(x0);
    run_ssa(net, x0, theta, t_end, rng, [&](double t, const Eigen::VectorXd& s) {
        path.times.push_back(t);
        path.states.push_back(s);
    });
    return path;
}

Eigen::VectorXd gillespie_final_state(const ReactionNetwork& net, const Eigen::VectorXd& x0,
                                      const Parameters& theta, double t_end, RngStream& rng) {
    Eigen::VectorXd last = x0;
    run_ssa(net, x0, theta, t_end, rng, [&](double, const Eigen::VectorXd& s) { last = s; });
    return last;
}

} // namespace cirsplit
