#include "cirsplit/ode.hpp"

#include <cmath>

#include "cirsplit/cond_cir.hpp"
#include "cirsplit/errors.hpp"
#include "cirsplit/integrators.hpp"

namespace cirsplit {

Eigen::VectorXd ode_drift(const ReactionNetwork& net, const Eigen::VectorXd& x,
                          const Parameters& theta) {
    if (static_cast<std::size_t>(x.size()) != net.species_count())
        throw config_error("state dimension does not match the network");
    const auto r = net.reaction_count();
    Eigen::VectorXd a(static_cast<Eigen::Index>(r));
    for (std::size_t j = 0; j < r; ++j) {
        const auto& spec = net.propensities()[j];
        double v = 0.0;
        if (const auto* ma = std::get_if<MassAction>(&spec)) {
            v = theta[ma->rate_index];
            for (std::size_t i = 0; i < ma->orders.size(); ++i) {
                const double xi = x(static_cast<Eigen::Index>(i));
                if (ma->orders[i] == 1) v *= xi;
                else if (ma->orders[i] == 2) v *= 0.5 * xi * (xi - 1.0);
            }
        } else if (const auto* hp = std::get_if<HillProduction>(&spec)) {
            const double k = theta[hp->half_sat_index];
            const double n = theta[hp->exponent_index];
            const double p = x(static_cast<Eigen::Index>(hp->repressor_species));
            const double kn = std::pow(k, n);
            v = theta[hp->basal_index] + theta[hp->amplitude_index] * kn / (kn + std::pow(p, n));
        } else {
            v = theta[std::get<ConstantRate>(spec).rate_index];
        }
        a(static_cast<Eigen::Index>(j)) = v;
    }
    return net.stoichiometry().cast<double>() * a;
}

namespace {

// Exact flow of dx = (b - a*x) dt over tau, written with the same affine
// decomposition the stochastic scheme uses (a = b_tilde, b = a_tilde).
double affine_flow(double x, double a_tilde, double b_tilde, double tau) {
    if (std::abs(b_tilde) < 1e-10) return x + a_tilde * tau;
    const double decay = std::exp(-b_tilde * tau);
    return a_tilde / b_tilde * (1.0 - decay) + x * decay;
}

void apply_block(const ReactionNetwork& net, Eigen::VectorXd& state, const Parameters& theta,
                 const std::vector<std::size_t>& block, double tau) {
    for (std::size_t i : block) {
        CondCirCoefficients coeffs;
        try {
            coeffs = cond_cir_coefficients(net, state, theta, i);
        } catch (const not_conditionally_cir&) {
            throw std::domain_error("drift is not affine in its own coordinate");
        }
        state(static_cast<Eigen::Index>(i)) =
            affine_flow(state(static_cast<Eigen::Index>(i)), coeffs.a_tilde, coeffs.b_tilde, tau);
    }
}

} // namespace

Eigen::VectorXd cond_linear_ode_step(const ReactionNetwork& net, const Eigen::VectorXd& x,
                                     const Parameters& theta, double h,
                                     std::span<const std::vector<std::size_t>> blocks) {
    if (blocks.empty()) throw config_error("cond_linear_ode_step: no blocks");
    Eigen::VectorXd state = x;
    const std::size_t k = blocks.size();
    if (k == 1) {
        apply_block(net, state, theta, blocks[0], h);
        return state;
    }
    for (std::size_t b = 0; b + 1 < k; ++b) apply_block(net, state, theta, blocks[b], 0.5 * h);
    apply_block(net, state, theta, blocks[k - 1], h);
    for (std::size_t b = k - 1; b-- > 0;) apply_block(net, state, theta, blocks[b], 0.5 * h);
    return state;
}

std::vector<std::vector<std::size_t>> default_ode_blocks(const ReactionNetwork& net) {
    if (net.model_id() == ModelId::Repressilator) return {{0, 2, 4}, {1, 3, 5}};
    std::vector<std::vector<std::size_t>> blocks;
    for (std::size_t i = 0; i < net.species_count(); ++i) blocks.push_back({i});
    return blocks;
}

Eigen::VectorXd cond_linear_ode_step(const ReactionNetwork& net, const Eigen::VectorXd& x,
                                     const Parameters& theta, double h) {
    const auto blocks = default_ode_blocks(net);
    return cond_linear_ode_step(net, x, theta, h, blocks);
}

Eigen::VectorXd rk4_step(const ReactionNetwork& net, const Eigen::VectorXd& x,
                         const Parameters& theta, double h) {
    const Eigen::VectorXd k1 = ode_drift(net, x, theta);
    const Eigen::VectorXd k2 = ode_drift(net, x + 0.5 * h * k1, theta);
    const Eigen::VectorXd k3 = ode_drift(net, x + 0.5 * h * k2, theta);
    const Eigen::VectorXd k4 = ode_drift(net, x + h * k3, theta);
    return x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

// Dispatcher used by simulate_path for the deterministic scheme kinds.
Eigen::VectorXd ode_scheme_step(const ReactionNetwork& net, const Eigen::VectorXd& x,
                                const Parameters& theta, double h, SchemeKind kind) {
    if (kind == SchemeKind::OdeRk4) return rk4_step(net, x, theta, h);
    return cond_linear_ode_step(net, x, theta, h);
}

} // namespace cirsplit
