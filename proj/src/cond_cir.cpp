#include "cirsplit/cond_cir.hpp"

#include <cmath>

#include "cirsplit/errors.hpp"

namespace cirsplit {

double CondCirCoefficients::c_tilde(std::size_t reaction) const {
    for (std::size_t k = 0; k < r_in.size(); ++k)
        if (r_in[k] == reaction) return c_in[k];
    for (std::size_t k = 0; k < r_out.size(); ++k)
        if (r_out[k] == reaction) return c_out[k];
    return 0.0;
}

double CondCirCoefficients::diffusion_at(double x_i) const {
    double out_sq = 0.0;
    for (double c : c_out) out_sq += c * c;
    return c_in_sq_sum * x_i + out_sq;
}

CondCirCoefficients cond_cir_coefficients(const ReactionNetwork& net,
                                          const Eigen::VectorXd& x_frozen,
                                          const Parameters& theta, std::size_t species) {
    if (species >= net.species_count()) throw config_error("species index out of range");
    if (static_cast<std::size_t>(x_frozen.size()) != net.species_count())
        throw config_error("state dimension does not match the network");

    CondCirCoefficients out;
    out.species = species;
    const auto& nu = net.stoichiometry();
    const auto i = static_cast<Eigen::Index>(species);

    for (std::size_t j = 0; j < net.reaction_count(); ++j) {
        const int nu_ij = nu(i, static_cast<Eigen::Index>(j));
        if (nu_ij == 0) continue; // does not move species i

        const auto& spec = net.propensities()[j];
        // Degree of x_i in this propensity, and the propensity with the
        // x_i factor stripped (frozen coordinates substituted).
        int degree = 0;
        double stripped = 0.0;
        if (const auto* ma = std::get_if<MassAction>(&spec)) {
            degree = ma->orders[species];
            if (degree >= 2)
                throw not_conditionally_cir("propensity quadratic in its own species");
            stripped = theta[ma->rate_index];
            for (std::size_t k = 0; k < ma->orders.size(); ++k) {
                if (k == species || ma->orders[k] == 0) continue;
                const double xk = x_frozen(static_cast<Eigen::Index>(k));
                stripped *= (ma->orders[k] == 1) ? xk : 0.5 * xk * (xk - 1.0);
            }
        } else if (const auto* hp = std::get_if<HillProduction>(&spec)) {
            if (hp->repressor_species == species)
                throw not_conditionally_cir("Hill propensity in its own species");
            degree = 0;
            const double k = theta[hp->half_sat_index];
            const double n = theta[hp->exponent_index];
            const double p = x_frozen(static_cast<Eigen::Index>(hp->repressor_species));
            const double kn = std::pow(k, n);
            stripped = theta[hp->basal_index] + theta[hp->amplitude_index] * kn / (kn + std::pow(p, n));
        } else {
            degree = 0;
            stripped = theta[std::get<ConstantRate>(spec).rate_index];
        }

        const double c = static_cast<double>(nu_ij) * std::sqrt(std::max(0.0, stripped));
        if (degree == 1) {
            out.r_in.push_back(j);
            out.c_in.push_back(c);
            out.c_in_sq_sum += c * c;
            out.b_tilde -= static_cast<double>(nu_ij) * stripped;
        } else {
            out.r_out.push_back(j);
            out.c_out.push_back(c);
            out.a_tilde += static_cast<double>(nu_ij) * stripped;
        }
    }
    return out;
}

} // namespace cirsplit
