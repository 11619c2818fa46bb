#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <string>
#include <variant>
#include <vector>

namespace cirsplit {

/// Rate-law a_j(x) = theta[rate] * prod_i f(x_i, orders[i]) with the
/// combinatorial factors f(x,0)=1, f(x,1)=x, f(x,2)=x(x-1)/2.
struct MassAction {
    std::size_t rate_index = 0;
    std::vector<int> orders; // one entry per species, total <= 2
};

/// Repressed production a_j(x) = alpha0 + alpha*K^n / (K^n + x_rep^n).
struct HillProduction {
    std::size_t basal_index = 0;     // alpha0
    std::size_t amplitude_index = 0; // alpha
    std::size_t half_sat_index = 0;  // K
    std::size_t exponent_index = 0;  // n
    std::size_t repressor_species = 0;
};

/// Constant influx a_j(x) = theta[rate].
struct ConstantRate {
    std::size_t rate_index = 0;
};

using PropensitySpec = std::variant<MassAction, HillProduction, ConstantRate>;

/// Parameter vector: kinetic rates first, auxiliary entries (Hill shape,
/// measurement scale, ...) after. Index mapping is fixed per network.
struct Parameters {
    Eigen::VectorXd values;
    std::size_t kinetic_count = 0;
    std::vector<std::string> labels;

    double operator[](std::size_t i) const { return values(static_cast<Eigen::Index>(i)); }
    std::size_t size() const { return static_cast<std::size_t>(values.size()); }
};

enum class ModelId { Generic, Repressilator, LotkaVolterra, TwoPool };

/// A chemical reaction network and, through its propensities, the drift and
/// diffusion of its Langevin approximation.
class ReactionNetwork {
public:
    ReactionNetwork(std::vector<std::string> species, Eigen::MatrixXi stoichiometry,
                    std::vector<PropensitySpec> propensities, ModelId id = ModelId::Generic);

    std::size_t species_count() const { return species_.size(); }
    std::size_t reaction_count() const { return propensities_.size(); }
    const Eigen::MatrixXi& stoichiometry() const { return nu_; }
    const std::vector<PropensitySpec>& propensities() const { return propensities_; }
    const std::vector<std::string>& species_labels() const { return species_; }
    ModelId model_id() const { return id_; }

private:
    std::vector<std::string> species_;
    Eigen::MatrixXi nu_; // d x r, net stoichiometry
    std::vector<PropensitySpec> propensities_;
    ModelId id_;
};

/// All reaction propensities at state x. Negative state entries are a
/// domain error; a size mismatch is a configuration error.
Eigen::VectorXd evaluate_propensities(const ReactionNetwork& net, const Eigen::VectorXd& x,
                                      const Parameters& theta);

/// Langevin drift: component i is sum_j nu_ij * a_j(x).
Eigen::VectorXd cle_drift(const ReactionNetwork& net, const Eigen::VectorXd& x,
                          const Parameters& theta);

/// d x r matrix with column j equal to nu_.j * sqrt(a_j(x)); the diffusion
/// matrix of the Langevin equation is this times its transpose.
Eigen::MatrixXd cle_diffusion_columns(const ReactionNetwork& net, const Eigen::VectorXd& x,
                                      const Parameters& theta);

/// Throws config_error when theta is unusable for net (wrong length,
/// nonpositive rates or Hill constants).
void validate_parameters(const ReactionNetwork& net, const Parameters& theta);

// Built-in models. Parameter layouts are documented with each factory.

/// Three-gene oscillator, state (M1, P1, M2, P2, M3, P3).
/// theta = (alpha0, alpha, K, n, beta, unit_rate); unit_rate is the fixed
/// mRNA degradation rate and must stay 1.
ReactionNetwork repressilator();

/// Predator-prey system, state (X1, X2). theta = (theta1, theta2, theta3).
ReactionNetwork lotka_volterra();

/// Decay and transfer between two pools, state (X1, X2).
/// theta = (theta1..theta4, sigma_err); sigma_err is auxiliary.
ReactionNetwork two_pool();

/// Parse {"species": [...], "reactions": [{nu_minus, nu_plus, propensity}]}.
ReactionNetwork network_from_json(const std::string& json_text);

} // namespace cirsplit
