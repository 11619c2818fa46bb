#include "cirsplit/reaction_network.hpp"

#include <cmath>
#include <numeric>

#include <nlohmann/json.hpp>

#include "cirsplit/errors.hpp"

namespace cirsplit {

namespace {

double combinatorial_factor(double x, int order) {
    switch (order) {
        case 0: return 1.0;
        case 1: return x;
        case 2: return 0.5 * x * (x - 1.0);
        default: throw config_error("mass-action order above 2 is not supported");
    }
}

double hill_value(const HillProduction& h, const Eigen::VectorXd& x, const Parameters& theta) {
    const double alpha0 = theta[h.basal_index];
    const double alpha = theta[h.amplitude_index];
    const double k = theta[h.half_sat_index];
    const double n = theta[h.exponent_index];
    const double p = x(static_cast<Eigen::Index>(h.repressor_species));
    const double kn = std::pow(k, n);
    const double pn = std::pow(p, n);
    return alpha0 + alpha * kn / (kn + pn);
}

} // namespace

ReactionNetwork::ReactionNetwork(std::vector<std::string> species, Eigen::MatrixXi stoichiometry,
                                 std::vector<PropensitySpec> propensities, ModelId id)
    : species_(std::move(species)), nu_(std::move(stoichiometry)),
      propensities_(std::move(propensities)), id_(id) {
    const auto d = static_cast<Eigen::Index>(species_.size());
    const auto r = static_cast<Eigen::Index>(propensities_.size());
    if (nu_.rows() != d || nu_.cols() != r)
        throw config_error("stoichiometry must be species x reactions");
    for (const auto& spec : propensities_) {
        if (const auto* ma = std::get_if<MassAction>(&spec)) {
            if (ma->orders.size() != species_.size())
                throw config_error("mass-action order vector must have one entry per species");
            int total = 0;
            for (int o : ma->orders) {
                if (o < 0) throw config_error("mass-action orders must be nonnegative");
                total += o;
            }
            if (total > 2) throw config_error("mass-action total order above 2 is not supported");
        } else if (const auto* hp = std::get_if<HillProduction>(&spec)) {
            if (hp->repressor_species >= species_.size())
                throw config_error("Hill repressor species out of range");
        }
    }
}

Eigen::VectorXd evaluate_propensities(const ReactionNetwork& net, const Eigen::VectorXd& x,
                                      const Parameters& theta) {
    if (static_cast<std::size_t>(x.size()) != net.species_count())
        throw config_error("state dimension does not match the network");
    for (Eigen::Index i = 0; i < x.size(); ++i)
        if (x(i) < 0.0) throw std::domain_error("negative state entry in propensity evaluation");

    const auto r = net.reaction_count();
    Eigen::VectorXd a(static_cast<Eigen::Index>(r));
    for (std::size_t j = 0; j < r; ++j) {
        const auto& spec = net.propensities()[j];
        double v = 0.0;
        if (const auto* ma = std::get_if<MassAction>(&spec)) {
            if (ma->rate_index >= theta.size()) throw config_error("rate index out of range");
            v = theta[ma->rate_index];
            for (std::size_t i = 0; i < ma->orders.size(); ++i)
                if (ma->orders[i] != 0) v *= combinatorial_factor(x(static_cast<Eigen::Index>(i)), ma->orders[i]);
        } else if (const auto* hp = std::get_if<HillProduction>(&spec)) {
            v = hill_value(*hp, x, theta);
        } else {
            v = theta[std::get<ConstantRate>(spec).rate_index];
        }
        a(static_cast<Eigen::Index>(j)) = std::max(0.0, v);
    }
    return a;
}

Eigen::VectorXd cle_drift(const ReactionNetwork& net, const Eigen::VectorXd& x,
                          const Parameters& theta) {
    const Eigen::VectorXd a = evaluate_propensities(net, x, theta);
    return net.stoichiometry().cast<double>() * a;
}

Eigen::MatrixXd cle_diffusion_columns(const ReactionNetwork& net, const Eigen::VectorXd& x,
                                      const Parameters& theta) {
    const Eigen::VectorXd a = evaluate_propensities(net, x, theta);
    Eigen::MatrixXd cols = net.stoichiometry().cast<double>();
    for (Eigen::Index j = 0; j < cols.cols(); ++j) cols.col(j) *= std::sqrt(a(j));
    return cols;
}

void validate_parameters(const ReactionNetwork& net, const Parameters& theta) {
    for (const auto& spec : net.propensities()) {
        if (const auto* ma = std::get_if<MassAction>(&spec)) {
            if (ma->rate_index >= theta.size()) throw config_error("rate index out of range");
            if (!(theta[ma->rate_index] >= 0.0)) throw config_error("kinetic rate must be nonnegative");
        } else if (const auto* hp = std::get_if<HillProduction>(&spec)) {
            const std::size_t idx[] = {hp->basal_index, hp->amplitude_index, hp->half_sat_index,
                                       hp->exponent_index};
            for (std::size_t i : idx) {
                if (i >= theta.size()) throw config_error("Hill parameter index out of range");
                if (!(theta[i] >= 0.0)) throw config_error("Hill parameters must be nonnegative");
            }
            if (!(theta[hp->half_sat_index] > 0.0) || !(theta[hp->exponent_index] > 0.0))
                throw config_error("Hill half-saturation and exponent must be positive");
        } else {
            const auto& c = std::get<ConstantRate>(spec);
            if (c.rate_index >= theta.size()) throw config_error("rate index out of range");
            if (!(theta[c.rate_index] >= 0.0)) throw config_error("constant rate must be nonnegative");
        }
    }
}

ReactionNetwork repressilator() {
    const std::size_t d = 6; // (M1, P1, M2, P2, M3, P3)
    const std::size_t r = 12;
    Eigen::MatrixXi nu = Eigen::MatrixXi::Zero(d, r);
    std::vector<PropensitySpec> props;
    props.reserve(r);
    // theta = (alpha0, alpha, K, n, beta, unit_rate)
    constexpr std::size_t kAlpha0 = 0, kAlpha = 1, kK = 2, kN = 3, kBeta = 4, kUnit = 5;
    for (std::size_t i = 0; i < 3; ++i) {
        const std::size_t m = 2 * i;     // M_i
        const std::size_t p = 2 * i + 1; // P_i
        const std::size_t rep_gene = (i + 2) % 3; // repressed by P of the previous gene in the cycle
        const std::size_t rep = 2 * rep_gene + 1; // M1<-P3, M2<-P1, M3<-P2
        const std::size_t j0 = 4 * i;

        nu(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(j0)) = 1; // 0 -> M_i
        props.push_back(HillProduction{kAlpha0, kAlpha, kK, kN, rep});

        nu(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(j0 + 1)) = -1; // M_i -> 0
        MassAction m_decay{kUnit, std::vector<int>(d, 0)};
        m_decay.orders[m] = 1;
        props.push_back(m_decay);

        nu(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(j0 + 2)) = 1; // M_i -> M_i + P_i
        MassAction translate{kBeta, std::vector<int>(d, 0)};
        translate.orders[m] = 1;
        props.push_back(translate);

        nu(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(j0 + 3)) = -1; // P_i -> 0
        MassAction p_decay{kBeta, std::vector<int>(d, 0)};
        p_decay.orders[p] = 1;
        props.push_back(p_decay);
    }
    return ReactionNetwork({"M1", "P1", "M2", "P2", "M3", "P3"}, nu, std::move(props),
                           ModelId::Repressilator);
}

ReactionNetwork lotka_volterra() {
    Eigen::MatrixXi nu(2, 3);
    // X1 -> 2X1, X1 + X2 -> 2X2, X2 -> 0
    nu << 1, -1, 0,
          0, 1, -1;
    std::vector<PropensitySpec> props;
    props.push_back(MassAction{0, {1, 0}});
    props.push_back(MassAction{1, {1, 1}});
    props.push_back(MassAction{2, {0, 1}});
    return ReactionNetwork({"X1", "X2"}, nu, std::move(props), ModelId::LotkaVolterra);
}

ReactionNetwork two_pool() {
    Eigen::MatrixXi nu(2, 4);
    // X1 -> 0, X2 -> 0, X1 -> X2, X2 -> X1
    nu << -1, 0, -1, 1,
           0, -1, 1, -1;
    std::vector<PropensitySpec> props;
    props.push_back(MassAction{0, {1, 0}});
    props.push_back(MassAction{1, {0, 1}});
    props.push_back(MassAction{2, {1, 0}});
    props.push_back(MassAction{3, {0, 1}});
    return ReactionNetwork({"X1", "X2"}, nu, std::move(props), ModelId::TwoPool);
}

ReactionNetwork network_from_json(const std::string& json_text) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(json_text);
    } catch (const nlohmann::json::parse_error& e) {
        throw config_error(std::string("network JSON parse failure: ") + e.what());
    }
    if (!doc.contains("species") || !doc.contains("reactions"))
        throw config_error("network JSON needs 'species' and 'reactions'");

    std::vector<std::string> species = doc["species"].get<std::vector<std::string>>();
    const auto d = species.size();
    const auto& reactions = doc["reactions"];
    const auto r = reactions.size();
    Eigen::MatrixXi nu = Eigen::MatrixXi::Zero(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(r));
    std::vector<PropensitySpec> props;
    props.reserve(r);

    for (std::size_t j = 0; j < r; ++j) {
        const auto& rx = reactions[j];
        const auto minus = rx.at("nu_minus").get<std::vector<int>>();
        const auto plus = rx.at("nu_plus").get<std::vector<int>>();
        if (minus.size() != d || plus.size() != d)
            throw config_error("reaction stoichiometry length mismatch");
        for (std::size_t i = 0; i < d; ++i)
            nu(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = plus[i] - minus[i];

        const auto& ps = rx.at("propensity");
        const std::string kind = ps.at("kind").get<std::string>();
        if (kind == "mass_action") {
            MassAction ma;
            ma.rate_index = ps.at("rate_index").get<std::size_t>();
            ma.orders = ps.contains("orders") ? ps["orders"].get<std::vector<int>>() : minus;
            props.push_back(ma);
        } else if (kind == "hill_production") {
            HillProduction hp;
            hp.basal_index = ps.at("basal_index").get<std::size_t>();
            hp.amplitude_index = ps.at("amplitude_index").get<std::size_t>();
            hp.half_sat_index = ps.at("half_sat_index").get<std::size_t>();
            hp.exponent_index = ps.at("exponent_index").get<std::size_t>();
            hp.repressor_species = ps.at("repressor_species").get<std::size_t>();
            props.push_back(hp);
        } else if (kind == "constant") {
            props.push_back(ConstantRate{ps.at("rate_index").get<std::size_t>()});
        } else {
            throw config_error("unknown propensity kind: " + kind);
        }
    }
    return ReactionNetwork(std::move(species), nu, std::move(props), ModelId::Generic);
}

} // namespace cirsplit
