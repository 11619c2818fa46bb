#include "cirsplit/validation.hpp"

#include <cmath>
#include <sstream>

#include <nlohmann/json.hpp>

#include "cirsplit/abc.hpp"
#include "cirsplit/exact.hpp"
#include "cirsplit/flows.hpp"
#include "cirsplit/integrators.hpp"
#include "cirsplit/rng.hpp"
#include "cirsplit/stats.hpp"

namespace cirsplit {

double bernoulli_ode_reference(double z0, double a_tilde, double b_tilde, double c_in_sq_sum,
                               double h, double tol) {
    const double a_half = 0.5 * a_tilde - 0.125 * c_in_sq_sum;
    auto f = [&](double z) { return -0.5 * b_tilde * z + a_half / z; };

    // Cash-Karp embedded pair with step control.
    double t = 0.0;
    double z = z0;
    double dt = h;
    int guard = 0;
    while (t < h) {
        if (++guard > 2000000) throw std::runtime_error("reference integrator stalled");
        if (t + dt > h) dt = h - t;
        const double k1 = f(z);
        const double k2 = f(z + dt * (k1 / 5.0));
        const double k3 = f(z + dt * (3.0 * k1 + 9.0 * k2) / 40.0);
        const double k4 = f(z + dt * (0.3 * k1 - 0.9 * k2 + 1.2 * k3));
        const double k5 = f(z + dt * (-11.0 / 54.0 * k1 + 2.5 * k2 - 70.0 / 27.0 * k3 + 35.0 / 27.0 * k4));
        const double k6 = f(z + dt * (1631.0 / 55296.0 * k1 + 175.0 / 512.0 * k2 + 575.0 / 13824.0 * k3 +
                                      44275.0 / 110592.0 * k4 + 253.0 / 4096.0 * k5));
        const double z5 = z + dt * (37.0 / 378.0 * k1 + 250.0 / 621.0 * k3 + 125.0 / 594.0 * k4 +
                                    512.0 / 1771.0 * k6);
        const double z4 = z + dt * (2825.0 / 27648.0 * k1 + 18575.0 / 48384.0 * k3 +
                                    13525.0 / 55296.0 * k4 + 277.0 / 14336.0 * k5 + 0.25 * k6);
        const double err = std::abs(z5 - z4);
        const double scale = tol * std::max(1.0, std::abs(z));
        if (err <= scale || dt <= 1e-15 * h) {
            t += dt;
            z = z5;
            if (err > 0.0) dt *= std::min(5.0, 0.9 * std::pow(scale / err, 0.2));
            else dt *= 5.0;
        } else {
            dt *= std::max(0.1, 0.9 * std::pow(scale / err, 0.25));
        }
    }
    return z;
}

bool ValidationReport::all_pass() const {
    for (const auto& c : criteria)
        if (!c.pass) return false;
    return true;
}

std::string ValidationReport::to_json() const {
    nlohmann::json doc;
    doc["all_pass"] = all_pass();
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& c : criteria)
        arr.push_back({{"name", c.name}, {"pass", c.pass}, {"detail", c.detail}});
    doc["criteria"] = arr;
    return doc.dump(2);
}

namespace {

CriterionResult check_cir_exact(std::uint64_t seed) {
    const CirParams params{2.0, 1.0, 0.5};
    const double h = 0.01;
    const std::size_t steps = 50;
    const std::size_t n = 20000;
    const double x0 = 1.0;
    const double t_end = h * static_cast<double>(steps);

    // Synthetic coefficients equal to the square-root process itself.
    const double a_tilde = params.alpha * params.beta;
    const double b_tilde = params.beta;
    const double c = params.sigma;
    const double c_sq = c * c;

    std::vector<double> split(n), exact(n);
    for (std::size_t i = 0; i < n; ++i) {
        RngStream rng = RngStream::derived(seed, {21, i});
        double x = x0;
        ClampCounters clamps;
        for (std::size_t k = 0; k < steps; ++k) {
            const double dw = rng.normal(0.0, std::sqrt(h));
            const FlowValue drift = bernoulli_flow_core(std::sqrt(x), a_tilde, b_tilde, c_sq, h);
            if (drift.clamped) ++clamps.radicand;
            const double z = drift.value + 0.5 * c * dw;
            x = z * z;
        }
        split[i] = x;
        RngStream rng2 = RngStream::derived(seed, {22, i});
        exact[i] = cir_exact_sample(params, x0, t_end, rng2);
    }
    const double mean_gap = std::abs(mean(split) - mean(exact));
    const double mean_tol = 4.0 * std::hypot(mean_standard_error(split), mean_standard_error(exact));
    const double var_gap = std::abs(variance(split) - variance(exact));
    const double var_tol =
        4.0 * std::hypot(variance_standard_error(split), variance_standard_error(exact));
    const double ks = ks_distance(split, exact);

    CriterionResult res;
    res.name = "cir-exact";
    res.pass = mean_gap <= mean_tol && var_gap <= var_tol && ks < 0.03;
    std::ostringstream detail;
    detail << "mean gap " << mean_gap << " (tol " << mean_tol << "), var gap " << var_gap
           << " (tol " << var_tol << "), ks " << ks;
    res.detail = detail.str();
    return res;
}

CriterionResult check_ssa_mean(std::uint64_t seed) {
    Eigen::MatrixXi nu(1, 1);
    nu << -1;
    std::vector<PropensitySpec> props;
    props.push_back(MassAction{0, {1}});
    const ReactionNetwork decay({"X"}, nu, std::move(props));
    Parameters theta;
    theta.values = Eigen::VectorXd::Constant(1, 0.1);
    theta.kinetic_count = 1;

    const std::size_t runs = 2000;
    const double t_end = 5.0;
    Eigen::VectorXd x0 = Eigen::VectorXd::Constant(1, 1000.0);
    std::vector<double> finals(runs);
    for (std::size_t i = 0; i < runs; ++i) {
        RngStream rng = RngStream::derived(seed, {23, i});
        finals[i] = gillespie_final_state(decay, x0, theta, t_end, rng)(0);
    }
    const double expected = 1000.0 * std::exp(-0.1 * t_end);
    const double gap = std::abs(mean(finals) - expected);
    const double tol = 4.0 * mean_standard_error(finals);

    CriterionResult res;
    res.name = "ssa-mean";
    res.pass = gap <= tol;
    std::ostringstream detail;
    detail << "mean " << mean(finals) << " vs " << expected << ", gap " << gap << " (tol " << tol << ")";
    res.detail = detail.str();
    return res;
}

CriterionResult check_bernoulli_flow(std::uint64_t seed, double offset) {
    RngStream rng = RngStream::derived(seed, {24});
    double worst = 0.0;
    std::size_t checked = 0;
    for (std::size_t trial = 0; trial < 400 && checked < 200; ++trial) {
        const double a_tilde = rng.uniform(0.0, 5.0);
        const double b_tilde = rng.uniform(-2.0, 3.0);
        const double c_sq = rng.uniform(0.0, 2.0);
        const double z0 = rng.uniform(0.3, 3.0);
        const double h = rng.uniform(0.01, 0.8);
        // Keep the solution away from the singular axis so the reference
        // integrator stays in its domain.
        const FlowValue flow = bernoulli_flow_core(z0, a_tilde, b_tilde, c_sq, h);
        if (flow.clamped || flow.value < 0.05) continue;
        ++checked;
        const double ref = bernoulli_ode_reference(z0, a_tilde, b_tilde, c_sq, h);
        worst = std::max(worst, std::abs(flow.value + offset - ref));
    }
    CriterionResult res;
    res.name = "bernoulli-flow";
    res.pass = checked >= 100 && worst <= 1e-8;
    std::ostringstream detail;
    detail << "checked " << checked << " points, worst gap " << worst;
    res.detail = detail.str();
    return res;
}

CriterionResult check_reduction_identity(std::uint64_t seed) {
    RngStream rng = RngStream::derived(seed, {25});
    const std::size_t cases = 1000;
    double worst = 0.0;
    for (std::size_t c = 0; c < cases; ++c) {
        const Eigen::Index p = 2 + static_cast<Eigen::Index>(rng.raw() % 3);
        UniformBoxPrior prior;
        prior.low = Eigen::VectorXd::Constant(p, -10.0);
        prior.high = Eigen::VectorXd::Constant(p, 10.0);

        ParticleCloud prev;
        prev.particles.resize(5, p);
        for (Eigen::Index i = 0; i < 5; ++i)
            for (Eigen::Index j = 0; j < p; ++j) prev.particles(i, j) = rng.uniform(-3.0, 3.0);
        Eigen::VectorXd w(5);
        for (Eigen::Index i = 0; i < 5; ++i) w(i) = rng.uniform(0.1, 1.0);
        prev.weights = w / w.sum();

        Eigen::MatrixXd sigma = Eigen::MatrixXd::Identity(p, p);
        sigma *= rng.uniform(0.2, 2.0);

        Eigen::VectorXd theta(p), s_dc(p), mu(p);
        for (Eigen::Index j = 0; j < p; ++j) {
            theta(j) = rng.uniform(-3.0, 3.0);
            s_dc(j) = rng.uniform(-2.0, 2.0);
            mu(j) = rng.uniform(-2.0, 2.0);
        }
        Eigen::MatrixXd cov = Eigen::MatrixXd::Identity(p, p) * rng.uniform(0.5, 2.0);
        SyntheticLikelihoodStats stats{mu, cov, mu, cov};

        const double lhs = dc_particle_weight(theta, s_dc, prior, &prev, &sigma, stats).value;
        const double rhs = smc_particle_weight(theta, prior, &prev, &sigma);
        worst = std::max(worst, std::abs(lhs - rhs) / std::max(1.0, std::abs(rhs)));
    }
    CriterionResult res;
    res.name = "reduction-identity";
    res.pass = worst <= 1e-12;
    std::ostringstream detail;
    detail << cases << " cases, worst relative gap " << worst;
    res.detail = detail.str();
    return res;
}

} // namespace

ValidationReport run_validation_suite(std::uint64_t seed, const ValidationTweaks& tweaks) {
    ValidationReport report;
    report.criteria.push_back(check_cir_exact(seed));
    report.criteria.push_back(check_ssa_mean(seed));
    report.criteria.push_back(check_bernoulli_flow(seed, tweaks.bernoulli_offset));
    report.criteria.push_back(check_reduction_identity(seed));
    return report;
}

} // namespace cirsplit
