#include "cirsplit/flows.hpp"

#include <cmath>

#include "cirsplit/errors.hpp"

namespace cirsplit {

FlowValue bernoulli_flow_core(double z, double a_tilde, double b_tilde, double c_in_sq_sum,
                              double h) {
    const double a = a_tilde - 0.25 * c_in_sq_sum;
    const double u0 = z * z;
    double u;
    if (std::abs(b_tilde) < 1e-10) {
        u = u0 + a * h; // reversion-free limit
    } else {
        u = u0 * std::exp(-b_tilde * h) - (a / b_tilde) * std::expm1(-b_tilde * h);
    }
    if (u < 0.0) return {0.0, true};
    return {std::sqrt(u), false};
}

FlowValue bernoulli_flow(double z, const CondCirCoefficients& coeffs, double h) {
    return bernoulli_flow_core(z, coeffs.a_tilde, coeffs.b_tilde, coeffs.c_in_sq_sum, h);
}

double brownian_flow(double z, const CondCirCoefficients& coeffs, std::span<const double> dw_in) {
    if (dw_in.size() != coeffs.c_in.size()) throw config_error("brownian_flow: increment count");
    double s = 0.0;
    for (std::size_t k = 0; k < dw_in.size(); ++k) s += coeffs.c_in[k] * dw_in[k];
    return z + 0.5 * s;
}

double perturbation_flow(double x, const CondCirCoefficients& coeffs,
                         std::span<const double> dw_out) {
    if (dw_out.size() != coeffs.c_out.size()) throw config_error("perturbation_flow: increment count");
    double s = 0.0;
    for (std::size_t k = 0; k < dw_out.size(); ++k) s += coeffs.c_out[k] * dw_out[k];
    return x + s;
}

ComponentStepResult cir_component_step(double x, const CondCirCoefficients& coeffs, double h,
                                       std::span<const double> dw_in,
                                       std::span<const double> dw_out) {
    ComponentStepResult res;
    double perturbed = perturbation_flow(x, coeffs, dw_out);
    if (perturbed < 0.0) {
        perturbed = 0.0;
        res.perturbation_clamped = true;
    }
    const FlowValue drift = bernoulli_flow(std::sqrt(perturbed), coeffs, h);
    res.radicand_clamped = drift.clamped;
    const double z = brownian_flow(drift.value, coeffs, dw_in);
    res.value = z * z;
    return res;
}

} // namespace cirsplit
