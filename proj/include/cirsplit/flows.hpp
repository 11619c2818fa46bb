#pragma once

#include <span>

#include "cirsplit/cond_cir.hpp"

namespace cirsplit {

struct FlowValue {
    double value = 0.0;
    bool clamped = false;
};

/// Drift flow of the square-root (Lamperti) variable over a step of
/// length h: the squared variable follows the linear equation
/// u' = (a_tilde - c_sq/4) - b_tilde * u, solved exactly. A negative
/// endpoint (the "complex solution" case) is clamped to zero.
FlowValue bernoulli_flow_core(double z, double a_tilde, double b_tilde, double c_in_sq_sum,
                              double h);

FlowValue bernoulli_flow(double z, const CondCirCoefficients& coeffs, double h);

/// Additive noise flow in the square-root variable:
/// z + (1/2) * sum_k c_in[k] * dw_in[k]. May go negative; it is squared later.
double brownian_flow(double z, const CondCirCoefficients& coeffs, std::span<const double> dw_in);

/// Brownian perturbation of the original variable from reactions that move
/// the species without depending on it: x + sum_k c_out[k] * dw_out[k].
double perturbation_flow(double x, const CondCirCoefficients& coeffs,
                         std::span<const double> dw_out);

struct ComponentStepResult {
    double value = 0.0;
    bool radicand_clamped = false;     // drift-flow endpoint went negative
    bool perturbation_clamped = false; // perturbed level went negative before sqrt
};

/// One componentwise update: perturb, take the square root (clamped at
/// zero), run the drift and noise flows, square. Always nonnegative.
/// dw_in / dw_out are Gaussian increments of variance h aligned with
/// coeffs.r_in / coeffs.r_out.
ComponentStepResult cir_component_step(double x, const CondCirCoefficients& coeffs, double h,
                                       std::span<const double> dw_in,
                                       std::span<const double> dw_out);

} // namespace cirsplit
