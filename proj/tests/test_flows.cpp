#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <array>
#include <cmath>

#include "cirsplit/cond_cir.hpp"
#include "cirsplit/exact.hpp"
#include "cirsplit/flows.hpp"
#include "cirsplit/rng.hpp"
#include "cirsplit/stats.hpp"
#include "cirsplit/validation.hpp"
#include "test_helpers.hpp"

using namespace cirsplit;
using namespace cirsplit::testing;

namespace {

CondCirCoefficients synthetic_coeffs(double a_tilde, double b_tilde, std::vector<double> c_in,
                                     std::vector<double> c_out) {
    CondCirCoefficients coeffs;
    coeffs.a_tilde = a_tilde;
    coeffs.b_tilde = b_tilde;
    for (std::size_t j = 0; j < c_in.size(); ++j) {
        coeffs.r_in.push_back(j);
        coeffs.c_in.push_back(c_in[j]);
        coeffs.c_in_sq_sum += c_in[j] * c_in[j];
    }
    for (std::size_t j = 0; j < c_out.size(); ++j) {
        coeffs.r_out.push_back(c_in.size() + j);
        coeffs.c_out.push_back(c_out[j]);
    }
    return coeffs;
}

} // namespace

TEST_CASE("drift flow at zero duration is the identity") {
    const auto coeffs = synthetic_coeffs(1.3, 0.7, {0.5}, {});
    const FlowValue v = bernoulli_flow(2.0, coeffs, 0.0);
    CHECK(v.value == 2.0);
    CHECK_FALSE(v.clamped);
}

TEST_CASE("drift flow reversion-free limit") {
    const auto coeffs = synthetic_coeffs(1.0, 0.0, {}, {});
    const FlowValue v = bernoulli_flow(1.0, coeffs, 0.5);
    CHECK(v.value == doctest::Approx(std::sqrt(1.5)).epsilon(1e-12));
    CHECK_FALSE(v.clamped);

    // crossing the threshold smoothly: tiny reversion close to the limit
    const auto near = synthetic_coeffs(1.0, 1e-12, {}, {});
    CHECK(bernoulli_flow(1.0, near, 0.5).value == doctest::Approx(std::sqrt(1.5)).epsilon(1e-9));
}

TEST_CASE("drift flow clamps on negative endpoint") {
    const auto coeffs = synthetic_coeffs(0.0, 1.0, {2.0}, {});
    const FlowValue v = bernoulli_flow(0.1, coeffs, 1.0);
    CHECK(v.value == 0.0);
    CHECK(v.clamped);
}

TEST_CASE("drift flow matches the adaptive reference integrator") {
    RngStream rng(42);
    std::size_t checked = 0;
    double worst = 0.0;
    while (checked < 300) {
        const double a_tilde = rng.uniform(0.0, 6.0);
        const double b_tilde = rng.uniform(-2.0, 4.0);
        const double c_sq = rng.uniform(0.0, 3.0);
        const double z0 = rng.uniform(0.2, 4.0);
        const double h = rng.uniform(0.005, 1.0);
        const FlowValue flow = bernoulli_flow_core(z0, a_tilde, b_tilde, c_sq, h);
        if (flow.clamped || flow.value < 0.05) continue;
        ++checked;
        const double ref = bernoulli_ode_reference(z0, a_tilde, b_tilde, c_sq, h);
        worst = std::max(worst, std::abs(flow.value - ref));
    }
    CHECK(worst <= 1e-8);
}

TEST_CASE("noise flow basics") {
    const auto coeffs = synthetic_coeffs(0.0, 0.0, {2.0}, {});
    const std::array<double, 1> zero{0.0};
    CHECK(brownian_flow(1.5, coeffs, zero) == 1.5);
    const std::array<double, 1> dw{0.3};
    CHECK(brownian_flow(1.0, coeffs, dw) == doctest::Approx(1.3));
}

TEST_CASE("noise flow empirical variance") {
    const auto coeffs = synthetic_coeffs(0.0, 0.0, {1.5, -0.8}, {});
    const double h = 0.2;
    const std::size_t n = 100000;
    RngStream rng(99);
    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i) {
        const std::array<double, 2> dw{rng.normal(0.0, std::sqrt(h)), rng.normal(0.0, std::sqrt(h))};
        out[i] = brownian_flow(0.0, coeffs, dw);
    }
    const double expected = 0.25 * coeffs.c_in_sq_sum * h;
    const double se = variance_standard_error(out);
    CHECK(std::abs(variance(out) - expected) <= 3.0 * se);
}

TEST_CASE("perturbation flow basics and empirical variance") {
    const auto empty = synthetic_coeffs(0.0, 0.0, {}, {});
    CHECK(perturbation_flow(2.5, empty, {}) == 2.5);

    const auto coeffs = synthetic_coeffs(0.0, 0.0, {}, {0.9, -1.1});
    const std::array<double, 2> zeros{0.0, 0.0};
    CHECK(perturbation_flow(2.5, coeffs, zeros) == 2.5);

    const double h = 0.3;
    const std::size_t n = 100000;
    RngStream rng(123);
    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i) {
        const std::array<double, 2> dw{rng.normal(0.0, std::sqrt(h)), rng.normal(0.0, std::sqrt(h))};
        out[i] = perturbation_flow(0.0, coeffs, dw);
    }
    const double expected = (0.9 * 0.9 + 1.1 * 1.1) * h;
    CHECK(std::abs(variance(out) - expected) <= 3.0 * variance_standard_error(out));
}

TEST_CASE("component step with everything off is the identity") {
    const auto coeffs = synthetic_coeffs(0.0, 0.0, {0.0}, {0.0});
    const std::array<double, 1> z{0.0};
    const auto res = cir_component_step(3.7, coeffs, 0.5, z, z);
    CHECK(res.value == doctest::Approx(3.7).epsilon(1e-15));
    CHECK_FALSE(res.radicand_clamped);
    CHECK_FALSE(res.perturbation_clamped);
}

TEST_CASE("component step without perturbing reactions reduces to the inner composition") {
    const auto coeffs = synthetic_coeffs(1.2, 0.9, {0.6, -0.4}, {});
    const double x = 2.2, h = 0.17;
    const std::array<double, 2> dw{0.21, -0.33};
    const auto res = cir_component_step(x, coeffs, h, dw, {});
    const FlowValue drift = bernoulli_flow(std::sqrt(x), coeffs, h);
    const double z = brownian_flow(drift.value, coeffs, dw);
    CHECK(res.value == z * z);
}

TEST_CASE("perturbation clamp counts and floors at zero") {
    const auto coeffs = synthetic_coeffs(0.0, 0.0, {}, {1.0});
    const std::array<double, 1> big_negative{-5.0};
    const auto res = cir_component_step(1.0, coeffs, 0.1, {}, big_negative);
    CHECK(res.perturbation_clamped);
    CHECK(res.value >= 0.0);
}

TEST_CASE("one-step mean of the pure square-root process matches the exact transition") {
    const CirParams params{2.0, 1.0, 0.5};
    const auto coeffs = synthetic_coeffs(params.alpha * params.beta, params.beta, {params.sigma}, {});
    const double x0 = 1.0, h = 0.01;
    const std::size_t n = 100000;
    RngStream rng(2024);
    std::vector<double> split(n);
    for (std::size_t i = 0; i < n; ++i) {
        const std::array<double, 1> dw{rng.normal(0.0, std::sqrt(h))};
        split[i] = cir_component_step(x0, coeffs, h, dw, {}).value;
    }
    const double exact_mean = cir_transition_mean(params, x0, h);
    CHECK(std::abs(mean(split) - exact_mean) <= 3.0 * mean_standard_error(split));
}

TEST_CASE("one-step distribution agrees with the exact sampler at small h") {
    const CirParams params{2.0, 1.0, 0.5};
    const auto coeffs = synthetic_coeffs(params.alpha * params.beta, params.beta, {params.sigma}, {});
    const double x0 = 1.0, h = 0.001;
    const std::size_t n = 50000;
    std::vector<double> split(n), exact(n);
    RngStream rng(77);
    for (std::size_t i = 0; i < n; ++i) {
        const std::array<double, 1> dw{rng.normal(0.0, std::sqrt(h))};
        split[i] = cir_component_step(x0, coeffs, h, dw, {}).value;
        exact[i] = cir_exact_sample(params, x0, h, rng);
    }
    CHECK(ks_distance(split, exact) < 0.02);
}
