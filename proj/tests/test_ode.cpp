#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <unsupported/Eigen/MatrixFunctions>

#include "cirsplit/ode.hpp"
#include "test_helpers.hpp"

using namespace cirsplit;
using namespace cirsplit::testing;

TEST_CASE("zero-duration flows are the identity") {
    const auto net = coupled_linear();
    const auto theta = make_theta({1.0, 0.8, 0.3, 0.5});
    const Eigen::VectorXd x = make_state({3.0, 2.0});
    CHECK((cond_linear_ode_step(net, x, theta, 0.0) - x).norm() == doctest::Approx(0.0));
    CHECK((rk4_step(net, x, theta, 0.0) - x).norm() == doctest::Approx(0.0));
}

TEST_CASE("commuting linear system is integrated exactly") {
    // diagonal system: the componentwise flows commute
    const auto net = coupled_linear();
    const auto theta = make_theta({1.0, 0.0, 0.0, 2.0});
    Eigen::MatrixXd a(2, 2);
    a << -1.0, 0.0, 0.0, -2.0;
    const Eigen::VectorXd x0 = make_state({3.0, 5.0});
    const double h = 0.7;
    const Eigen::VectorXd expected = (a * h).exp() * x0;
    const Eigen::VectorXd got = cond_linear_ode_step(net, x0, theta, h);
    CHECK((got - expected).cwiseAbs().maxCoeff() <= 1e-10);
}

TEST_CASE("symmetric block composition is second order on a noncommuting system") {
    const auto net = coupled_linear();
    const auto theta = make_theta({1.0, 0.8, 0.3, 0.5});
    Eigen::MatrixXd a(2, 2);
    a << -1.0, 0.8, 0.3, -0.5;
    const Eigen::VectorXd x0 = make_state({2.0, 1.0});
    const double t_end = 1.0;
    const Eigen::VectorXd exact = (a * t_end).exp() * x0;

    std::vector<double> hs{0.1, 0.05, 0.025, 0.0125};
    std::vector<double> errs;
    for (double h : hs) {
        Eigen::VectorXd x = x0;
        const auto steps = static_cast<std::size_t>(std::llround(t_end / h));
        for (std::size_t k = 0; k < steps; ++k) x = cond_linear_ode_step(net, x, theta, h);
        errs.push_back((x - exact).norm());
    }
    for (std::size_t i = 0; i + 1 < errs.size(); ++i) {
        const double order = std::log2(errs[i] / errs[i + 1]);
        CHECK(order > 1.7);
        CHECK(order < 2.4);
    }
}

TEST_CASE("classical fourth-order step on textbook cases") {
    // flat field
    const auto birth = pure_birth();
    const Eigen::VectorXd still = rk4_step(birth, make_state({1.0}), make_theta({0.0}), 0.3);
    CHECK(still(0) == doctest::Approx(1.0));

    // dx = x over one step of h = 0.1
    const auto growth = pure_growth();
    const double h = 0.1;
    const Eigen::VectorXd grown = rk4_step(growth, make_state({1.0}), make_theta({1.0}), h);
    const double taylor = 1.0 + h + h * h / 2.0 + h * h * h / 6.0 + h * h * h * h / 24.0;
    CHECK(grown(0) == doctest::Approx(taylor).epsilon(1e-14));
}

TEST_CASE("fourth-order local error against the matrix exponential") {
    const auto net = coupled_linear();
    const auto theta = make_theta({1.0, 0.8, 0.3, 0.5});
    Eigen::MatrixXd a(2, 2);
    a << -1.0, 0.8, 0.3, -0.5;
    const Eigen::VectorXd x0 = make_state({2.0, 1.0});

    std::vector<double> hs{0.4, 0.2, 0.1, 0.05};
    std::vector<double> errs;
    for (double h : hs) {
        const Eigen::VectorXd exact = (a * h).exp() * x0;
        errs.push_back((rk4_step(net, x0, theta, h) - exact).norm());
    }
    for (std::size_t i = 0; i + 1 < errs.size(); ++i) {
        const double order = std::log2(errs[i] / errs[i + 1]);
        CHECK(order > 4.5);
        CHECK(order < 5.5);
    }
}

TEST_CASE("oscillator default blocks split mRNA and protein groups") {
    const auto blocks = default_ode_blocks(repressilator());
    REQUIRE(blocks.size() == 2);
    CHECK(blocks[0] == std::vector<std::size_t>{0, 2, 4});
    CHECK(blocks[1] == std::vector<std::size_t>{1, 3, 5});
}

TEST_CASE("non-affine self-dependence is a domain error") {
    const auto net = autocatalytic();
    CHECK_THROWS_AS(cond_linear_ode_step(net, make_state({2.0}), make_theta({1.0}), 0.1),
                    std::domain_error);
}
