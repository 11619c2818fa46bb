#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <array>
#include <cmath>

#include "cirsplit/errors.hpp"
#include "cirsplit/integrators.hpp"
#include "cirsplit/ode.hpp"
#include "cirsplit/stats.hpp"
#include "test_helpers.hpp"

using namespace cirsplit;
using namespace cirsplit::testing;

TEST_CASE("Euler-Maruyama step examples") {
    const auto net = two_pool();
    const auto theta = make_theta({0.1, 0.2, 0.2, 0.5, 2.0}, 4);
    ClampCounters clamps;

    // absorbed state stays put
    const std::array<double, 4> zeros{0, 0, 0, 0};
    const Eigen::VectorXd still =
        eum_step(net, Eigen::VectorXd::Zero(2), theta, 0.1, zeros, false, clamps);
    CHECK(still.norm() == doctest::Approx(0.0));

    // zero-noise drift step
    const Eigen::VectorXd x = eum_step(net, make_state({100, 0}), theta, 0.1, zeros, false, clamps);
    CHECK(x(0) == doctest::Approx(97.0));
    CHECK(x(1) == doctest::Approx(2.0));
    CHECK(clamps.eum_truncations == 0);
}

TEST_CASE("Euler-Maruyama negativity handling") {
    const auto net = pure_decay();
    const auto theta = make_theta({1.0});
    ClampCounters clamps;
    // decay stoichiometry is -1, so a positive increment drives x negative:
    // x' = 1 - (1*0.1 + 1*5) = -4.1
    const std::array<double, 1> crash{5.0};
    const Eigen::VectorXd trunc = eum_step(net, make_state({1.0}), theta, 0.1, crash, false, clamps);
    CHECK(trunc(0) == 0.0);
    CHECK(clamps.eum_truncations == 1);

    ClampCounters clamps2;
    const Eigen::VectorXd abs = eum_step(net, make_state({1.0}), theta, 0.1, crash, true, clamps2);
    CHECK(abs(0) == doctest::Approx(4.1));
    CHECK(clamps2.eum_truncations == 1);
}

TEST_CASE("generic sweep equals the hand-written two-pool step") {
    const auto net = two_pool();
    const auto theta = make_theta({0.1, 0.2, 0.2, 0.5, 2.0}, 4);
    RngStream rng(515);
    const std::vector<std::size_t> order{0, 1};
    for (int trial = 0; trial < 200; ++trial) {
        const Eigen::VectorXd x = make_state({rng.uniform(0.0, 200.0), rng.uniform(0.0, 200.0)});
        const double h = rng.uniform(0.005, 0.4);
        std::array<double, 4> dw;
        for (auto& v : dw) v = rng.normal(0.0, std::sqrt(h));
        ClampCounters c1, c2;
        const Eigen::VectorXd generic = generic_splitting_step(net, x, theta, h, dw, order, c1);
        const Eigen::VectorXd direct = twopool_lietrotter_kernel(x, theta, h, dw, c2);
        CHECK(generic(0) == direct(0));
        CHECK(generic(1) == direct(1));
        CHECK(c1.total() == c2.total());
    }
}

TEST_CASE("generic sweep with the same seed equals the rng-driven two-pool step") {
    const auto net = two_pool();
    const auto theta = make_theta({0.1, 0.2, 0.2, 0.5, 2.0}, 4);
    RngStream a(9001), b(9001);
    ClampCounters c1, c2;
    const std::vector<std::size_t> order{0, 1};
    const Eigen::VectorXd x = make_state({80, 20});
    const Eigen::VectorXd generic = generic_splitting_step(net, x, theta, 0.1, a, order, c1);
    const Eigen::VectorXd direct = twopool_lietrotter_step(x, theta, 0.1, b, c2);
    CHECK(generic(0) == direct(0));
    CHECK(generic(1) == direct(1));
}

TEST_CASE("splitting steps stay nonnegative on random inputs") {
    RngStream rng(31337);
    const auto rep_theta = make_theta({1.0, 1000.0, 20.0, 2.0, 5.0, 1.0});
    const auto lv_theta = make_theta({0.5, 0.0025, 0.3});
    const auto tp_theta = make_theta({0.1, 0.2, 0.2, 0.5, 2.0}, 4);
    ClampCounters clamps;
    for (int trial = 0; trial < 4000; ++trial) {
        const double h = rng.uniform(0.01, 0.5);
        {
            Eigen::VectorXd x(6);
            for (int i = 0; i < 6; ++i) x(i) = rng.uniform(0.0, 300.0);
            const Eigen::VectorXd next = repressilator_strang_step(x, rep_theta, h, rng, clamps);
            CHECK(next.minCoeff() >= 0.0);
        }
        {
            const Eigen::VectorXd x = make_state({rng.uniform(0.0, 500.0), rng.uniform(0.0, 500.0)});
            const Eigen::VectorXd next = lv_strang_step(x, lv_theta, h, rng, clamps);
            CHECK(next.minCoeff() >= 0.0);
        }
        {
            const Eigen::VectorXd x = make_state({rng.uniform(0.0, 200.0), rng.uniform(0.0, 200.0)});
            const Eigen::VectorXd next = twopool_lietrotter_step(x, tp_theta, h, rng, clamps);
            CHECK(next.minCoeff() >= 0.0);
        }
    }
}

TEST_CASE("simulate_path shapes and subsampling") {
    const auto net = repressilator();
    const auto theta = make_theta({1.0, 1000.0, 20.0, 2.0, 5.0, 1.0});
    const TimeGrid grid{0.0, 50, 0.2, 10};
    CHECK(grid.h() == doctest::Approx(0.02));
    const SchemeConfig scheme{SchemeKind::SplitRepressilatorStrang, 99, {}};
    const Trajectory traj =
        simulate_path(net, scheme, make_state({0, 40, 0, 20, 0, 60}), theta, grid);
    CHECK(traj.states.rows() == 501);
    CHECK(traj.states.cols() == 6);
    const Eigen::MatrixXd obs = traj.observation_states();
    CHECK(obs.rows() == 51);
    CHECK(obs.cols() == 6);
    CHECK((obs.row(0) - traj.states.row(0)).norm() == 0.0);
    CHECK((obs.row(1) - traj.states.row(10)).norm() == 0.0);
    CHECK(traj.states.minCoeff() >= 0.0);
    CHECK_FALSE(traj.diverged);
}

TEST_CASE("one-interval grid reduces to a single step") {
    const auto net = two_pool();
    const auto theta = make_theta({0.1, 0.2, 0.2, 0.5, 2.0}, 4);
    const TimeGrid grid{0.0, 1, 0.1, 1};
    const SchemeConfig scheme{SchemeKind::SplitTwoPoolLieTrotter, 1234, {}};
    const Trajectory traj = simulate_path(net, scheme, make_state({100, 0}), theta, grid);
    RngStream rng(1234);
    ClampCounters clamps;
    const Eigen::VectorXd direct = twopool_lietrotter_step(make_state({100, 0}), theta, 0.1, rng, clamps);
    CHECK(traj.states(1, 0) == direct(0));
    CHECK(traj.states(1, 1) == direct(1));
}

TEST_CASE("identical seed gives bit-identical trajectories") {
    const auto net = lotka_volterra();
    const auto theta = make_theta({0.5, 0.0025, 0.3});
    const TimeGrid grid{0.0, 20, 1.0, 20};
    const SchemeConfig scheme{SchemeKind::SplitLotkaVolterraStrang, 31415, {}};
    const Trajectory a = simulate_path(net, scheme, make_state({100, 100}), theta, grid);
    const Trajectory b = simulate_path(net, scheme, make_state({100, 100}), theta, grid);
    CHECK((a.states - b.states).norm() == 0.0);
}

TEST_CASE("scheme and model pairing is enforced") {
    const auto net = two_pool();
    const auto theta = make_theta({0.1, 0.2, 0.2, 0.5, 2.0}, 4);
    const TimeGrid grid{0.0, 1, 0.1, 1};
    const SchemeConfig scheme{SchemeKind::SplitLotkaVolterraStrang, 1, {}};
    CHECK_THROWS_AS(simulate_path(net, scheme, make_state({1, 1}), theta, grid), config_error);
}

TEST_CASE("zero-noise oscillator step tracks the exact conditionally-linear step") {
    const auto net = repressilator();
    const auto theta = make_theta({1.0, 1000.0, 20.0, 2.0, 5.0, 1.0});
    const Eigen::VectorXd x0 = make_state({0, 40, 0, 20, 0, 60});
    const std::array<double, 9> no_noise{};
    for (double h : {1e-3, 1e-4}) {
        ClampCounters clamps;
        const Eigen::VectorXd stochastic =
            repressilator_strang_kernel(x0, theta, h, no_noise, clamps);
        const Eigen::VectorXd ode = cond_linear_ode_step(net, x0, theta, h);
        // the noise-free gap is the quarter-variance drift correction, O(h)
        CHECK((stochastic - ode).cwiseAbs().maxCoeff() <= 3.0 * h);
    }
}

TEST_CASE("decoupled two-pool matches the analytic decay mean") {
    const auto theta = make_theta({0.1, 0.2, 0.0, 0.0, 2.0}, 4);
    const double h = 0.02, t_end = 5.0;
    const std::size_t steps = static_cast<std::size_t>(t_end / h);
    const std::size_t n = 10000;
    std::vector<double> x1(n);
    for (std::size_t i = 0; i < n; ++i) {
        RngStream rng = RngStream::derived(606, {i});
        Eigen::VectorXd x = make_state({100, 0});
        ClampCounters clamps;
        for (std::size_t k = 0; k < steps; ++k) x = twopool_lietrotter_step(x, theta, h, rng, clamps);
        x1[i] = x(0);
    }
    const double expected = 100.0 * std::exp(-0.1 * t_end);
    CHECK(std::abs(mean(x1) - expected) <= 3.0 * mean_standard_error(x1));
}

TEST_CASE("predator-prey splitting survives step sizes that degrade Euler-Maruyama") {
    const auto net = lotka_volterra();
    const auto theta = make_theta({0.5, 0.0025, 0.3});
    const double h = 0.3;
    const std::size_t steps = 167; // t = 50, where truncations are frequent
    std::size_t eum_events = 0, split_nonfinite = 0;
    for (std::size_t p = 0; p < 20; ++p) {
        SchemeConfig split{SchemeKind::SplitLotkaVolterraStrang, derive_seed(5150, {p}), {}};
        const EndpointResult s = simulate_endpoint(net, split, make_state({100, 100}), theta, h, steps);
        if (s.diverged) ++split_nonfinite;
        CHECK(s.state.minCoeff() >= 0.0);

        SchemeConfig eum{SchemeKind::EulerMaruyamaTruncate, derive_seed(5150, {p}), {}};
        const EndpointResult e = simulate_endpoint(net, eum, make_state({100, 100}), theta, h, steps);
        if (e.diverged || e.clamps.total() > 0) ++eum_events;
    }
    CHECK(split_nonfinite == 0);
    CHECK(eum_events >= 5);
}

TEST_CASE("Euler-Maruyama truncation events occur in the breakdown regime") {
    // predator-prey at h = 0.1 must register truncations across 100 paths
    const auto net = lotka_volterra();
    const auto theta = make_theta({0.5, 0.0025, 0.3});
    std::uint64_t clamp_events = 0;
    for (std::size_t p = 0; p < 100; ++p) {
        SchemeConfig eum{SchemeKind::EulerMaruyamaTruncate, derive_seed(8181, {p}), {}};
        const EndpointResult e =
            simulate_endpoint(net, eum, make_state({100, 100}), theta, 0.1, 500);
        clamp_events += e.clamps.eum_truncations;
    }
    CHECK(clamp_events > 0);
}

TEST_CASE("checkpoint capture matches full simulation") {
    const auto net = two_pool();
    const auto theta = make_theta({0.1, 0.2, 0.2, 0.5, 2.0}, 4);
    const TimeGrid grid{0.0, 10, 0.1, 5};
    const SchemeConfig scheme{SchemeKind::SplitTwoPoolLieTrotter, 777, {}};
    const Trajectory traj = simulate_path(net, scheme, make_state({100, 0}), theta, grid);
    const std::vector<std::size_t> capture{0, 25, 50};
    const CheckpointResult res =
        simulate_checkpoints(net, scheme, make_state({100, 0}), theta, grid.h(), capture);
    CHECK((res.states.row(0) - traj.states.row(0)).norm() == 0.0);
    CHECK((res.states.row(1) - traj.states.row(25)).norm() == 0.0);
    CHECK((res.states.row(2) - traj.states.row(50)).norm() == 0.0);
}

TEST_CASE("species update order is validated") {
    const auto net = two_pool();
    const auto theta = make_theta({0.1, 0.2, 0.2, 0.5, 2.0}, 4);
    RngStream rng(1);
    ClampCounters clamps;
    const std::vector<std::size_t> bad{0};
    CHECK_THROWS_AS(
        generic_splitting_step(net, make_state({1, 1}), theta, 0.1, rng, bad, clamps),
        config_error);
}
