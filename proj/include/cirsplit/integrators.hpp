#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "cirsplit/cond_cir.hpp"
#include "cirsplit/reaction_network.hpp"
#include "cirsplit/rng.hpp"

namespace cirsplit {

/// Observation grid of n intervals of width delta, each refined into a_sub
/// integration substeps of width h = delta / a_sub.
struct TimeGrid {
    double t0 = 0.0;
    std::size_t n = 1;
    double delta = 1.0;
    std::size_t a_sub = 1;

    double h() const { return delta / static_cast<double>(a_sub); }
    std::size_t fine_count() const { return n * a_sub; }
    double fine_time(std::size_t k) const { return t0 + static_cast<double>(k) * h(); }
    double obs_time(std::size_t l) const { return t0 + static_cast<double>(l) * delta; }
    void validate() const;
};

struct ClampCounters {
    std::uint64_t eum_truncations = 0; // negative EuM component reset to zero
    std::uint64_t radicand = 0;        // drift-flow endpoint went negative
    std::uint64_t perturbation = 0;    // perturbed level went negative before sqrt
    std::uint64_t inverse_map = 0;     // offset subtraction floored at zero

    std::uint64_t total() const { return eum_truncations + radicand + perturbation + inverse_map; }
    ClampCounters& operator+=(const ClampCounters& o);
};

struct Trajectory {
    TimeGrid grid;
    Eigen::MatrixXd states; // (n*a_sub + 1) x d, fine resolution
    ClampCounters clamps;
    bool diverged = false;

    /// Rows at the observation times only, (n+1) x d.
    Eigen::MatrixXd observation_states() const;
};

enum class SchemeKind {
    EulerMaruyamaTruncate,
    EulerMaruyamaAbs,
    SplitGenericLieTrotter,
    SplitRepressilatorStrang,
    SplitLotkaVolterraStrang,
    SplitLotkaVolterraLieTrotter,
    SplitTwoPoolLieTrotter,
    OdeCondLinearStrang,
    OdeRk4,
};

std::string to_string(SchemeKind kind);
SchemeKind scheme_from_string(const std::string& name);
bool scheme_is_splitting(SchemeKind kind);
bool scheme_is_deterministic(SchemeKind kind);

struct SchemeConfig {
    SchemeKind kind = SchemeKind::SplitGenericLieTrotter;
    std::uint64_t rng_seed = 0;
    /// Componentwise update order for the generic sweep; empty = ascending.
    std::vector<std::size_t> species_update_order;
};

/// One Euler-Maruyama step; `noise` holds one variance-h Gaussian increment
/// per reaction. Negative components are truncated at zero (or reflected
/// when absolute_value is set), counting each event.
Eigen::VectorXd eum_step(const ReactionNetwork& net, const Eigen::VectorXd& x,
                         const Parameters& theta, double h, std::span<const double> noise,
                         bool absolute_value, ClampCounters& clamps);

/// Componentwise splitting sweep, always reading the latest updated state.
/// `reaction_increments` holds one variance-h Gaussian increment per
/// reaction, drawn once per step and reused wherever a reaction appears.
Eigen::VectorXd generic_splitting_step(const ReactionNetwork& net, const Eigen::VectorXd& x,
                                       const Parameters& theta, double h,
                                       std::span<const double> reaction_increments,
                                       std::span<const std::size_t> order, ClampCounters& clamps);

Eigen::VectorXd generic_splitting_step(const ReactionNetwork& net, const Eigen::VectorXd& x,
                                       const Parameters& theta, double h, RngStream& rng,
                                       std::span<const std::size_t> order, ClampCounters& clamps);

/// Strang step for the three-gene oscillator with merged per-species noise:
/// mRNA block over h/2, protein block over h, mRNA block over h/2.
/// The kernel takes the nine increments explicitly, ordered
/// (M1,M2,M3 | P1,P2,P3 | M1,M2,M3) with variances (h/2, h, h/2).
Eigen::VectorXd repressilator_strang_kernel(const Eigen::VectorXd& x, const Parameters& theta,
                                            double h, std::span<const double> increments,
                                            ClampCounters& clamps);
Eigen::VectorXd repressilator_strang_step(const Eigen::VectorXd& x, const Parameters& theta,
                                          double h, RngStream& rng, ClampCounters& clamps);

/// Strang step for the predator-prey system: X1 over h/2, X2 over h, X1
/// over h/2. Kernel increments: (W1,W2 | W2,W3 | W1,W2) with variances
/// (h/2, h/2 | h, h | h/2, h/2); the full-step W2 increment is drawn once
/// per step, the half-step increments fresh per half-step.
Eigen::VectorXd lv_strang_kernel(const Eigen::VectorXd& x, const Parameters& theta, double h,
                                 std::span<const double> increments, ClampCounters& clamps);
Eigen::VectorXd lv_strang_step(const Eigen::VectorXd& x, const Parameters& theta, double h,
                               RngStream& rng, ClampCounters& clamps);

/// Lie-Trotter variant: X1 over h then X2 over h, sharing the W2 increment.
Eigen::VectorXd lv_lietrotter_step(const Eigen::VectorXd& x, const Parameters& theta, double h,
                                   RngStream& rng, ClampCounters& clamps);

/// Lie-Trotter step for the two-pool system; the four reaction increments
/// (variance h) are drawn once per step and shared across both species.
Eigen::VectorXd twopool_lietrotter_kernel(const Eigen::VectorXd& x, const Parameters& theta,
                                          double h, std::span<const double> increments,
                                          ClampCounters& clamps);
Eigen::VectorXd twopool_lietrotter_step(const Eigen::VectorXd& x, const Parameters& theta,
                                        double h, RngStream& rng, ClampCounters& clamps);

/// Integrate over the whole grid, retaining every fine-step state.
/// Deterministic given (scheme.rng_seed, inputs). Non-finite states mark
/// the trajectory diverged and stop the integration.
Trajectory simulate_path(const ReactionNetwork& net, const SchemeConfig& scheme,
                         const Eigen::VectorXd& x0, const Parameters& theta,
                         const TimeGrid& grid);

/// End state after `steps` fine steps of size h, without storing history.
struct EndpointResult {
    Eigen::VectorXd state;
    ClampCounters clamps;
    bool diverged = false;
};
EndpointResult simulate_endpoint(const ReactionNetwork& net, const SchemeConfig& scheme,
                                 const Eigen::VectorXd& x0, const Parameters& theta, double h,
                                 std::size_t steps);

/// States at the given ascending fine-step indices, one row per index;
/// rows after a divergence hold non-finite values.
struct CheckpointResult {
    Eigen::MatrixXd states;
    ClampCounters clamps;
    bool diverged = false;
};
CheckpointResult simulate_checkpoints(const ReactionNetwork& net, const SchemeConfig& scheme,
                                      const Eigen::VectorXd& x0, const Parameters& theta,
                                      double h, std::span<const std::size_t> indices);

} // namespace cirsplit
