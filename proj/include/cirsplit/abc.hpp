#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "cirsplit/integrators.hpp"
#include "cirsplit/observation.hpp"
#include "cirsplit/reaction_network.hpp"
#include "cirsplit/rng.hpp"
#include "cirsplit/summaries.hpp"

namespace cirsplit {

/// Independent uniform components on (low_i, high_i).
struct UniformBoxPrior {
    Eigen::VectorXd low;
    Eigen::VectorXd high;

    std::size_t dim() const { return static_cast<std::size_t>(low.size()); }
    void validate() const;
    bool contains(const Eigen::VectorXd& v) const;
    double log_density(const Eigen::VectorXd& v) const;
    Eigen::VectorXd sample(RngStream& rng) const;
};

/// Weighted parameter particles after one round.
struct ParticleCloud {
    int round = 0;
    Eigen::MatrixXd particles;   // M x p
    Eigen::VectorXd weights;     // normalized to sum 1
    Eigen::VectorXd distances;   // accepted distances
    Eigen::MatrixXd perturb_cov; // covariance used to propose this cloud (empty in round 1)

    double effective_sample_size() const;
};

struct DcConfig {
    std::size_t p_particles = 32; // forward paths per call
    double c_scale = 2.0;         // lookahead covariance inflation
    bool noisy = true;
    void validate() const;
};

/// Everything needed to simulate one synthetic dataset for a given draw of
/// the inferred parameter components.
struct SimulationProblem {
    const ReactionNetwork* net = nullptr;
    SchemeKind scheme = SchemeKind::SplitGenericLieTrotter;
    TimeGrid grid;
    Eigen::VectorXd x0;

    Eigen::VectorXd theta_template; // full parameter vector, fixed entries
    std::size_t kinetic_count = 0;
    std::vector<std::size_t> infer_indices; // which entries the prior covers

    std::vector<std::size_t> observed; // selection rows
    bool noisy = true;
    bool sigma_from_theta = false;  // measurement scale is an inferred entry
    std::size_t sigma_theta_index = 0;
    double sigma_fixed = 0.0;

    void validate() const;
    Parameters materialize_theta(const Eigen::VectorXd& infer_values) const;
    ObservationModel materialize_obs(const Parameters& theta) const;
};

/// Forward-simulate and observe one dataset; `fine_steps` reports the cost.
Dataset simulate_forward_dataset(const SimulationProblem& prob, const Parameters& theta,
                                 std::uint64_t seed, ClampCounters* clamps = nullptr,
                                 std::uint64_t* fine_steps = nullptr);

/// Output of the data-conditional path sampler: the weighted particle
/// system over the observation grid and one assembled pseudo-observation.
struct DcSampleResult {
    std::vector<Eigen::MatrixXd> y_tilde; // P simulated observations, n x d_o
    Eigen::MatrixXd weights;              // n x P, rows normalized
    Eigen::MatrixXd y_dc;                 // n x d_o pseudo-observation
    bool degenerate_weights = false;      // some row fell back to uniform
    std::size_t closest_forward = 0;      // argmin_j ||y_tilde_j - y_obs||_F
    ClampCounters clamps;
    std::uint64_t fine_steps = 0;
    std::uint64_t paths = 0;
};

/// Run P forward paths, weight their simulated observations against the
/// data with the inflated observation density (noisy mode) or a one-step
/// Gaussian surrogate around the penultimate fine state (noiseless mode),
/// then assemble a pseudo-observation by per-time categorical draws.
DcSampleResult data_conditional_sample(const SimulationProblem& prob, const Parameters& theta,
                                       const Dataset& dataset, const DcConfig& dc,
                                       std::uint64_t seed, unsigned threads = 1);

/// Fresh categorical assembly from an existing particle system.
Eigen::MatrixXd assemble_dc_path(const std::vector<Eigen::MatrixXd>& y_tilde,
                                 const Eigen::MatrixXd& weights, RngStream& rng);

struct SyntheticLikelihoodStats {
    Eigen::VectorXd mu_fwd;
    Eigen::MatrixXd cov_fwd;
    Eigen::VectorXd mu_dc;
    Eigen::MatrixXd cov_dc;
};

/// Empirical means and jitter-regularized covariances of the forward and
/// data-conditional summary samples (rows are samples).
SyntheticLikelihoodStats synthetic_likelihood_stats(const Eigen::MatrixXd& fwd_summaries,
                                                    const Eigen::MatrixXd& dc_summaries);

/// Importance weight pi(theta) / sum_j w_j phi(theta | theta_j, sigma_prev)
/// for a particle proposed from the previous cloud. Round 1 (no previous
/// cloud) gives weight 1 inside the prior support.
double smc_particle_weight(const Eigen::VectorXd& theta, const UniformBoxPrior& prior,
                           const ParticleCloud* prev, const Eigen::MatrixXd* sigma_prev);

struct DcWeight {
    double value = 0.0;
    bool underflow = false;
};

/// The data-conditional weight: the standard importance ratio times the
/// synthetic-likelihood correction
/// phi(s_dc | mu_fwd, cov_fwd) / phi(s_dc | mu_dc, cov_dc), evaluated in
/// log space. Acceptance (the epsilon indicator) is the caller's step.
/// Round 1 (prev == nullptr) reduces to the correction ratio alone.
DcWeight dc_particle_weight(const Eigen::VectorXd& theta, const Eigen::VectorXd& s_dc,
                            const UniformBoxPrior& prior, const ParticleCloud* prev,
                            const Eigen::MatrixXd* sigma_prev,
                            const SyntheticLikelihoodStats& stats);

/// Twice the weighted covariance of the cloud, jittered when singular.
Eigen::MatrixXd perturbation_covariance(const ParticleCloud& cloud);

/// Draw an ancestor by weight and add Gaussian noise, re-proposing until
/// the draw lands inside the prior box; `rejections` counts the retries.
Eigen::VectorXd perturb(const ParticleCloud& prev, const Eigen::MatrixXd& sigma_chol,
                        const UniformBoxPrior& prior, RngStream& rng,
                        std::uint64_t* rejections = nullptr);

/// Next tolerance: linear-interpolation quantile of the accepted distances.
double epsilon_update(const std::vector<double>& accepted_distances, double alpha_quantile);

struct AbcSettings {
    std::size_t m_particles = 500;
    std::size_t r_max = 6;
    double alpha_quantile = 0.5;
    double acceptance_floor = 0.015;
    std::size_t pretrain = 2000;
    std::size_t slot_attempt_cap = 100000; // hard stop for a stalled proposal slot
    DcConfig dc;
    unsigned threads = 1;
    double ridge = 1e-6;
    bool retrain_summaries = true;
};

struct RoundDiagnostics {
    int round = 0;
    double epsilon = 0.0;
    double acceptance_rate = 0.0;
    double ess = 0.0;
    std::uint64_t attempts = 0;
    std::uint64_t cumulative_attempts = 0;
    std::uint64_t paths = 0;
    std::uint64_t cumulative_paths = 0;
    std::uint64_t fine_steps = 0;
    std::uint64_t cumulative_fine_steps = 0;
    std::uint64_t clamp_total = 0;
    std::uint64_t degenerate_weight_events = 0;
    std::uint64_t weight_underflows = 0;
    std::uint64_t perturb_rejections = 0;
    double wall_seconds = 0.0;
};

struct AbcRunResult {
    std::vector<ParticleCloud> clouds;
    std::vector<RoundDiagnostics> diagnostics;
    bool early_stopped = false;
    std::string stop_reason;
    std::uint64_t pretrain_paths = 0;
    std::uint64_t pretrain_fine_steps = 0;
    SummaryModel final_summary_model;
    Eigen::VectorXd summary_scale;
};

/// Forward-only sampler: one simulated dataset per proposal, importance
/// weights from the prior/kernel ratio, summaries retrained per round on
/// the accepted paths.
AbcRunResult run_abc_smc(const SimulationProblem& prob, const Dataset& dataset,
                         const UniformBoxPrior& prior, const AbcSettings& settings,
                         std::uint64_t master_seed);

/// Data-conditional sampler: proposals are scored on assembled
/// pseudo-observations and weighted with the synthetic-likelihood
/// correction; each accepted particle contributes its closest forward path
/// to the training set.
AbcRunResult run_abc_smc_dc(const SimulationProblem& prob, const Dataset& dataset,
                            const UniformBoxPrior& prior, const AbcSettings& settings,
                            std::uint64_t master_seed);

} // namespace cirsplit
