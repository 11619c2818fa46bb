#include "cirsplit/abc.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <limits>

#include "cirsplit/errors.hpp"
#include "cirsplit/parallel.hpp"
#include "cirsplit/stats.hpp"

namespace cirsplit {

namespace {
constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr double kInf = std::numeric_limits<double>::infinity();

// Stream tags; every stochastic task hangs off (master, tag, ...).
constexpr std::uint64_t kTagPretrain = 1;
constexpr std::uint64_t kTagProposal = 2;
constexpr std::uint64_t kTagSimulate = 3;
constexpr std::uint64_t kTagDcPath = 10;
constexpr std::uint64_t kTagDcMeasure = 11;
constexpr std::uint64_t kTagDcAssembly = 12;
} // namespace

void UniformBoxPrior::validate() const {
    if (low.size() != high.size() || low.size() == 0) throw config_error("prior box shape");
    for (Eigen::Index i = 0; i < low.size(); ++i)
        if (!(low(i) < high(i))) throw config_error("prior box needs low < high");
}

bool UniformBoxPrior::contains(const Eigen::VectorXd& v) const {
    if (v.size() != low.size()) return false;
    for (Eigen::Index i = 0; i < v.size(); ++i)
        if (v(i) <= low(i) || v(i) >= high(i)) return false;
    return true;
}

double UniformBoxPrior::log_density(const Eigen::VectorXd& v) const {
    if (!contains(v)) return kNegInf;
    double lp = 0.0;
    for (Eigen::Index i = 0; i < low.size(); ++i) lp -= std::log(high(i) - low(i));
    return lp;
}

Eigen::VectorXd UniformBoxPrior::sample(RngStream& rng) const {
    Eigen::VectorXd v(low.size());
    for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = rng.uniform(low(i), high(i));
    return v;
}

double ParticleCloud::effective_sample_size() const {
    const double ss = weights.squaredNorm();
    return ss > 0.0 ? 1.0 / ss : 0.0;
}

void DcConfig::validate() const {
    if (p_particles < 2) throw config_error("data-conditional sampler needs at least two paths");
    if (!(c_scale >= 1.0)) throw config_error("covariance inflation must be at least 1");
}

void SimulationProblem::validate() const {
    if (net == nullptr) throw config_error("problem has no network");
    grid.validate();
    if (static_cast<std::size_t>(x0.size()) != net->species_count())
        throw config_error("problem initial state dimension");
    if (infer_indices.empty()) throw config_error("problem infers no parameters");
    for (std::size_t idx : infer_indices)
        if (idx >= static_cast<std::size_t>(theta_template.size()))
            throw config_error("inference index out of range");
    if (observed.empty()) throw config_error("problem observes no species");
    if (noisy && sigma_from_theta &&
        sigma_theta_index >= static_cast<std::size_t>(theta_template.size()))
        throw config_error("sigma parameter index out of range");
}

Parameters SimulationProblem::materialize_theta(const Eigen::VectorXd& infer_values) const {
    if (static_cast<std::size_t>(infer_values.size()) != infer_indices.size())
        throw config_error("inference vector dimension");
    Parameters theta;
    theta.values = theta_template;
    theta.kinetic_count = kinetic_count;
    for (std::size_t k = 0; k < infer_indices.size(); ++k)
        theta.values(static_cast<Eigen::Index>(infer_indices[k])) = infer_values(static_cast<Eigen::Index>(k));
    return theta;
}

ObservationModel SimulationProblem::materialize_obs(const Parameters& theta) const {
    if (!noisy) return ObservationModel::noiseless(observed);
    const double sigma = sigma_from_theta ? theta[sigma_theta_index] : sigma_fixed;
    return ObservationModel::iso_noise(observed, sigma);
}

Dataset simulate_forward_dataset(const SimulationProblem& prob, const Parameters& theta,
                                 std::uint64_t seed, ClampCounters* clamps,
                                 std::uint64_t* fine_steps) {
    SchemeConfig scheme{prob.scheme, derive_seed(seed, {0}), {}};
    const Trajectory traj = simulate_path(*prob.net, scheme, prob.x0, theta, prob.grid);
    if (clamps != nullptr) *clamps += traj.clamps;
    if (fine_steps != nullptr) *fine_steps += prob.grid.fine_count();
    RngStream measure = RngStream::derived(seed, {1});
    return observe(traj, prob.materialize_obs(theta), measure);
}

Eigen::MatrixXd assemble_dc_path(const std::vector<Eigen::MatrixXd>& y_tilde,
                                 const Eigen::MatrixXd& weights, RngStream& rng) {
    if (y_tilde.empty()) throw config_error("assemble_dc_path: empty particle system");
    const auto n = weights.rows();
    const auto p = weights.cols();
    if (static_cast<std::size_t>(p) != y_tilde.size())
        throw config_error("assemble_dc_path: weight column count");
    Eigen::MatrixXd out(n, y_tilde.front().cols());
    std::vector<double> row(static_cast<std::size_t>(p));
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index k = 0; k < p; ++k) row[static_cast<std::size_t>(k)] = weights(i, k);
        const std::size_t pick = rng.categorical(row);
        out.row(i) = y_tilde[pick].row(i);
    }
    return out;
}

DcSampleResult data_conditional_sample(const SimulationProblem& prob, const Parameters& theta,
                                       const Dataset& dataset, const DcConfig& dc,
                                       std::uint64_t seed, unsigned threads) {
    prob.validate();
    dc.validate();
    if (dataset.interval_count() != prob.grid.n)
        throw config_error("dataset does not align with the simulation grid");

    const std::size_t p_paths = dc.p_particles;
    const std::size_t n = prob.grid.n;
    const std::size_t a_sub = prob.grid.a_sub;
    const double h = prob.grid.h();
    const ObservationModel obs_model = prob.materialize_obs(theta);
    const auto d_o = static_cast<Eigen::Index>(obs_model.output_dim());
    const Eigen::MatrixXd y_obs = dataset.records_after_start();

    Eigen::MatrixXd inflated_cov;
    Eigen::MatrixXd noise_chol;
    if (dc.noisy) {
        if (!obs_model.has_noise)
            throw config_error("noisy data-conditional mode needs an observation noise model");
        inflated_cov = dc.c_scale * obs_model.noise_cov;
        Eigen::LLT<Eigen::MatrixXd> llt(obs_model.noise_cov);
        if (llt.info() == Eigen::Success) {
            noise_chol = llt.matrixL();
        } else {
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(obs_model.noise_cov);
            noise_chol = es.eigenvectors() * es.eigenvalues().cwiseMax(0.0).cwiseSqrt().asDiagonal();
        }
    }

    DcSampleResult res;
    res.y_tilde.assign(p_paths, Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), d_o));
    Eigen::MatrixXd log_w(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(p_paths));
    std::vector<ClampCounters> clamp_slots(p_paths);

    parallel_for(p_paths, threads, [&](std::size_t j) {
        SchemeConfig scheme{prob.scheme, derive_seed(seed, {kTagDcPath, j}), {}};
        const Trajectory traj = simulate_path(*prob.net, scheme, prob.x0, theta, prob.grid);
        clamp_slots[j] = traj.clamps;
        RngStream measure = RngStream::derived(seed, {kTagDcMeasure, j});
        for (std::size_t i = 1; i <= n; ++i) {
            const Eigen::Index row = static_cast<Eigen::Index>(i - 1);
            if (traj.diverged && !traj.states.row(static_cast<Eigen::Index>(i * a_sub)).allFinite()) {
                log_w(row, static_cast<Eigen::Index>(j)) = kNegInf;
                continue;
            }
            const Eigen::VectorXd x_end =
                traj.states.row(static_cast<Eigen::Index>(i * a_sub)).transpose();
            Eigen::VectorXd y = obs_model.project(x_end);
            double lw;
            if (dc.noisy) {
                Eigen::VectorXd z(d_o);
                for (Eigen::Index k = 0; k < d_o; ++k) z(k) = measure.gauss();
                y += noise_chol * z;
                lw = obs_log_density(y_obs.row(row).transpose(), y, inflated_cov);
            } else {
                // One-step Gaussian surrogate around the penultimate fine state.
                const Eigen::VectorXd x_pen =
                    traj.states.row(static_cast<Eigen::Index>(i * a_sub - 1)).transpose();
                const Eigen::VectorXd drift = cle_drift(*prob.net, x_pen, theta);
                const Eigen::MatrixXd cols = cle_diffusion_columns(*prob.net, x_pen, theta);
                Eigen::MatrixXd proj(d_o, cols.cols());
                for (Eigen::Index k = 0; k < d_o; ++k)
                    proj.row(k) = cols.row(static_cast<Eigen::Index>(obs_model.observed[static_cast<std::size_t>(k)]));
                const Eigen::MatrixXd cov = dc.c_scale * h * (proj * proj.transpose());
                const Eigen::VectorXd mean_obs = obs_model.project(x_pen + h * drift);
                lw = mvn_log_density(y_obs.row(row).transpose(), mean_obs, cov);
            }
            res.y_tilde[j].row(row) = y.transpose();
            log_w(row, static_cast<Eigen::Index>(j)) = lw;
        }
    });

    for (const auto& c : clamp_slots) res.clamps += c;
    res.paths = p_paths;
    res.fine_steps = static_cast<std::uint64_t>(p_paths) * prob.grid.fine_count();

    // Normalize the lookahead weights per observation time.
    res.weights.resize(log_w.rows(), log_w.cols());
    for (Eigen::Index i = 0; i < log_w.rows(); ++i) {
        std::vector<double> row(static_cast<std::size_t>(log_w.cols()));
        for (Eigen::Index j = 0; j < log_w.cols(); ++j) row[static_cast<std::size_t>(j)] = log_w(i, j);
        const double lse = log_sum_exp(row);
        if (!std::isfinite(lse)) {
            res.degenerate_weights = true;
            res.weights.row(i).setConstant(1.0 / static_cast<double>(p_paths));
        } else {
            for (Eigen::Index j = 0; j < log_w.cols(); ++j)
                res.weights(i, j) = std::exp(log_w(i, j) - lse);
        }
    }

    RngStream assembly = RngStream::derived(seed, {kTagDcAssembly, 0});
    res.y_dc = assemble_dc_path(res.y_tilde, res.weights, assembly);

    // Closest forward path to the observed records, for summary retraining.
    double best = kInf;
    for (std::size_t j = 0; j < p_paths; ++j) {
        const double dist = (res.y_tilde[j] - y_obs).norm();
        if (dist < best) {
            best = dist;
            res.closest_forward = j;
        }
    }
    return res;
}

SyntheticLikelihoodStats synthetic_likelihood_stats(const Eigen::MatrixXd& fwd_summaries,
                                                    const Eigen::MatrixXd& dc_summaries) {
    if (fwd_summaries.rows() < 2 || dc_summaries.rows() < 2)
        throw config_error("synthetic likelihood needs at least two summaries per side");
    if (fwd_summaries.cols() != dc_summaries.cols())
        throw config_error("synthetic likelihood dimension mismatch");
    SyntheticLikelihoodStats stats;
    stats.mu_fwd = row_mean(fwd_summaries);
    stats.cov_fwd = row_covariance(fwd_summaries, 1e-10);
    stats.mu_dc = row_mean(dc_summaries);
    stats.cov_dc = row_covariance(dc_summaries, 1e-10);
    return stats;
}

namespace {

double smc_log_weight(const Eigen::VectorXd& theta, const UniformBoxPrior& prior,
                      const ParticleCloud* prev, const Eigen::MatrixXd* sigma_prev) {
    const double lp = prior.log_density(theta);
    if (!std::isfinite(lp)) return kNegInf;
    if (prev == nullptr) return 0.0; // first round: equal weights
    if (sigma_prev == nullptr) throw config_error("previous covariance required after round 1");
    std::vector<double> terms(static_cast<std::size_t>(prev->particles.rows()));
    for (Eigen::Index j = 0; j < prev->particles.rows(); ++j) {
        const double lw = std::log(prev->weights(j));
        terms[static_cast<std::size_t>(j)] =
            lw + mvn_log_density(theta, prev->particles.row(j).transpose(), *sigma_prev);
    }
    const double denom = log_sum_exp(terms);
    if (!std::isfinite(denom)) return kNegInf;
    return lp - denom;
}

} // namespace

double smc_particle_weight(const Eigen::VectorXd& theta, const UniformBoxPrior& prior,
                           const ParticleCloud* prev, const Eigen::MatrixXd* sigma_prev) {
    const double lw = smc_log_weight(theta, prior, prev, sigma_prev);
    return std::isfinite(lw) ? std::exp(lw) : 0.0;
}

namespace {

// A synthetic-likelihood covariance whose smallest eigenvalue sits at the
// regularization floor means the summary sample was (numerically)
// degenerate; any density evaluated with it is jitter noise, not an
// estimate. 100x the 1e-10 jitter separates that cleanly from genuine
// summary spreads.
bool sl_degenerate(const Eigen::MatrixXd& cov) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(cov);
    return es.eigenvalues().minCoeff() <= 1e-8;
}

} // namespace

DcWeight dc_particle_weight(const Eigen::VectorXd& theta, const Eigen::VectorXd& s_dc,
                            const UniformBoxPrior& prior, const ParticleCloud* prev,
                            const Eigen::MatrixXd* sigma_prev,
                            const SyntheticLikelihoodStats& stats) {
    DcWeight out;
    if (sl_degenerate(stats.cov_dc) || sl_degenerate(stats.cov_fwd)) {
        out.underflow = true;
        return out;
    }
    const double correction = mvn_log_density(s_dc, stats.mu_fwd, stats.cov_fwd) -
                              mvn_log_density(s_dc, stats.mu_dc, stats.cov_dc);
    double log_w;
    if (prev == nullptr) {
        if (!prior.contains(theta)) return out;
        log_w = correction;
    } else {
        const double base = smc_log_weight(theta, prior, prev, sigma_prev);
        if (!std::isfinite(base)) return out;
        log_w = base + correction;
    }
    out.value = std::exp(log_w);
    if (out.value == 0.0 && std::isfinite(log_w)) out.underflow = true;
    if (!std::isfinite(out.value)) {
        out.value = 0.0;
        out.underflow = true;
    }
    return out;
}

Eigen::MatrixXd perturbation_covariance(const ParticleCloud& cloud) {
    Eigen::MatrixXd cov = 2.0 * weighted_covariance(cloud.particles, cloud.weights);
    Eigen::LLT<Eigen::MatrixXd> llt(cov);
    double jitter = 1e-12 * std::max(1.0, cov.trace() / static_cast<double>(cov.rows()));
    int tries = 0;
    while (llt.compute(cov).info() != Eigen::Success) {
        cov += jitter * Eigen::MatrixXd::Identity(cov.rows(), cov.cols());
        jitter *= 10.0;
        if (++tries > 12) throw numeric_error("perturbation covariance not factorizable");
    }
    return cov;
}

Eigen::VectorXd perturb(const ParticleCloud& prev, const Eigen::MatrixXd& sigma_chol,
                        const UniformBoxPrior& prior, RngStream& rng,
                        std::uint64_t* rejections) {
    const auto p = prev.particles.cols();
    std::vector<double> w(prev.weights.data(), prev.weights.data() + prev.weights.size());
    for (std::uint64_t tries = 0; tries < 10000000ULL; ++tries) {
        const std::size_t ancestor = rng.categorical(w);
        Eigen::VectorXd z(p);
        for (Eigen::Index k = 0; k < p; ++k) z(k) = rng.gauss();
        Eigen::VectorXd proposal =
            prev.particles.row(static_cast<Eigen::Index>(ancestor)).transpose() + sigma_chol * z;
        if (prior.contains(proposal)) return proposal;
        if (rejections != nullptr) ++(*rejections);
    }
    throw numeric_error("perturbation kernel cannot reach the prior support");
}

double epsilon_update(const std::vector<double>& accepted_distances, double alpha_quantile) {
    if (accepted_distances.empty()) throw config_error("epsilon update needs distances");
    return quantile(accepted_distances, alpha_quantile);
}

namespace {

Eigen::MatrixXd cholesky_lower(const Eigen::MatrixXd& cov) {
    Eigen::LLT<Eigen::MatrixXd> llt(cov);
    if (llt.info() != Eigen::Success) {
        Eigen::MatrixXd jittered =
            cov + 1e-12 * std::max(1.0, cov.trace()) * Eigen::MatrixXd::Identity(cov.rows(), cov.cols());
        llt.compute(jittered);
        if (llt.info() != Eigen::Success) throw numeric_error("covariance factorization failed");
    }
    return llt.matrixL();
}

struct ProposalOutcome {
    Eigen::VectorXd theta;
    double distance = kInf;
    double weight = 0.0;
    bool weight_underflow = false;
    bool degenerate = false;
    bool gave_up = false;
    Eigen::MatrixXd train_path;
    std::uint64_t attempts = 0;
    std::uint64_t paths = 0;
    std::uint64_t fine_steps = 0;
    std::uint64_t perturb_rejections = 0;
    ClampCounters clamps;
};

struct RoundContext {
    int round = 1;
    double epsilon = kInf;
    const ParticleCloud* prev = nullptr;
    const Eigen::MatrixXd* sigma_prev = nullptr;
    const Eigen::MatrixXd* sigma_chol = nullptr;
};

AbcRunResult run_core(const SimulationProblem& prob, const Dataset& dataset,
                      const UniformBoxPrior& prior, const AbcSettings& settings,
                      std::uint64_t master_seed, bool dc_mode) {
    prob.validate();
    prior.validate();
    if (prior.dim() != prob.infer_indices.size())
        throw config_error("prior dimension does not match the inferred parameters");
    if (dataset.interval_count() != prob.grid.n)
        throw config_error("dataset does not align with the simulation grid");
    if (dc_mode) settings.dc.validate();
    const std::size_t q = feature_count(prob.observed.size());
    if (settings.pretrain < 10 * q)
        throw config_error("pretraining set must hold at least 10x the feature count");

    AbcRunResult result;
    const std::size_t m = settings.m_particles;
    const std::size_t p_dim = prior.dim();
    const Eigen::MatrixXd y_obs = dataset.records_after_start();

    // Prior-predictive reference table.
    TrainingStore store;
    {
        std::vector<Eigen::MatrixXd> paths(settings.pretrain);
        std::vector<Eigen::VectorXd> thetas(settings.pretrain);
        parallel_for(settings.pretrain, settings.threads, [&](std::size_t g) {
            RngStream draw = RngStream::derived(master_seed, {kTagPretrain, g, 0});
            const Eigen::VectorXd theta_inf = prior.sample(draw);
            const Parameters theta = prob.materialize_theta(theta_inf);
            const Dataset ds = simulate_forward_dataset(
                prob, theta, derive_seed(master_seed, {kTagPretrain, g, 1}), nullptr, nullptr);
            paths[g] = ds.records_after_start();
            thetas[g] = theta_inf;
        });
        for (std::size_t g = 0; g < settings.pretrain; ++g)
            store.append(std::move(paths[g]), std::move(thetas[g]));
        result.pretrain_paths = settings.pretrain;
        result.pretrain_fine_steps = static_cast<std::uint64_t>(settings.pretrain) * prob.grid.fine_count();
    }

    SummaryModel model = SummaryModel::fit(store, settings.ridge);

    // Distance scale frozen from the first summary model over the
    // reference table.
    Eigen::MatrixXd ref_summaries(static_cast<Eigen::Index>(store.size()),
                                  static_cast<Eigen::Index>(p_dim));
    for (std::size_t g = 0; g < store.size(); ++g)
        ref_summaries.row(static_cast<Eigen::Index>(g)) = model.summarize(store.paths()[g]).transpose();
    const Eigen::VectorXd scale = mad_scale(ref_summaries);
    result.summary_scale = scale;

    std::uint64_t cum_attempts = 0, cum_paths = 0, cum_fine = 0;
    double prev_epsilon = kInf;

    for (std::size_t r = 1; r <= settings.r_max; ++r) {
        const auto t_start = std::chrono::steady_clock::now();
        RoundContext ctx;
        ctx.round = static_cast<int>(r);

        Eigen::MatrixXd sigma_prev, sigma_chol;
        if (r > 1) {
            ctx.prev = &result.clouds.back();
            if (settings.retrain_summaries) {
                SummaryModel refit = SummaryModel::fit(store, settings.ridge, &model);
                model = refit;
            }
            std::vector<double> prev_distances(ctx.prev->distances.data(),
                                               ctx.prev->distances.data() + ctx.prev->distances.size());
            ctx.epsilon = epsilon_update(prev_distances, settings.alpha_quantile);
            if (ctx.epsilon >= prev_epsilon) {
                result.early_stopped = true;
                result.stop_reason = "tolerance stopped decreasing";
                break;
            }
            sigma_prev = perturbation_covariance(*ctx.prev);
            sigma_chol = cholesky_lower(sigma_prev);
            ctx.sigma_prev = &sigma_prev;
            ctx.sigma_chol = &sigma_chol;
        }
        const Eigen::VectorXd s_obs = model.summarize(y_obs);

        std::vector<ProposalOutcome> slots(m);
        std::atomic<bool> abort{false};
        parallel_for(m, settings.threads, [&](std::size_t i) {
            ProposalOutcome& out = slots[i];
            for (std::uint64_t attempt = 0;; ++attempt) {
                if (abort.load(std::memory_order_relaxed)) return;
                if (attempt >= settings.slot_attempt_cap) {
                    out.gave_up = true;
                    abort.store(true, std::memory_order_relaxed);
                    return;
                }
                ++out.attempts;
                RngStream proposal_rng = RngStream::derived(master_seed, {kTagProposal, r, i, attempt});
                Eigen::VectorXd theta_inf;
                if (r == 1) {
                    theta_inf = prior.sample(proposal_rng);
                } else {
                    theta_inf = perturb(*ctx.prev, *ctx.sigma_chol, prior, proposal_rng,
                                        &out.perturb_rejections);
                }
                const Parameters theta = prob.materialize_theta(theta_inf);
                const std::uint64_t sim_seed = derive_seed(master_seed, {kTagSimulate, r, i, attempt});

                if (!dc_mode) {
                    const Dataset ds =
                        simulate_forward_dataset(prob, theta, sim_seed, &out.clamps, &out.fine_steps);
                    ++out.paths;
                    const Eigen::MatrixXd path = ds.records_after_start();
                    double d = kInf;
                    if (path.allFinite()) d = summary_distance(model.summarize(path), s_obs, scale);
                    if (r == 1 || d <= ctx.epsilon) {
                        out.theta = theta_inf;
                        out.distance = d;
                        out.weight = smc_particle_weight(theta_inf, prior, ctx.prev, ctx.sigma_prev);
                        out.train_path = path;
                        return;
                    }
                    continue;
                }

                DcSampleResult dc =
                    data_conditional_sample(prob, theta, dataset, settings.dc, sim_seed, 1);
                out.paths += dc.paths;
                out.fine_steps += dc.fine_steps;
                out.clamps += dc.clamps;
                if (dc.degenerate_weights) out.degenerate = true;
                double d = kInf;
                Eigen::VectorXd s_dc;
                if (dc.y_dc.allFinite()) {
                    s_dc = model.summarize(dc.y_dc);
                    d = summary_distance(s_dc, s_obs, scale);
                }
                if (r == 1 || d <= ctx.epsilon) {
                    const std::size_t p_paths = settings.dc.p_particles;
                    Eigen::MatrixXd fwd_sums(static_cast<Eigen::Index>(p_paths),
                                             static_cast<Eigen::Index>(p_dim));
                    Eigen::MatrixXd dc_sums(static_cast<Eigen::Index>(p_paths),
                                            static_cast<Eigen::Index>(p_dim));
                    bool stats_ok = std::isfinite(d);
                    if (stats_ok) {
                        for (std::size_t j = 0; j < p_paths && stats_ok; ++j) {
                            if (!dc.y_tilde[j].allFinite()) { stats_ok = false; break; }
                            fwd_sums.row(static_cast<Eigen::Index>(j)) =
                                model.summarize(dc.y_tilde[j]).transpose();
                        }
                        for (std::size_t mth = 0; mth < p_paths && stats_ok; ++mth) {
                            RngStream asm_rng =
                                RngStream::derived(sim_seed, {kTagDcAssembly, 1 + mth});
                            const Eigen::MatrixXd path = assemble_dc_path(dc.y_tilde, dc.weights, asm_rng);
                            dc_sums.row(static_cast<Eigen::Index>(mth)) =
                                model.summarize(path).transpose();
                        }
                    }
                    if (!stats_ok) {
                        if (r == 1) {
                            // keep the draw with zero weight rather than stall round 1
                            out.theta = theta_inf;
                            out.distance = d;
                            out.weight = 0.0;
                            out.weight_underflow = true;
                            out.train_path = Eigen::MatrixXd();
                            return;
                        }
                        continue;
                    }
                    const SyntheticLikelihoodStats stats = synthetic_likelihood_stats(fwd_sums, dc_sums);
                    const DcWeight w =
                        dc_particle_weight(theta_inf, s_dc, prior, ctx.prev, ctx.sigma_prev, stats);
                    out.theta = theta_inf;
                    out.distance = d;
                    out.weight = w.value;
                    out.weight_underflow = w.underflow;
                    out.train_path = dc.y_tilde[dc.closest_forward];
                    return;
                }
            }
        });

        if (abort.load()) {
            result.early_stopped = true;
            result.stop_reason = "a proposal slot exhausted its attempt budget";
            break;
        }

        ParticleCloud cloud;
        cloud.round = static_cast<int>(r);
        cloud.particles.resize(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(p_dim));
        cloud.weights.resize(static_cast<Eigen::Index>(m));
        cloud.distances.resize(static_cast<Eigen::Index>(m));
        cloud.perturb_cov = r > 1 ? *ctx.sigma_prev : Eigen::MatrixXd();

        RoundDiagnostics diag;
        diag.round = static_cast<int>(r);
        diag.epsilon = ctx.epsilon;
        ClampCounters round_clamps;
        for (std::size_t i = 0; i < m; ++i) {
            const ProposalOutcome& out = slots[i];
            cloud.particles.row(static_cast<Eigen::Index>(i)) = out.theta.transpose();
            cloud.weights(static_cast<Eigen::Index>(i)) = out.weight;
            cloud.distances(static_cast<Eigen::Index>(i)) = out.distance;
            diag.attempts += out.attempts;
            diag.paths += out.paths;
            diag.fine_steps += out.fine_steps;
            diag.perturb_rejections += out.perturb_rejections;
            if (out.weight_underflow) ++diag.weight_underflows;
            if (out.degenerate) ++diag.degenerate_weight_events;
            round_clamps += out.clamps;
        }
        const double wsum = cloud.weights.sum();
        if (!(wsum > 0.0) || !std::isfinite(wsum)) {
            cloud.weights.setConstant(1.0 / static_cast<double>(m));
            ++diag.weight_underflows;
        } else {
            cloud.weights /= wsum;
        }

        // Append accepted training pairs in slot order.
        if (settings.retrain_summaries) {
            for (std::size_t i = 0; i < m; ++i)
                if (slots[i].train_path.size() > 0)
                    store.append(slots[i].train_path, slots[i].theta);
        }

        cum_attempts += diag.attempts;
        cum_paths += diag.paths;
        cum_fine += diag.fine_steps;
        diag.cumulative_attempts = cum_attempts;
        diag.cumulative_paths = cum_paths;
        diag.cumulative_fine_steps = cum_fine;
        diag.acceptance_rate = static_cast<double>(m) / static_cast<double>(diag.attempts);
        diag.clamp_total = round_clamps.total();
        diag.ess = cloud.effective_sample_size();
        diag.wall_seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();

        result.clouds.push_back(std::move(cloud));
        result.diagnostics.push_back(diag);
        prev_epsilon = ctx.epsilon;

        if (diag.acceptance_rate < settings.acceptance_floor) {
            result.early_stopped = true;
            result.stop_reason = "acceptance rate fell below the floor";
            break;
        }
    }

    result.final_summary_model = model;
    return result;
}

} // namespace

AbcRunResult run_abc_smc(const SimulationProblem& prob, const Dataset& dataset,
                         const UniformBoxPrior& prior, const AbcSettings& settings,
                         std::uint64_t master_seed) {
    return run_core(prob, dataset, prior, settings, master_seed, false);
}

AbcRunResult run_abc_smc_dc(const SimulationProblem& prob, const Dataset& dataset,
                            const UniformBoxPrior& prior, const AbcSettings& settings,
                            std::uint64_t master_seed) {
    return run_core(prob, dataset, prior, settings, master_seed, true);
}

} // namespace cirsplit
