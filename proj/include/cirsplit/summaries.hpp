#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

namespace cirsplit {

/// Deterministic path features: per channel mean, sd, lag-1 and lag-2
/// autocorrelation, min, max, sd of first differences, first and last
/// value; then pairwise channel correlations. The path is (time x channel).
Eigen::VectorXd featurize(const Eigen::MatrixXd& path);

/// Feature dimension for a given channel count.
std::size_t feature_count(std::size_t channels);

/// Growing set of (path, parameter) pairs at observation resolution.
class TrainingStore {
public:
    void append(Eigen::MatrixXd path, Eigen::VectorXd theta);
    std::size_t size() const { return paths_.size(); }
    const std::vector<Eigen::MatrixXd>& paths() const { return paths_; }
    const std::vector<Eigen::VectorXd>& thetas() const { return thetas_; }

private:
    std::vector<Eigen::MatrixXd> paths_;
    std::vector<Eigen::VectorXd> thetas_;
};

/// Per-parameter ridge regression of theta on standardized path features;
/// the prediction estimates the posterior mean and serves as the summary.
class SummaryModel {
public:
    SummaryModel() = default;

    bool fitted() const { return fitted_; }
    std::size_t parameter_dim() const { return static_cast<std::size_t>(coeff_.rows()); }
    std::size_t feature_dim() const { return static_cast<std::size_t>(feat_mean_.size()); }

    Eigen::VectorXd summarize(const Eigen::MatrixXd& path) const;
    Eigen::VectorXd summarize_features(const Eigen::VectorXd& features) const;

    std::string to_json() const;
    static SummaryModel from_json(const std::string& text);

    /// Ridge fit (penalty on standardized features, unpenalized intercept).
    /// Falls back to `previous` when the store holds fewer than
    /// 10 x feature_count pairs.
    static SummaryModel fit(const TrainingStore& store, double ridge = 1e-6,
                            const SummaryModel* previous = nullptr);

private:
    Eigen::MatrixXd coeff_;     // p x q slopes
    Eigen::VectorXd intercept_; // p
    Eigen::VectorXd feat_mean_; // q
    Eigen::VectorXd feat_scale_; // q
    bool fitted_ = false;
    static constexpr int kSchemaVersion = 1;
};

/// Euclidean distance of componentwise scaled differences; every scale
/// entry must be positive.
double summary_distance(const Eigen::VectorXd& s1, const Eigen::VectorXd& s2,
                        const Eigen::VectorXd& scale);

/// Componentwise median absolute deviation of summary rows, floored away
/// from zero so it can serve as a distance scale.
Eigen::VectorXd mad_scale(const Eigen::MatrixXd& summaries);

} // namespace cirsplit
