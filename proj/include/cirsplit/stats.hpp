#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <span>
#include <vector>

namespace cirsplit {

double mean(std::span<const double> xs);
double variance(std::span<const double> xs); // unbiased
double standard_deviation(std::span<const double> xs);

/// Standard error of the sample mean.
double mean_standard_error(std::span<const double> xs);
/// Standard error of the unbiased sample variance, via the fourth moment.
double variance_standard_error(std::span<const double> xs);

/// Linear-interpolation quantile (the common "type 7" convention):
/// position (n-1)*level in the sorted sample.
double quantile(std::vector<double> xs, double level);

/// Step-function inverse of the weighted CDF; weights need not be normalized.
double weighted_quantile(std::span<const double> xs, std::span<const double> weights, double level);

/// Two-sample Kolmogorov-Smirnov distance sup_x |F1 - F2|.
double ks_distance(std::vector<double> a, std::vector<double> b);

/// log(sum(exp(xs))) guarded against overflow; -inf for an empty set.
double log_sum_exp(std::span<const double> xs);

/// Sample mean of rows.
Eigen::VectorXd row_mean(const Eigen::MatrixXd& rows);
/// Unbiased sample covariance of rows, plus `jitter` on the diagonal.
Eigen::MatrixXd row_covariance(const Eigen::MatrixXd& rows, double jitter = 0.0);

/// Covariance about the weighted mean with normalized weights
/// (plain second moment, no small-sample correction).
Eigen::MatrixXd weighted_covariance(const Eigen::MatrixXd& rows, const Eigen::VectorXd& weights);

/// Multivariate Gaussian log-density. Near-singular covariances get a
/// +1e-10*I retry; failure after that throws numeric_error.
double mvn_log_density(const Eigen::VectorXd& x, const Eigen::VectorXd& mean,
                       const Eigen::MatrixXd& cov);

/// Pearson correlation; 0 when either side is (numerically) constant.
double correlation(std::span<const double> a, std::span<const double> b);

/// Lag-k autocorrelation about the sample mean; 0 for constant series.
double autocorrelation(std::span<const double> xs, std::size_t lag);

/// Chi-square upper-tail critical value by bisection on the regularized
/// gamma CDF (small dof only; used by goodness-of-fit checks).
double chi_square_cdf(double x, double dof);

} // namespace cirsplit
