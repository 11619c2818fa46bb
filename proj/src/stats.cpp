#include "cirsplit/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "cirsplit/errors.hpp"

namespace cirsplit {

double mean(std::span<const double> xs) {
    if (xs.empty()) return 0.0;
    double s = 0.0;
    for (double x : xs) s += x;
    return s / static_cast<double>(xs.size());
}

double variance(std::span<const double> xs) {
    const std::size_t n = xs.size();
    if (n < 2) return 0.0;
    const double m = mean(xs);
    double s = 0.0;
    for (double x : xs) s += (x - m) * (x - m);
    return s / static_cast<double>(n - 1);
}

double standard_deviation(std::span<const double> xs) { return std::sqrt(variance(xs)); }

double mean_standard_error(std::span<const double> xs) {
    if (xs.empty()) return 0.0;
    return standard_deviation(xs) / std::sqrt(static_cast<double>(xs.size()));
}

double variance_standard_error(std::span<const double> xs) {
    const std::size_t n = xs.size();
    if (n < 4) return 0.0;
    const double m = mean(xs);
    double m2 = 0.0, m4 = 0.0;
    for (double x : xs) {
        const double d2 = (x - m) * (x - m);
        m2 += d2;
        m4 += d2 * d2;
    }
    m2 /= static_cast<double>(n);
    m4 /= static_cast<double>(n);
    const double nn = static_cast<double>(n);
    const double var_of_var = (m4 - (nn - 3.0) / (nn - 1.0) * m2 * m2) / nn;
    return std::sqrt(std::max(0.0, var_of_var));
}

double quantile(std::vector<double> xs, double level) {
    if (xs.empty()) throw config_error("quantile of empty sample");
    std::sort(xs.begin(), xs.end());
    if (level <= 0.0) return xs.front();
    if (level >= 1.0) return xs.back();
    const double pos = level * static_cast<double>(xs.size() - 1);
    const std::size_t lo = static_cast<std::size_t>(pos);
    const double frac = pos - static_cast<double>(lo);
    if (lo + 1 >= xs.size()) return xs.back();
    return xs[lo] + frac * (xs[lo + 1] - xs[lo]);
}

double weighted_quantile(std::span<const double> xs, std::span<const double> weights, double level) {
    if (xs.empty() || xs.size() != weights.size()) throw config_error("weighted_quantile: bad inputs");
    std::vector<std::size_t> order(xs.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return xs[a] < xs[b]; });
    double total = 0.0;
    for (double w : weights) total += w;
    const double target = level * total;
    double acc = 0.0;
    for (std::size_t i : order) {
        acc += weights[i];
        if (acc >= target) return xs[i];
    }
    return xs[order.back()];
}

double ks_distance(std::vector<double> a, std::vector<double> b) {
    if (a.empty() || b.empty()) throw config_error("ks_distance: empty sample");
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    const double na = static_cast<double>(a.size());
    const double nb = static_cast<double>(b.size());
    std::size_t ia = 0, ib = 0;
    double d = 0.0;
    while (ia < a.size() && ib < b.size()) {
        const double x = std::min(a[ia], b[ib]);
        while (ia < a.size() && a[ia] <= x) ++ia;
        while (ib < b.size() && b[ib] <= x) ++ib;
        d = std::max(d, std::abs(static_cast<double>(ia) / na - static_cast<double>(ib) / nb));
    }
    return d;
}

double log_sum_exp(std::span<const double> xs) {
    double hi = -std::numeric_limits<double>::infinity();
    for (double x : xs) hi = std::max(hi, x);
    if (!std::isfinite(hi)) return hi;
    double s = 0.0;
    for (double x : xs) s += std::exp(x - hi);
    return hi + std::log(s);
}

Eigen::VectorXd row_mean(const Eigen::MatrixXd& rows) {
    return rows.colwise().mean().transpose();
}

Eigen::MatrixXd row_covariance(const Eigen::MatrixXd& rows, double jitter) {
    const auto n = rows.rows();
    const auto p = rows.cols();
    Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(p, p);
    if (n >= 2) {
        Eigen::MatrixXd centered = rows.rowwise() - rows.colwise().mean();
        cov = centered.transpose() * centered / static_cast<double>(n - 1);
    }
    cov += jitter * Eigen::MatrixXd::Identity(p, p);
    return cov;
}

Eigen::MatrixXd weighted_covariance(const Eigen::MatrixXd& rows, const Eigen::VectorXd& weights) {
    const auto p = rows.cols();
    const double total = weights.sum();
    if (rows.rows() != weights.size() || total <= 0.0)
        throw config_error("weighted_covariance: bad inputs");
    Eigen::VectorXd w = weights / total;
    Eigen::VectorXd mu = rows.transpose() * w;
    Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(p, p);
    for (Eigen::Index i = 0; i < rows.rows(); ++i) {
        Eigen::VectorXd d = rows.row(i).transpose() - mu;
        cov += w(i) * d * d.transpose();
    }
    return cov;
}

double mvn_log_density(const Eigen::VectorXd& x, const Eigen::VectorXd& mean,
                       const Eigen::MatrixXd& cov) {
    const auto d = x.size();
    if (mean.size() != d || cov.rows() != d || cov.cols() != d)
        throw config_error("mvn_log_density: dimension mismatch");
    Eigen::LLT<Eigen::MatrixXd> llt(cov);
    if (llt.info() != Eigen::Success) {
        Eigen::MatrixXd jittered = cov + 1e-10 * Eigen::MatrixXd::Identity(d, d);
        llt.compute(jittered);
        if (llt.info() != Eigen::Success)
            throw numeric_error("mvn_log_density: covariance not PSD after jitter");
    }
    const Eigen::MatrixXd L = llt.matrixL();
    double log_det = 0.0;
    for (Eigen::Index i = 0; i < d; ++i) log_det += 2.0 * std::log(L(i, i));
    const Eigen::VectorXd z = llt.matrixL().solve(x - mean);
    constexpr double log_two_pi = 1.8378770664093453;
    return -0.5 * (static_cast<double>(d) * log_two_pi + log_det + z.squaredNorm());
}

namespace {

// A series whose spread is at rounding level relative to its magnitude is
// treated as constant.
bool effectively_constant(std::span<const double> xs, double m, double sum_sq_dev) {
    const double scale = 1.0 + std::abs(m);
    return sum_sq_dev <= static_cast<double>(xs.size()) * 1e-20 * scale * scale;
}

} // namespace

double correlation(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size() || a.size() < 2) return 0.0;
    const double ma = mean(a), mb = mean(b);
    double saa = 0.0, sbb = 0.0, sab = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        saa += (a[i] - ma) * (a[i] - ma);
        sbb += (b[i] - mb) * (b[i] - mb);
        sab += (a[i] - ma) * (b[i] - mb);
    }
    if (effectively_constant(a, ma, saa) || effectively_constant(b, mb, sbb)) return 0.0;
    const double denom = std::sqrt(saa * sbb);
    if (denom < 1e-300) return 0.0;
    return sab / denom;
}

double autocorrelation(std::span<const double> xs, std::size_t lag) {
    const std::size_t n = xs.size();
    if (n <= lag + 1) return 0.0;
    const double m = mean(xs);
    double denom = 0.0;
    for (double x : xs) denom += (x - m) * (x - m);
    if (effectively_constant(xs, m, denom)) return 0.0;
    double num = 0.0;
    for (std::size_t i = 0; i + lag < n; ++i) num += (xs[i] - m) * (xs[i + lag] - m);
    return num / denom;
}

namespace {

// Regularized lower incomplete gamma P(a, x) by series / continued fraction.
double gamma_p(double a, double x) {
    if (x <= 0.0) return 0.0;
    const double log_gamma_a = std::lgamma(a);
    if (x < a + 1.0) {
        double term = 1.0 / a;
        double sum = term;
        double ap = a;
        for (int i = 0; i < 500; ++i) {
            ap += 1.0;
            term *= x / ap;
            sum += term;
            if (std::abs(term) < std::abs(sum) * 1e-15) break;
        }
        return sum * std::exp(-x + a * std::log(x) - log_gamma_a);
    }
    // Lentz continued fraction for Q(a, x).
    double b = x + 1.0 - a;
    double c = 1e300;
    double d = 1.0 / b;
    double h = d;
    for (int i = 1; i < 500; ++i) {
        const double an = -static_cast<double>(i) * (static_cast<double>(i) - a);
        b += 2.0;
        d = an * d + b;
        if (std::abs(d) < 1e-300) d = 1e-300;
        c = b + an / c;
        if (std::abs(c) < 1e-300) c = 1e-300;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::abs(del - 1.0) < 1e-15) break;
    }
    const double q = std::exp(-x + a * std::log(x) - log_gamma_a) * h;
    return 1.0 - q;
}

} // namespace

double chi_square_cdf(double x, double dof) {
    return gamma_p(dof / 2.0, x / 2.0);
}

} // namespace cirsplit
