#include "cirsplit/summaries.hpp"

#include <algorithm>
#include <cmath>

#include <nlohmann/json.hpp>

#include "cirsplit/errors.hpp"
#include "cirsplit/stats.hpp"

namespace cirsplit {

std::size_t feature_count(std::size_t channels) {
    return 9 * channels + channels * (channels - 1) / 2;
}

Eigen::VectorXd featurize(const Eigen::MatrixXd& path) {
    const auto n = path.rows();
    const auto c = path.cols();
    if (n < 1 || c < 1) throw config_error("featurize: empty path");
    if (!path.allFinite()) throw config_error("featurize: non-finite path");

    Eigen::VectorXd out(static_cast<Eigen::Index>(feature_count(static_cast<std::size_t>(c))));
    Eigen::Index pos = 0;
    std::vector<double> col(static_cast<std::size_t>(n));
    std::vector<double> diffs(n > 1 ? static_cast<std::size_t>(n - 1) : 0);

    for (Eigen::Index j = 0; j < c; ++j) {
        for (Eigen::Index i = 0; i < n; ++i) col[static_cast<std::size_t>(i)] = path(i, j);
        for (Eigen::Index i = 0; i + 1 < n; ++i)
            diffs[static_cast<std::size_t>(i)] = path(i + 1, j) - path(i, j);
        out(pos++) = mean(col);
        out(pos++) = standard_deviation(col);
        out(pos++) = autocorrelation(col, 1);
        out(pos++) = autocorrelation(col, 2);
        out(pos++) = path.col(j).minCoeff();
        out(pos++) = path.col(j).maxCoeff();
        out(pos++) = standard_deviation(diffs);
        out(pos++) = path(0, j);
        out(pos++) = path(n - 1, j);
    }
    for (Eigen::Index a = 0; a < c; ++a) {
        for (Eigen::Index b = a + 1; b < c; ++b) {
            std::vector<double> ca(static_cast<std::size_t>(n)), cb(static_cast<std::size_t>(n));
            for (Eigen::Index i = 0; i < n; ++i) {
                ca[static_cast<std::size_t>(i)] = path(i, a);
                cb[static_cast<std::size_t>(i)] = path(i, b);
            }
            out(pos++) = correlation(ca, cb);
        }
    }
    return out;
}

void TrainingStore::append(Eigen::MatrixXd path, Eigen::VectorXd theta) {
    if (!paths_.empty()) {
        if (path.cols() != paths_.front().cols() || theta.size() != thetas_.front().size())
            throw config_error("training pair shape mismatch");
    }
    paths_.push_back(std::move(path));
    thetas_.push_back(std::move(theta));
}

Eigen::VectorXd SummaryModel::summarize_features(const Eigen::VectorXd& features) const {
    if (!fitted_) throw config_error("summary model not fitted");
    if (features.size() != feat_mean_.size()) throw config_error("feature dimension mismatch");
    const Eigen::VectorXd z = (features - feat_mean_).cwiseQuotient(feat_scale_);
    return intercept_ + coeff_ * z;
}

Eigen::VectorXd SummaryModel::summarize(const Eigen::MatrixXd& path) const {
    return summarize_features(featurize(path));
}

SummaryModel SummaryModel::fit(const TrainingStore& store, double ridge,
                               const SummaryModel* previous) {
    if (store.size() == 0) throw config_error("summary fit: empty store");
    const std::size_t n = store.size();
    const auto q = feature_count(static_cast<std::size_t>(store.paths().front().cols()));
    if (n < 10 * q) {
        if (previous != nullptr && previous->fitted()) return *previous;
        throw config_error("summary fit: too few pairs and no previous model");
    }
    const auto p = static_cast<std::size_t>(store.thetas().front().size());

    Eigen::MatrixXd x(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(q));
    Eigen::MatrixXd y(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(p));
    for (std::size_t i = 0; i < n; ++i) {
        x.row(static_cast<Eigen::Index>(i)) = featurize(store.paths()[i]).transpose();
        y.row(static_cast<Eigen::Index>(i)) = store.thetas()[i].transpose();
    }

    SummaryModel model;
    model.feat_mean_ = x.colwise().mean().transpose();
    Eigen::MatrixXd centered = x.rowwise() - model.feat_mean_.transpose();
    model.feat_scale_.resize(static_cast<Eigen::Index>(q));
    for (Eigen::Index j = 0; j < centered.cols(); ++j) {
        const double sd = std::sqrt(centered.col(j).squaredNorm() / static_cast<double>(n - 1));
        model.feat_scale_(j) = sd > 1e-12 ? sd : 1.0;
    }
    for (Eigen::Index j = 0; j < centered.cols(); ++j) centered.col(j) /= model.feat_scale_(j);

    const Eigen::MatrixXd gram =
        centered.transpose() * centered +
        ridge * Eigen::MatrixXd::Identity(static_cast<Eigen::Index>(q), static_cast<Eigen::Index>(q));
    Eigen::LDLT<Eigen::MatrixXd> solver(gram);
    if (solver.info() != Eigen::Success) throw numeric_error("summary fit: singular design");

    model.intercept_ = y.colwise().mean().transpose();
    Eigen::MatrixXd y_centered = y.rowwise() - model.intercept_.transpose();
    model.coeff_ = solver.solve(centered.transpose() * y_centered).transpose();
    model.fitted_ = true;
    return model;
}

std::string SummaryModel::to_json() const {
    nlohmann::json doc;
    doc["schema_version"] = kSchemaVersion;
    doc["fitted"] = fitted_;
    auto vec = [](const Eigen::VectorXd& v) {
        return std::vector<double>(v.data(), v.data() + v.size());
    };
    doc["intercept"] = vec(intercept_);
    doc["feat_mean"] = vec(feat_mean_);
    doc["feat_scale"] = vec(feat_scale_);
    std::vector<std::vector<double>> rows;
    for (Eigen::Index i = 0; i < coeff_.rows(); ++i) {
        std::vector<double> row(static_cast<std::size_t>(coeff_.cols()));
        for (Eigen::Index j = 0; j < coeff_.cols(); ++j)
            row[static_cast<std::size_t>(j)] = coeff_(i, j);
        rows.push_back(std::move(row));
    }
    doc["coeff"] = rows;
    return doc.dump(2);
}

SummaryModel SummaryModel::from_json(const std::string& text) {
    nlohmann::json doc = nlohmann::json::parse(text);
    if (doc.at("schema_version").get<int>() != kSchemaVersion)
        throw config_error("summary model schema version mismatch");
    SummaryModel model;
    auto to_vec = [](const nlohmann::json& a) {
        Eigen::VectorXd v(static_cast<Eigen::Index>(a.size()));
        for (std::size_t i = 0; i < a.size(); ++i) v(static_cast<Eigen::Index>(i)) = a[i].get<double>();
        return v;
    };
    model.intercept_ = to_vec(doc.at("intercept"));
    model.feat_mean_ = to_vec(doc.at("feat_mean"));
    model.feat_scale_ = to_vec(doc.at("feat_scale"));
    const auto& rows = doc.at("coeff");
    model.coeff_.resize(static_cast<Eigen::Index>(rows.size()), model.feat_mean_.size());
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t j = 0; j < rows[i].size(); ++j)
            model.coeff_(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
                rows[i][j].get<double>();
    model.fitted_ = doc.at("fitted").get<bool>();
    return model;
}

double summary_distance(const Eigen::VectorXd& s1, const Eigen::VectorXd& s2,
                        const Eigen::VectorXd& scale) {
    if (s1.size() != s2.size() || s1.size() != scale.size())
        throw config_error("summary_distance: dimension mismatch");
    if ((scale.array() <= 0.0).any()) throw config_error("summary_distance: scale must be positive");
    return ((s1 - s2).cwiseQuotient(scale)).norm();
}

Eigen::VectorXd mad_scale(const Eigen::MatrixXd& summaries) {
    const auto n = summaries.rows();
    const auto p = summaries.cols();
    if (n < 2) throw config_error("mad_scale: need at least two rows");
    Eigen::VectorXd scale(p);
    std::vector<double> buf(static_cast<std::size_t>(n));
    for (Eigen::Index j = 0; j < p; ++j) {
        for (Eigen::Index i = 0; i < n; ++i) buf[static_cast<std::size_t>(i)] = summaries(i, j);
        const double med = quantile(buf, 0.5);
        for (double& v : buf) v = std::abs(v - med);
        double mad = quantile(buf, 0.5);
        if (mad <= 1e-12) {
            // fall back to the spread, then to unity
            for (Eigen::Index i = 0; i < n; ++i) buf[static_cast<std::size_t>(i)] = summaries(i, j);
            mad = standard_deviation(buf);
            if (mad <= 1e-12) mad = 1.0;
        }
        scale(j) = mad;
    }
    return scale;
}

} // namespace cirsplit
