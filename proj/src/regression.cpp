#include "zslkit/regression.hpp"

#include "zslkit/error.hpp"
#include "zslkit/parallel.hpp"
#include "zslkit/smo.hpp"

#include <algorithm>
#include <cmath>
#include <map>

namespace zslkit {

void SvrConfig::validate() const {
    if (!(c > 0.0) || !std::isfinite(c)) {
        throw InvalidArgument("SVR C must be positive");
    }
    if (!(epsilon >= 0.0) || !std::isfinite(epsilon)) {
        throw InvalidArgument("SVR epsilon must be non-negative");
    }
    if (!(tolerance > 0.0)) {
        throw InvalidArgument("SVR tolerance must be positive");
    }
    if (max_passes == 0) {
        throw InvalidArgument("SVR max_passes must be positive");
    }
}

double SvrModel::evaluate(std::span<const double> kernel_row) const {
    double v = bias;
    for (std::size_t s = 0; s < support_indices.size(); ++s) {
        v += dual_coefficients[s] * kernel_row[support_indices[s]];
    }
    return v;
}

namespace {

void check_gram(const Eigen::MatrixXd &gram, std::size_t targets) {
    if (gram.rows() != gram.cols()) {
        throw InvalidArgument("Gram matrix must be square");
    }
    if (static_cast<std::size_t>(gram.rows()) != targets) {
        throw InvalidArgument("Gram matrix has " + std::to_string(gram.rows()) + " rows but there are " + std::to_string(targets) + " targets");
    }
    if (targets < 2) {
        throw InvalidArgument("SVR needs at least two samples");
    }
    const double scale = std::max(1.0, gram.cwiseAbs().maxCoeff());
    if ((gram - gram.transpose()).cwiseAbs().maxCoeff() > 1e-9 * scale) {
        throw InvalidArgument("Gram matrix is not symmetric");
    }
}

}  // namespace

SvrModel train_svr(const Eigen::MatrixXd &gram, std::span<const double> targets, const SvrConfig &config) {
    config.validate();
    check_gram(gram, targets.size());
    if (!std::all_of(targets.begin(), targets.end(), [](double y) { return std::isfinite(y); })) {
        throw InvalidArgument("SVR targets must be finite");
    }

    const std::size_t n = targets.size();
    DualProblem problem;
    problem.kernel = &gram;
    problem.c = config.c;
    problem.row.resize(2 * n);
    problem.sign.resize(2 * n);
    problem.linear.resize(2 * n);
    for (std::size_t i = 0; i < n; ++i) {
        problem.row[i] = i;
        problem.sign[i] = 1;
        problem.linear[i] = config.epsilon - targets[i];
        problem.row[i + n] = i;
        problem.sign[i + n] = -1;
        problem.linear[i + n] = config.epsilon + targets[i];
    }
    DualSettings settings;
    settings.tolerance = config.tolerance;
    settings.max_iterations = config.max_passes * 2 * n;

    const DualSolution solution = solve_dual(problem, settings);

    SvrModel model;
    model.bias = -solution.rho;
    model.dual_objective = solution.objective;
    model.iterations = solution.iterations;
    for (std::size_t i = 0; i < n; ++i) {
        const double coef = solution.alpha[i] - solution.alpha[i + n];
        if (coef != 0.0) {
            model.support_indices.push_back(i);
            model.dual_coefficients.push_back(coef);
        }
    }
    return model;
}

SemanticRegressor::SemanticRegressor(KernelSpec kernel, std::vector<FeatureVector> pool, std::vector<SvrModel> models, std::size_t feature_dimension)
    : kernel_{ kernel }, pool_{ std::move(pool) }, models_{ std::move(models) }, feature_dim_{ feature_dimension } {
    kernel_.validate();
    if (models_.empty()) {
        throw InvalidArgument("semantic regressor needs at least one output dimension");
    }
    if (feature_dim_ == 0 && !pool_.empty()) {
        feature_dim_ = pool_.front().size();
    }
    for (const auto &x : pool_) {
        if (x.size() != feature_dim_) {
            throw InvalidArgument("support vectors differ in length");
        }
    }
    for (auto &m : models_) {
        if (m.support_indices.size() != m.dual_coefficients.size()) {
            throw InvalidArgument("support index and coefficient counts differ");
        }
        for (const auto idx : m.support_indices) {
            if (idx >= pool_.size()) {
                throw InvalidArgument("support index outside the shared pool");
            }
        }
        m.kernel = kernel_;
    }
}

EmbeddingVector SemanticRegressor::predict(const FeatureVector &x) const {
    if (feature_dim_ != 0 && x.size() != feature_dim_) {
        throw InvalidArgument("feature vector has length " + std::to_string(x.size()) + ", regressor expects " + std::to_string(feature_dim_));
    }
    std::vector<double> row(pool_.size());
    for (std::size_t m = 0; m < pool_.size(); ++m) {
        row[m] = kernel_value(kernel_, pool_[m].bins, x.bins);
    }
    EmbeddingVector z{ std::vector<double>(models_.size()), false };
    for (std::size_t j = 0; j < models_.size(); ++j) {
        z.values[j] = models_[j].evaluate(row);
    }
    return z;
}

std::vector<EmbeddingVector> SemanticRegressor::predict(const std::vector<FeatureVector> &xs) const {
    std::vector<EmbeddingVector> out(xs.size());
    parallel_for(xs.size(), [&](std::size_t i) { out[i] = predict(xs[i]); });
    return out;
}

SemanticRegressor train_semantic_regressor(const std::vector<FeatureVector> &features,
                                           const std::vector<EmbeddingVector> &embeddings,
                                           const SvrConfig &config,
                                           const KernelSpec &kernel) {
    config.validate();
    kernel.validate();
    if (features.size() != embeddings.size()) {
        throw InvalidArgument("feature and embedding counts differ: " + std::to_string(features.size()) + " vs " + std::to_string(embeddings.size()));
    }
    if (features.size() < 2) {
        throw InvalidArgument("regressor training needs at least two samples");
    }
    const std::size_t d_x = features.front().size();
    const std::size_t d_z = embeddings.front().size();
    if (d_z == 0) {
        throw InvalidArgument("embedding dimension must be positive");
    }
    for (std::size_t i = 0; i < features.size(); ++i) {
        if (features[i].size() != d_x) {
            throw InvalidArgument("feature vector " + std::to_string(i) + " has length " + std::to_string(features[i].size()) + ", expected " + std::to_string(d_x));
        }
        if (embeddings[i].size() != d_z) {
            throw InvalidArgument("embedding " + std::to_string(i) + " has length " + std::to_string(embeddings[i].size()) + ", expected " + std::to_string(d_z));
        }
    }

    const auto views = views_of(features);
    const Eigen::MatrixXd gram = gram_matrix(kernel, views);

    std::vector<SvrModel> models(d_z);
    parallel_for(d_z, [&](std::size_t j) {
        std::vector<double> targets(features.size());
        for (std::size_t i = 0; i < features.size(); ++i) {
            targets[i] = embeddings[i].values[j];
        }
        models[j] = train_svr(gram, targets, config);
    });

    // Union of support samples, in training order, becomes the shared pool.
    std::map<std::size_t, std::size_t> remap;
    for (const auto &m : models) {
        for (const auto idx : m.support_indices) {
            remap.emplace(idx, 0);
        }
    }
    std::vector<FeatureVector> pool;
    pool.reserve(remap.size());
    for (auto &[sample, slot] : remap) {
        slot = pool.size();
        pool.push_back(features[sample]);
    }
    for (auto &m : models) {
        for (auto &idx : m.support_indices) {
            idx = remap.at(idx);
        }
    }
    return SemanticRegressor{ kernel, std::move(pool), std::move(models), d_x };
}

}  // namespace zslkit
