#include "zslkit/classifier.hpp"

#include "zslkit/error.hpp"
#include "zslkit/parallel.hpp"
#include "zslkit/smo.hpp"

#include <algorithm>
#include <cmath>
#include <map>

namespace zslkit {

void SvcConfig::validate() const {
    if (!(c > 0.0) || !std::isfinite(c)) {
        throw InvalidArgument("SVC C must be positive");
    }
    if (!(tolerance > 0.0)) {
        throw InvalidArgument("SVC tolerance must be positive");
    }
    if (max_passes == 0) {
        throw InvalidArgument("SVC max_passes must be positive");
    }
}

double BinarySvc::evaluate(std::span<const double> kernel_row) const {
    double v = bias;
    for (std::size_t s = 0; s < support_indices.size(); ++s) {
        v += coefficients[s] * kernel_row[support_indices[s]];
    }
    return v;
}

BinarySvc train_binary_svc(const Eigen::MatrixXd &gram, std::span<const int> labels, const SvcConfig &config) {
    config.validate();
    const std::size_t n = labels.size();
    if (gram.rows() != gram.cols() || static_cast<std::size_t>(gram.rows()) != n) {
        throw InvalidArgument("Gram matrix does not match the label count");
    }
    bool has_pos = false;
    bool has_neg = false;
    DualProblem problem;
    problem.kernel = &gram;
    problem.c = config.c;
    problem.row.resize(n);
    problem.sign.resize(n);
    problem.linear.assign(n, -1.0);
    for (std::size_t i = 0; i < n; ++i) {
        if (labels[i] != 1 && labels[i] != -1) {
            throw InvalidArgument("binary labels must be +1 or -1");
        }
        has_pos = has_pos || labels[i] == 1;
        has_neg = has_neg || labels[i] == -1;
        problem.row[i] = i;
        problem.sign[i] = static_cast<std::int8_t>(labels[i]);
    }
    if (!has_pos || !has_neg) {
        throw InvalidArgument("binary SVM needs both positive and negative samples");
    }
    DualSettings settings;
    settings.tolerance = config.tolerance;
    settings.max_iterations = config.max_passes * n;
    const DualSolution solution = solve_dual(problem, settings);

    BinarySvc machine;
    machine.bias = -solution.rho;
    machine.dual_objective = solution.objective;
    machine.iterations = solution.iterations;
    for (std::size_t i = 0; i < n; ++i) {
        if (solution.alpha[i] > 0.0) {
            machine.support_indices.push_back(i);
            machine.coefficients.push_back(labels[i] * solution.alpha[i]);
        }
    }
    return machine;
}

std::size_t argmax_decision(std::span<const double> decision_values) {
    if (decision_values.empty()) {
        throw InvalidArgument("no decision values");
    }
    std::size_t best = 0;
    for (std::size_t k = 1; k < decision_values.size(); ++k) {
        if (decision_values[k] > decision_values[best]) {
            best = k;
        }
    }
    return best;
}

SvcModel::SvcModel(KernelSpec kernel, std::vector<Label> classes, std::vector<EmbeddingVector> pool, std::vector<BinarySvc> machines)
    : kernel_{ kernel }, classes_{ std::move(classes) }, pool_{ std::move(pool) }, machines_{ std::move(machines) } {
    kernel_.validate();
    if (classes_.size() < 2) {
        throw InvalidArgument("classifier needs at least two classes");
    }
    if (machines_.size() != classes_.size()) {
        throw InvalidArgument("one binary machine per class is required");
    }
    if (!pool_.empty()) {
        dimension_ = pool_.front().size();
    }
    for (const auto &p : pool_) {
        if (p.size() != dimension_) {
            throw InvalidArgument("support points differ in length");
        }
    }
    for (const auto &m : machines_) {
        if (m.support_indices.size() != m.coefficients.size()) {
            throw InvalidArgument("support index and coefficient counts differ");
        }
        for (const auto idx : m.support_indices) {
            if (idx >= pool_.size()) {
                throw InvalidArgument("support index outside the pool");
            }
        }
    }
}

std::vector<double> SvcModel::decision_values(const EmbeddingVector &point) const {
    if (dimension_ != 0 && point.size() != dimension_) {
        throw InvalidArgument("point has dimension " + std::to_string(point.size()) + ", classifier expects " + std::to_string(dimension_));
    }
    std::vector<double> row(pool_.size());
    for (std::size_t m = 0; m < pool_.size(); ++m) {
        row[m] = kernel_value(kernel_, pool_[m].values, point.values);
    }
    std::vector<double> values(machines_.size());
    for (std::size_t c = 0; c < machines_.size(); ++c) {
        values[c] = machines_[c].evaluate(row);
    }
    return values;
}

const Label &SvcModel::classify(const EmbeddingVector &point) const {
    return classes_[argmax_decision(decision_values(point))];
}

SvcModel train_svc(const std::vector<EmbeddingVector> &points, const std::vector<Label> &labels, const SvcConfig &config, KernelSpec kernel) {
    config.validate();
    if (points.size() != labels.size()) {
        throw InvalidArgument("point and label counts differ");
    }
    if (points.empty()) {
        throw InvalidArgument("no training points");
    }
    const std::size_t dim = points.front().size();
    for (const auto &p : points) {
        if (p.size() != dim) {
            throw InvalidArgument("training points differ in dimension");
        }
    }

    std::vector<Label> classes;
    std::vector<std::size_t> class_of(points.size());
    for (std::size_t i = 0; i < labels.size(); ++i) {
        const auto it = std::find(classes.begin(), classes.end(), labels[i]);
        class_of[i] = static_cast<std::size_t>(it - classes.begin());
        if (it == classes.end()) {
            classes.push_back(labels[i]);
        }
    }
    if (classes.size() < 2) {
        throw InvalidArgument("classifier needs at least two classes, got " + std::to_string(classes.size()));
    }

    const auto views = views_of(points);
    if (!(kernel.gamma > 0.0)) {
        kernel.gamma = heuristic_gamma(kernel, views);
    }
    const Eigen::MatrixXd gram = gram_matrix(kernel, views);

    std::vector<BinarySvc> machines(classes.size());
    parallel_for(classes.size(), [&](std::size_t c) {
        std::vector<int> y(points.size());
        for (std::size_t i = 0; i < points.size(); ++i) {
            y[i] = class_of[i] == c ? 1 : -1;
        }
        machines[c] = train_binary_svc(gram, y, config);
    });

    std::map<std::size_t, std::size_t> remap;
    for (const auto &m : machines) {
        for (const auto idx : m.support_indices) {
            remap.emplace(idx, 0);
        }
    }
    std::vector<EmbeddingVector> pool;
    for (auto &[sample, slot] : remap) {
        slot = pool.size();
        pool.push_back(points[sample]);
    }
    for (auto &m : machines) {
        for (auto &idx : m.support_indices) {
            idx = remap.at(idx);
        }
    }
    return SvcModel{ kernel, std::move(classes), std::move(pool), std::move(machines) };
}

}  // namespace zslkit
