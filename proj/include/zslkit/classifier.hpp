#pragma once

#include "zslkit/embedding.hpp"
#include "zslkit/kernel.hpp"

#include <cstddef>
#include <span>
#include <vector>

namespace zslkit {

struct SvcConfig {
    double c{ 2.0 };
    double tolerance{ 1e-3 };
    /// Iteration cap, in multiples of the number of training points.
    std::size_t max_passes{ 1000 };

    void validate() const;
};

/// One binary soft-margin SVM (class vs rest). Coefficients are y_i * alpha_i.
struct BinarySvc {
    std::vector<std::size_t> support_indices;
    std::vector<double> coefficients;
    double bias{ 0.0 };
    double dual_objective{ 0.0 };
    std::size_t iterations{ 0 };

    [[nodiscard]] double evaluate(std::span<const double> kernel_row) const;
};

/// Solves the binary dual for labels y in {-1, +1} on a precomputed Gram matrix.
[[nodiscard]] BinarySvc train_binary_svc(const Eigen::MatrixXd &gram, std::span<const int> labels, const SvcConfig &config);

/// Index of the largest value; the first one wins on exact ties.
[[nodiscard]] std::size_t argmax_decision(std::span<const double> decision_values);

/// One-vs-rest kernel SVM over embedding-space points.
class SvcModel {
  public:
    SvcModel(KernelSpec kernel, std::vector<Label> classes, std::vector<EmbeddingVector> pool, std::vector<BinarySvc> machines);

    [[nodiscard]] const std::vector<Label> &classes() const noexcept { return classes_; }
    [[nodiscard]] const KernelSpec &kernel() const noexcept { return kernel_; }
    [[nodiscard]] const std::vector<EmbeddingVector> &pool() const noexcept { return pool_; }
    [[nodiscard]] const std::vector<BinarySvc> &machines() const noexcept { return machines_; }
    [[nodiscard]] std::size_t dimension() const noexcept { return dimension_; }

    /// One decision value per class, in classes() order.
    [[nodiscard]] std::vector<double> decision_values(const EmbeddingVector &point) const;
    [[nodiscard]] const Label &classify(const EmbeddingVector &point) const;

  private:
    KernelSpec kernel_;
    std::vector<Label> classes_;
    std::vector<EmbeddingVector> pool_;
    std::vector<BinarySvc> machines_;
    std::size_t dimension_{ 0 };
};

/**
 * Trains one binary machine per class. Classes are ordered by first
 * appearance in `labels`. When `kernel.gamma` is not positive, gamma is set
 * from heuristic_gamma over the points (rbf_euclidean: mean squared distance).
 */
[[nodiscard]] SvcModel train_svc(const std::vector<EmbeddingVector> &points, const std::vector<Label> &labels, const SvcConfig &config, KernelSpec kernel = { KernelKind::rbf_euclidean, 0.0, true });

}  // namespace zslkit
