#pragma once

#include "zslkit/embedding.hpp"
#include "zslkit/kernel.hpp"

#include <Eigen/Dense>

#include <cstddef>
#include <span>
#include <vector>

namespace zslkit {

struct SvrConfig {
    double c{ 2.0 };
    /// Width of the insensitive tube.
    double epsilon{ 0.1 };
    /// KKT violation threshold of the dual solver.
    double tolerance{ 1e-3 };
    /// Iteration cap, in multiples of the number of dual variables (2n).
    std::size_t max_passes{ 1000 };

    void validate() const;
};

/// One single-output epsilon-SVR. Support indices point into the sample pool it was trained on.
struct SvrModel {
    std::vector<std::size_t> support_indices;
    /// alpha_i - alpha_i^* per support index, each in [-C, C].
    std::vector<double> dual_coefficients;
    double bias{ 0.0 };
    KernelSpec kernel{};

    double dual_objective{ 0.0 };
    std::size_t iterations{ 0 };

    /// sum_i coef_i * kernel_row[support_indices[i]] + bias, where kernel_row holds K(pool_m, x).
    [[nodiscard]] double evaluate(std::span<const double> kernel_row) const;
};

/**
 * Trains an epsilon-SVR on a precomputed Gram matrix.
 *
 * The 2n-variable dual (alpha, alpha^*) is handed to solve_dual with signs
 * (+1, -1) and linear terms (epsilon - y, epsilon + y). Samples whose
 * coefficient is zero are dropped from the returned model.
 */
[[nodiscard]] SvrModel train_svr(const Eigen::MatrixXd &gram, std::span<const double> targets, const SvrConfig &config);

/// The mapping f: x -> z, one SvrModel per embedding coordinate over a shared support pool.
class SemanticRegressor {
  public:
    /// Validates that every model indexes into `pool` and uses `kernel`. `feature_dimension`
    /// is taken from the pool when zero; it must be given when the pool is empty.
    SemanticRegressor(KernelSpec kernel, std::vector<FeatureVector> pool, std::vector<SvrModel> models, std::size_t feature_dimension = 0);

    [[nodiscard]] std::size_t dimension() const noexcept { return models_.size(); }
    [[nodiscard]] std::size_t feature_dimension() const noexcept { return feature_dim_; }
    [[nodiscard]] const KernelSpec &kernel() const noexcept { return kernel_; }
    [[nodiscard]] const std::vector<FeatureVector> &pool() const noexcept { return pool_; }
    [[nodiscard]] const std::vector<SvrModel> &models() const noexcept { return models_; }

    /// Raw regressor output; not normalised.
    [[nodiscard]] EmbeddingVector predict(const FeatureVector &x) const;
    [[nodiscard]] std::vector<EmbeddingVector> predict(const std::vector<FeatureVector> &xs) const;

  private:
    KernelSpec kernel_;
    std::vector<FeatureVector> pool_;
    std::vector<SvrModel> models_;
    std::size_t feature_dim_{ 0 };
};

/// Builds one Gram matrix and trains d_z independent SVRs (coordinate j regresses embeddings[.][j]).
[[nodiscard]] SemanticRegressor train_semantic_regressor(const std::vector<FeatureVector> &features,
                                                         const std::vector<EmbeddingVector> &embeddings,
                                                         const SvrConfig &config,
                                                         const KernelSpec &kernel);

}  // namespace zslkit
