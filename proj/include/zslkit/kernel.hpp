#pragma once

#include "zslkit/embedding.hpp"

#include <Eigen/Dense>

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace zslkit {

/// Non-negative histogram x (BoW counts or frequencies).
struct FeatureVector {
    std::vector<double> bins;

    [[nodiscard]] std::size_t size() const noexcept { return bins.size(); }
};

[[nodiscard]] inline std::span<const double> values_of(const FeatureVector &x) noexcept { return x.bins; }
[[nodiscard]] inline std::span<const double> values_of(const EmbeddingVector &z) noexcept { return z.values; }
[[nodiscard]] inline std::span<const double> values_of(const std::vector<double> &v) noexcept { return v; }

enum class KernelKind {
    rbf_chi2,      ///< exp(-gamma * chi2(a, b)), for histograms
    rbf_euclidean  ///< exp(-gamma * |a - b|^2), for embedding-space points
};

[[nodiscard]] std::string to_string(KernelKind kind);
[[nodiscard]] KernelKind kernel_kind_from_string(const std::string &name);

struct KernelSpec {
    KernelKind kind{ KernelKind::rbf_chi2 };
    double gamma{ 1.0 };
    /// Use 1/2 * sum (a-b)^2/(a+b). When false the factor 1/2 is dropped.
    bool chi2_halved{ true };

    /// Throws InvalidArgument unless gamma is positive and finite.
    void validate() const;
};

/// Chi-square histogram distance. Bins where a_k + b_k == 0 contribute nothing.
[[nodiscard]] double chi2_distance(std::span<const double> a, std::span<const double> b, bool halved = true);

/// The distance D inside the exponent of the kernel (chi2 or squared Euclidean).
[[nodiscard]] double kernel_distance(const KernelSpec &spec, std::span<const double> a, std::span<const double> b);

[[nodiscard]] double kernel_value(const KernelSpec &spec, std::span<const double> a, std::span<const double> b);

struct GammaOptions {
    /// Average over all n^2 ordered pairs including i == j instead of the n(n-1) pairs i != j.
    bool include_self_pairs{ false };
    /// Above this many ordered pairs, the mean is estimated from this many uniformly sampled pairs.
    std::size_t max_pairs{ 1'000'000 };
    std::uint64_t seed{ 0 };
};

/// Reciprocal of the mean pairwise kernel distance under `spec.kind` (gamma in spec is ignored).
[[nodiscard]] double heuristic_gamma(const KernelSpec &spec, std::span<const std::span<const double>> points, const GammaOptions &options = {});

/// Kernel matrix M(i, j) = K(rows[i], cols[j]); rows are computed in parallel.
[[nodiscard]] Eigen::MatrixXd gram_matrix(const KernelSpec &spec, std::span<const std::span<const double>> rows, std::span<const std::span<const double>> cols);
/// Symmetric case, evaluating only the upper triangle.
[[nodiscard]] Eigen::MatrixXd gram_matrix(const KernelSpec &spec, std::span<const std::span<const double>> points);

/// Collect value views for a list of points (FeatureVector, EmbeddingVector or std::vector<double>).
template <typename Point>
[[nodiscard]] std::vector<std::span<const double>> views_of(const std::vector<Point> &points) {
    std::vector<std::span<const double>> out;
    out.reserve(points.size());
    for (const auto &p : points) {
        out.push_back(values_of(p));
    }
    return out;
}

}  // namespace zslkit
