#include "zslkit/kernel.hpp"

#include "zslkit/error.hpp"
#include "zslkit/parallel.hpp"
#include "zslkit/random.hpp"

#include <cmath>

namespace zslkit {

std::string to_string(KernelKind kind) {
    switch (kind) {
        case KernelKind::rbf_chi2:
            return "rbf_chi2";
        case KernelKind::rbf_euclidean:
            return "rbf_euclidean";
    }
    return "unknown";
}

KernelKind kernel_kind_from_string(const std::string &name) {
    if (name == "rbf_chi2") {
        return KernelKind::rbf_chi2;
    }
    if (name == "rbf_euclidean") {
        return KernelKind::rbf_euclidean;
    }
    throw InvalidArgument("unknown kernel kind '" + name + "'");
}

void KernelSpec::validate() const {
    if (!(gamma > 0.0) || !std::isfinite(gamma)) {
        throw InvalidArgument("kernel gamma must be positive and finite, got " + std::to_string(gamma));
    }
}

double chi2_distance(std::span<const double> a, std::span<const double> b, bool halved) {
    if (a.size() != b.size()) {
        throw InvalidArgument("histogram length mismatch: " + std::to_string(a.size()) + " vs " + std::to_string(b.size()));
    }
    double sum = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) {
        if (a[k] < 0.0 || b[k] < 0.0) {
            throw InvalidArgument("negative histogram bin at index " + std::to_string(k));
        }
        const double s = a[k] + b[k];
        if (s > 0.0) {
            const double d = a[k] - b[k];
            sum += d * d / s;
        }
    }
    return halved ? 0.5 * sum : sum;
}

double kernel_distance(const KernelSpec &spec, std::span<const double> a, std::span<const double> b) {
    switch (spec.kind) {
        case KernelKind::rbf_chi2:
            return chi2_distance(a, b, spec.chi2_halved);
        case KernelKind::rbf_euclidean:
            return squared_euclidean(a, b);
    }
    throw InvalidArgument("unknown kernel kind");
}

double kernel_value(const KernelSpec &spec, std::span<const double> a, std::span<const double> b) {
    return std::exp(-spec.gamma * kernel_distance(spec, a, b));
}

double heuristic_gamma(const KernelSpec &spec, std::span<const std::span<const double>> points, const GammaOptions &options) {
    const std::size_t n = points.size();
    if (n < 2) {
        throw InvalidArgument("gamma heuristic needs at least two points");
    }
    const std::size_t ordered_pairs = options.include_self_pairs ? n * n : n * (n - 1);

    double total = 0.0;
    std::size_t counted = 0;
    if (ordered_pairs <= options.max_pairs) {
        // D is symmetric, so each unordered pair stands for two ordered ones.
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = i + 1; j < n; ++j) {
                total += 2.0 * kernel_distance(spec, points[i], points[j]);
            }
        }
        counted = ordered_pairs;
    } else {
        Rng rng{ options.seed };
        for (std::size_t s = 0; s < options.max_pairs; ++s) {
            const auto i = static_cast<std::size_t>(rng.below(n));
            auto j = static_cast<std::size_t>(rng.below(options.include_self_pairs ? n : n - 1));
            if (!options.include_self_pairs && j >= i) {
                ++j;
            }
            total += kernel_distance(spec, points[i], points[j]);
        }
        counted = options.max_pairs;
    }

    const double mean = total / static_cast<double>(counted);
    if (!(mean > 0.0)) {
        throw InvalidArgument("all points are identical; mean pairwise distance is zero");
    }
    return 1.0 / mean;
}

Eigen::MatrixXd gram_matrix(const KernelSpec &spec, std::span<const std::span<const double>> rows, std::span<const std::span<const double>> cols) {
    spec.validate();
    Eigen::MatrixXd m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(cols.size()));
    parallel_for(rows.size(), [&](std::size_t i) {
        for (std::size_t j = 0; j < cols.size(); ++j) {
            m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = kernel_value(spec, rows[i], cols[j]);
        }
    });
    return m;
}

Eigen::MatrixXd gram_matrix(const KernelSpec &spec, std::span<const std::span<const double>> points) {
    spec.validate();
    const auto n = static_cast<Eigen::Index>(points.size());
    Eigen::MatrixXd m(n, n);
    parallel_for(points.size(), [&](std::size_t i) {
        const auto ii = static_cast<Eigen::Index>(i);
        m(ii, ii) = kernel_value(spec, points[i], points[i]);
        for (std::size_t j = i + 1; j < points.size(); ++j) {
            m(ii, static_cast<Eigen::Index>(j)) = kernel_value(spec, points[i], points[j]);
        }
    });
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = i + 1; j < n; ++j) {
            m(j, i) = m(i, j);
        }
    }
    return m;
}

}  // namespace zslkit
