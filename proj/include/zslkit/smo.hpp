#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <cstdint>
#include <vector>

namespace zslkit {

/**
 * Box- and equality-constrained dual QP shared by SVR and SVC:
 *
 *   minimise    1/2 a^T Q a + p^T a
 *   subject to  s^T a = 0,   0 <= a_t <= C,
 *
 * with Q(t, u) = s_t s_u K(row_t, row_u) and s_t in {-1, +1}. Several dual
 * variables may share one kernel row (the two halves of the epsilon-SVR dual
 * both point at the same training sample).
 */
struct DualProblem {
    const Eigen::MatrixXd *kernel{ nullptr };
    std::vector<std::size_t> row;
    std::vector<std::int8_t> sign;
    std::vector<double> linear;
    double c{ 1.0 };
};

struct DualSettings {
    /// Stop once the maximal KKT violation m(a) - M(a) drops below this.
    double tolerance{ 1e-3 };
    std::size_t max_iterations{ 10'000'000 };
};

struct DualSolution {
    std::vector<double> alpha;
    std::vector<double> gradient;
    /// Offset with decision(x) = sum_t s_t a_t K(row_t, x) - rho.
    double rho{ 0.0 };
    double objective{ 0.0 };
    double violation{ 0.0 };
    std::size_t iterations{ 0 };
};

/// Two-variable decomposition (SMO). The first working index is the maximal
/// KKT violator; the second maximises the second-order objective decrease
/// among violating partners. Ties go to the lowest index, so runs are
/// reproducible. Throws ConvergenceError when max_iterations is exhausted.
[[nodiscard]] DualSolution solve_dual(const DualProblem &problem, const DualSettings &settings);

}  // namespace zslkit
