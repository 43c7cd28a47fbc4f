#include "zslkit/smo.hpp"

#include "zslkit/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace zslkit {

namespace {

constexpr double tau = 1e-12;
constexpr double inf = std::numeric_limits<double>::infinity();

class Solver {
  public:
    Solver(const DualProblem &p, const DualSettings &s) : p_{ p }, s_{ s }, l_{ p.linear.size() } {
        const auto &k = *p_.kernel;
        diag_.resize(l_);
        for (std::size_t t = 0; t < l_; ++t) {
            const auto r = static_cast<Eigen::Index>(p_.row[t]);
            diag_[t] = k(r, r);
        }
        alpha_.assign(l_, 0.0);
        grad_ = p_.linear;
    }

    DualSolution run() {
        std::size_t iter = 0;
        double violation = inf;
        while (true) {
            std::size_t i = 0;
            std::size_t j = 0;
            violation = select_working_set(i, j);
            if (violation < s_.tolerance) {
                break;
            }
            if (iter >= s_.max_iterations) {
                throw ConvergenceError(iter, violation, objective());
            }
            ++iter;
            update_pair(i, j);
        }

        DualSolution out;
        out.violation = std::max(violation, 0.0);
        out.iterations = iter;
        out.objective = objective();
        out.rho = compute_rho();
        out.alpha = std::move(alpha_);
        out.gradient = std::move(grad_);
        return out;
    }

  private:
    [[nodiscard]] bool at_upper(std::size_t t) const { return alpha_[t] >= p_.c; }
    [[nodiscard]] bool at_lower(std::size_t t) const { return alpha_[t] <= 0.0; }
    [[nodiscard]] double sign(std::size_t t) const { return static_cast<double>(p_.sign[t]); }
    [[nodiscard]] double kernel(std::size_t t, std::size_t u) const {
        return (*p_.kernel)(static_cast<Eigen::Index>(p_.row[t]), static_cast<Eigen::Index>(p_.row[u]));
    }
    [[nodiscard]] double q(std::size_t t, std::size_t u) const { return sign(t) * sign(u) * kernel(t, u); }

    [[nodiscard]] double objective() const {
        double v = 0.0;
        for (std::size_t t = 0; t < l_; ++t) {
            v += alpha_[t] * (grad_[t] + p_.linear[t]);
        }
        return 0.5 * v;
    }

    // Returns m(a) - M(a); i and j receive the working pair.
    double select_working_set(std::size_t &out_i, std::size_t &out_j) const {
        double gmax = -inf;
        std::size_t gmax_idx = l_;
        for (std::size_t t = 0; t < l_; ++t) {
            if (p_.sign[t] > 0) {
                if (!at_upper(t) && -grad_[t] > gmax) {
                    gmax = -grad_[t];
                    gmax_idx = t;
                }
            } else if (!at_lower(t) && grad_[t] > gmax) {
                gmax = grad_[t];
                gmax_idx = t;
            }
        }

        double gmax2 = -inf;
        double best_decrease = inf;
        std::size_t gmin_idx = l_;
        const std::size_t i = gmax_idx;
        for (std::size_t t = 0; t < l_; ++t) {
            double grad_diff = 0.0;
            if (p_.sign[t] > 0) {
                if (at_lower(t)) {
                    continue;
                }
                gmax2 = std::max(gmax2, grad_[t]);
                grad_diff = gmax + grad_[t];
            } else {
                if (at_upper(t)) {
                    continue;
                }
                gmax2 = std::max(gmax2, -grad_[t]);
                grad_diff = gmax - grad_[t];
            }
            if (i == l_ || grad_diff <= 0.0) {
                continue;
            }
            double quad = diag_[i] + diag_[t] - 2.0 * sign(i) * sign(t) * kernel(i, t);
            if (quad <= 0.0) {
                quad = tau;
            }
            const double decrease = -(grad_diff * grad_diff) / quad;
            if (decrease < best_decrease) {
                best_decrease = decrease;
                gmin_idx = t;
            }
        }

        if (i == l_ || gmin_idx == l_) {
            // no violating pair at all; the point is optimal
            return gmax + gmax2 == -inf ? 0.0 : std::min(gmax + gmax2, 0.0);
        }
        out_i = i;
        out_j = gmin_idx;
        return gmax + gmax2;
    }

    void update_pair(std::size_t i, std::size_t j) {
        const double c = p_.c;
        const double old_i = alpha_[i];
        const double old_j = alpha_[j];
        const double qij = q(i, j);

        if (p_.sign[i] != p_.sign[j]) {
            double quad = diag_[i] + diag_[j] + 2.0 * qij;
            if (quad <= 0.0) {
                quad = tau;
            }
            const double delta = (-grad_[i] - grad_[j]) / quad;
            const double diff = alpha_[i] - alpha_[j];
            alpha_[i] += delta;
            alpha_[j] += delta;
            if (diff > 0.0) {
                if (alpha_[j] < 0.0) {
                    alpha_[j] = 0.0;
                    alpha_[i] = diff;
                }
            } else if (alpha_[i] < 0.0) {
                alpha_[i] = 0.0;
                alpha_[j] = -diff;
            }
            if (diff > 0.0) {
                if (alpha_[i] > c) {
                    alpha_[i] = c;
                    alpha_[j] = c - diff;
                }
            } else if (alpha_[j] > c) {
                alpha_[j] = c;
                alpha_[i] = c + diff;
            }
        } else {
            double quad = diag_[i] + diag_[j] - 2.0 * qij;
            if (quad <= 0.0) {
                quad = tau;
            }
            const double delta = (grad_[i] - grad_[j]) / quad;
            const double sum = alpha_[i] + alpha_[j];
            alpha_[i] -= delta;
            alpha_[j] += delta;
            if (sum > c) {
                if (alpha_[i] > c) {
                    alpha_[i] = c;
                    alpha_[j] = sum - c;
                }
            } else if (alpha_[j] < 0.0) {
                alpha_[j] = 0.0;
                alpha_[i] = sum;
            }
            if (sum > c) {
                if (alpha_[j] > c) {
                    alpha_[j] = c;
                    alpha_[i] = sum - c;
                }
            } else if (alpha_[i] < 0.0) {
                alpha_[i] = 0.0;
                alpha_[j] = sum;
            }
        }

        const double di = alpha_[i] - old_i;
        const double dj = alpha_[j] - old_j;
        const double si = sign(i) * di;
        const double sj = sign(j) * dj;
        const auto &k = *p_.kernel;
        const auto ri = static_cast<Eigen::Index>(p_.row[i]);
        const auto rj = static_cast<Eigen::Index>(p_.row[j]);
        for (std::size_t t = 0; t < l_; ++t) {
            const auto rt = static_cast<Eigen::Index>(p_.row[t]);
            grad_[t] += sign(t) * (k(rt, ri) * si + k(rt, rj) * sj);
        }
    }

    [[nodiscard]] double compute_rho() const {
        double ub = inf;
        double lb = -inf;
        double free_sum = 0.0;
        std::size_t free_count = 0;
        for (std::size_t t = 0; t < l_; ++t) {
            const double yg = sign(t) * grad_[t];
            if (at_upper(t)) {
                if (p_.sign[t] < 0) {
                    ub = std::min(ub, yg);
                } else {
                    lb = std::max(lb, yg);
                }
            } else if (at_lower(t)) {
                if (p_.sign[t] > 0) {
                    ub = std::min(ub, yg);
                } else {
                    lb = std::max(lb, yg);
                }
            } else {
                free_sum += yg;
                ++free_count;
            }
        }
        if (free_count > 0) {
            return free_sum / static_cast<double>(free_count);
        }
        return (ub + lb) / 2.0;
    }

    const DualProblem &p_;
    const DualSettings &s_;
    std::size_t l_;
    std::vector<double> diag_;
    std::vector<double> alpha_;
    std::vector<double> grad_;
};

}  // namespace

DualSolution solve_dual(const DualProblem &problem, const DualSettings &settings) {
    if (problem.kernel == nullptr) {
        throw InvalidArgument("dual problem has no kernel matrix");
    }
    const std::size_t l = problem.linear.size();
    if (problem.row.size() != l || problem.sign.size() != l) {
        throw InvalidArgument("dual problem arrays differ in length");
    }
    if (!(problem.c > 0.0)) {
        throw InvalidArgument("box bound C must be positive");
    }
    if (!(settings.tolerance > 0.0)) {
        throw InvalidArgument("solver tolerance must be positive");
    }
    const auto n = static_cast<std::size_t>(problem.kernel->rows());
    for (std::size_t t = 0; t < l; ++t) {
        if (problem.row[t] >= n) {
            throw InvalidArgument("dual variable refers to kernel row out of range");
        }
        if (problem.sign[t] != 1 && problem.sign[t] != -1) {
            throw InvalidArgument("dual variable sign must be +1 or -1");
        }
    }
    return Solver{ problem, settings }.run();
}

}  // namespace zslkit
