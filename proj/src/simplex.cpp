#include "sysid/simplex.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace sysid {

std::optional<std::vector<double>> feasible_convex_weights(const Eigen::MatrixXd& a,
                                                           const Eigen::VectorXd& b, double tol) {
    if (a.rows() != b.size()) throw std::invalid_argument("simplex: A and b disagree in rows");
    const Eigen::Index k = a.cols();
    const Eigen::Index m = a.rows() + 1;
    if (k == 0) return std::nullopt;

    // Tableau columns: k structural, m artificial, then the right-hand side.
    const Eigen::Index rhs = k + m;
    Eigen::MatrixXd t = Eigen::MatrixXd::Zero(m, k + m + 1);
    t.topLeftCorner(m - 1, k) = a;
    t.block(m - 1, 0, 1, k).setOnes();
    t.block(0, rhs, m - 1, 1) = b;
    t(m - 1, rhs) = 1.0;
    for (Eigen::Index r = 0; r < m; ++r) {
        if (t(r, rhs) < 0.0) t.row(r) *= -1.0;
        t(r, k + r) = 1.0;
    }
    std::vector<Eigen::Index> basis(static_cast<std::size_t>(m));
    for (Eigen::Index r = 0; r < m; ++r) basis[static_cast<std::size_t>(r)] = k + r;

    // Reduced costs of minimizing the artificial sum.
    Eigen::VectorXd cost = Eigen::VectorXd::Zero(k + m + 1);
    for (Eigen::Index r = 0; r < m; ++r) cost -= t.row(r).transpose();
    for (Eigen::Index j = k; j < k + m; ++j) cost(j) = 0.0;

    constexpr double eps = 1e-12;
    const int max_iterations = 1000;
    for (int iter = 0; iter < max_iterations; ++iter) {
        Eigen::Index enter = -1;
        for (Eigen::Index j = 0; j < k + m; ++j) {
            if (cost(j) < -eps) {
                enter = j;
                break;
            }
        }
        if (enter < 0) break;

        Eigen::Index leave = -1;
        double best = std::numeric_limits<double>::infinity();
        for (Eigen::Index r = 0; r < m; ++r) {
            if (t(r, enter) <= eps) continue;
            const double ratio = t(r, rhs) / t(r, enter);
            if (ratio < best - eps ||
                (std::abs(ratio - best) <= eps &&
                 basis[static_cast<std::size_t>(r)] < basis[static_cast<std::size_t>(leave)])) {
                best = ratio;
                leave = r;
            }
        }
        if (leave < 0) break;  // unbounded direction; cannot happen for Phase I

        t.row(leave) /= t(leave, enter);
        for (Eigen::Index r = 0; r < m; ++r) {
            if (r != leave && t(r, enter) != 0.0) t.row(r) -= t(r, enter) * t.row(leave);
        }
        cost -= cost(enter) * t.row(leave).transpose();
        basis[static_cast<std::size_t>(leave)] = enter;
    }

    double residual = 0.0;
    std::vector<double> w(static_cast<std::size_t>(k), 0.0);
    for (Eigen::Index r = 0; r < m; ++r) {
        const Eigen::Index v = basis[static_cast<std::size_t>(r)];
        if (v >= k) {
            residual += std::abs(t(r, rhs));
        } else {
            w[static_cast<std::size_t>(v)] = std::max(0.0, t(r, rhs));
        }
    }
    if (residual > tol) return std::nullopt;
    double total = 0.0;
    for (double x : w) total += x;
    if (total <= 0.0) return std::nullopt;
    for (double& x : w) x /= total;
    return w;
}

}  // namespace sysid
