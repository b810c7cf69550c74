#pragma once

#include <optional>
#include <vector>

#include <Eigen/Dense>

namespace sysid {

// Phase-I simplex with Bland's rule. Looks for w >= 0 with sum(w) = 1 and
// A w = b, where A has one column per candidate vertex. Returns nullopt when
// the smallest achievable L1 residual exceeds `tol`. Returned weights are
// clamped at zero and renormalized to sum to one.
std::optional<std::vector<double>> feasible_convex_weights(const Eigen::MatrixXd& a,
                                                           const Eigen::VectorXd& b,
                                                           double tol = 1e-9);

}  // namespace sysid
