#include "sysid/register.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

namespace sysid {

namespace {

Eigen::Index qubit_mask(const Matrix& m, std::size_t qubit, std::size_t n_qubits) {
    if (m.rows() != (Eigen::Index{1} << n_qubits) || m.cols() != m.rows() || qubit >= n_qubits) {
        throw DimensionMismatch("register operation: matrix does not match register size");
    }
    return Eigen::Index{1} << (n_qubits - 1 - qubit);
}

}  // namespace

double register_probability_one(const Matrix& rho, std::size_t qubit, std::size_t n_qubits) {
    const Eigen::Index mask = qubit_mask(rho, qubit, n_qubits);
    double p = 0.0;
    for (Eigen::Index i = 0; i < rho.rows(); ++i) {
        if (i & mask) p += rho(i, i).real();
    }
    return std::clamp(p, 0.0, 1.0);
}

Matrix register_project(const Matrix& rho, std::size_t qubit, std::size_t n_qubits, int outcome,
                        double p_min) {
    const Eigen::Index mask = qubit_mask(rho, qubit, n_qubits);
    const double p1 = register_probability_one(rho, qubit, n_qubits);
    const double p = outcome == 1 ? p1 : 1.0 - p1;
    if (p < p_min) {
        throw ImpossibleBranch(
            fmt::format("register probe on qubit {}: outcome {} has probability {:.3g}", qubit,
                        outcome, p));
    }
    const auto keep = [&](Eigen::Index i) { return ((i & mask) != 0) == (outcome == 1); };
    Matrix out = Matrix::Zero(rho.rows(), rho.cols());
    for (Eigen::Index j = 0; j < rho.cols(); ++j) {
        if (!keep(j)) continue;
        for (Eigen::Index i = 0; i < rho.rows(); ++i) {
            if (keep(i)) out(i, j) = rho(i, j) / p;
        }
    }
    return out;
}

double register_projector_commutator_norm(const Matrix& h, std::size_t qubit,
                                          std::size_t n_qubits) {
    // [H, D]_ij = H_ij (D_jj - D_ii) for diagonal D.
    const Eigen::Index mask = qubit_mask(h, qubit, n_qubits);
    double sum = 0.0;
    for (Eigen::Index j = 0; j < h.cols(); ++j) {
        for (Eigen::Index i = 0; i < h.rows(); ++i) {
            if (((i ^ j) & mask) != 0) sum += std::norm(h(i, j));
        }
    }
    return std::sqrt(sum);
}

}  // namespace sysid
