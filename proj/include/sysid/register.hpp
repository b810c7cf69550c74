#pragma once

// Qubit-register shortcuts for computational-basis probes. These are the
// O(d^2) equivalents of the general BinaryPOVM::computational path and are
// checked against it in the tests.

#include <cstddef>

#include "sysid/operator.hpp"

namespace sysid {

// tr(|1><1|_qubit rho).
double register_probability_one(const Matrix& rho, std::size_t qubit, std::size_t n_qubits);

// Lueders update for outcome `outcome` of the computational probe on `qubit`,
// renormalized by its probability p. Throws ImpossibleBranch if p < p_min.
Matrix register_project(const Matrix& rho, std::size_t qubit, std::size_t n_qubits, int outcome,
                        double p_min = kDefaultTolerances.prob);

// ||[H, |1><1|_qubit]||_F.
double register_projector_commutator_norm(const Matrix& h, std::size_t qubit,
                                          std::size_t n_qubits);

}  // namespace sysid
