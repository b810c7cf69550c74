#pragma once

// Shared helpers for the unit tests: random states and effects drawn from a
// fixed-seed std::mt19937_64, independent of the library's own generator.

#include <cmath>
#include <complex>
#include <random>

#include <Eigen/Dense>

#include "sysid/operator.hpp"

namespace sysid::testing {

inline Matrix random_complex(std::mt19937_64& gen, Eigen::Index rows, Eigen::Index cols) {
    std::normal_distribution<double> n(0.0, 1.0);
    Matrix m(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i) {
        for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = Complex(n(gen), n(gen));
    }
    return m;
}

inline Operator random_hermitian(std::mt19937_64& gen, std::size_t d) {
    const Matrix a = random_complex(gen, static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d));
    return Operator((a + a.adjoint()) * 0.5);
}

inline Operator random_psd(std::mt19937_64& gen, std::size_t d) {
    const Matrix a = random_complex(gen, static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d));
    return Operator(a * a.adjoint());
}

// Random mixed state of rank `rank` (full rank when 0).
inline QuantumState random_state(std::mt19937_64& gen, std::size_t d, std::size_t rank = 0) {
    const Eigen::Index r = static_cast<Eigen::Index>(rank == 0 ? d : rank);
    const Matrix a = random_complex(gen, static_cast<Eigen::Index>(d), r);
    Matrix rho = a * a.adjoint();
    rho /= rho.trace();
    return QuantumState(Operator(rho));
}

// Effect with spectrum inside [0, 1].
inline Operator random_effect(std::mt19937_64& gen, std::size_t d) {
    const Operator p = random_psd(gen, d);
    const double top = p.eigenvalues().back();
    return p * Complex(1.0 / (top * 1.0001));
}

}  // namespace sysid::testing
