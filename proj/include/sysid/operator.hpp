#pragma once

// Dense complex operators and density matrices on small Hilbert spaces.
//
// Operator wraps an Eigen::MatrixXcd and is a plain value: every operation
// returns a new Operator. Dimensions are checked on every binary operation
// and mismatches raise DimensionMismatch.

#include <complex>
#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "sysid/error.hpp"

namespace sysid {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;

struct Tolerances {
    double herm = 1e-9;
    double psd = 1e-9;
    double trace = 1e-9;
    double num = 1e-9;
    double prob = 1e-12;
};

inline constexpr Tolerances kDefaultTolerances{};

class Operator {
public:
    explicit Operator(Matrix m);

    static Operator identity(std::size_t dim);
    static Operator zero(std::size_t dim);
    static Operator diagonal(std::span<const double> values);
    static Operator diagonal(std::initializer_list<double> values);
    // Row-major literal, e.g. from_rows({{0, 1}, {1, 0}}).
    static Operator from_rows(std::initializer_list<std::initializer_list<Complex>> rows);

    std::size_t dim() const noexcept { return static_cast<std::size_t>(m_.rows()); }
    Complex operator()(std::size_t row, std::size_t col) const { return m_(row, col); }
    const Matrix& matrix() const noexcept { return m_; }

    Operator adjoint() const;
    Complex trace() const;
    double frobenius_norm() const;

    bool is_hermitian(double tol = kDefaultTolerances.herm) const;
    bool is_psd(double tol = kDefaultTolerances.psd) const;
    bool is_unitary(double tol = kDefaultTolerances.num) const;
    // Eigenvalues of the Hermitian part, ascending.
    std::vector<double> eigenvalues() const;

    Operator& operator+=(const Operator& rhs);
    Operator& operator-=(const Operator& rhs);
    Operator& operator*=(Complex s);

    friend Operator operator+(Operator lhs, const Operator& rhs) { return lhs += rhs; }
    friend Operator operator-(Operator lhs, const Operator& rhs) { return lhs -= rhs; }
    friend Operator operator*(const Operator& lhs, const Operator& rhs);
    friend Operator operator*(Operator lhs, Complex s) { return lhs *= s; }
    friend Operator operator*(Complex s, Operator rhs) { return rhs *= s; }

private:
    Matrix m_;
};

// Largest entrywise |A - B|.
double max_abs_diff(const Operator& a, const Operator& b);

Operator commutator(const Operator& a, const Operator& b);
// Frobenius norm of [A, B].
double commutator_norm(const Operator& a, const Operator& b);
// Kronecker product; block (i, j) of the result is A(i, j) * B.
Operator tensor_product(const Operator& a, const Operator& b);
// Hermitian PSD square root by eigendecomposition. Eigenvalues in
// [-tol_psd, 0) are clamped to 0; anything more negative is rejected.
Operator psd_sqrt(const Operator& e, const Tolerances& tol = kDefaultTolerances);
// exp(-i H t) for Hermitian H.
Operator unitary_evolution(const Operator& hamiltonian, double t);

Operator pauli_x();
Operator pauli_y();
Operator pauli_z();
// cos(angle) Z + sin(angle) X: spin component along a direction in the x-z plane.
Operator spin_component(double angle);
// exp(-i angle/2 n.sigma) for a unit axis n.
Operator bloch_rotation(double nx, double ny, double nz, double angle);

// Places a single-qubit operator on `qubit` of an n-qubit register. Qubit 0 is
// the leftmost tensor factor (most significant bit of the basis index).
Operator embed_qubit(const Operator& single, std::size_t qubit, std::size_t n_qubits);

enum class Subsystem { first, second };

class QuantumState {
public:
    // Validates trace, Hermiticity and positivity.
    explicit QuantumState(Operator rho, const Tolerances& tol = kDefaultTolerances);

    // Skips validation. For states produced internally by trace-preserving
    // updates of an already valid state.
    static QuantumState trusted(Operator rho);

    static QuantumState pure(std::span<const Complex> amplitudes);
    static QuantumState pure(std::initializer_list<Complex> amplitudes);
    static QuantumState basis(std::size_t dim, std::size_t index);
    static QuantumState maximally_mixed(std::size_t dim);
    // (|01> - |10>)/sqrt(2).
    static QuantumState singlet();

    std::size_t dim() const noexcept { return rho_.dim(); }
    const Operator& rho() const noexcept { return rho_; }

    // U rho U^dagger.
    QuantumState evolved(const Operator& unitary) const;

private:
    struct Unchecked {};
    QuantumState(Operator rho, Unchecked) : rho_(std::move(rho)) {}

    Operator rho_;
};

QuantumState tensor_product(const QuantumState& a, const QuantumState& b);
QuantumState partial_trace(const QuantumState& rho, Subsystem keep, std::size_t dim_first,
                           std::size_t dim_second);

// rho -> (u on `qubit`) rho (u on `qubit`)^dagger in O(d^2) without building
// the full operator. With a non-unitary u (a Kraus factor) the result is
// unnormalized; the raw matrix is returned for that reason.
Matrix conjugate_on_qubit(const Matrix& rho, const Eigen::Matrix2cd& u, std::size_t qubit,
                          std::size_t n_qubits);

}  // namespace sysid
