#include "sysid/operator.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <Eigen/Eigenvalues>

namespace sysid {

namespace {

void require_same_dim(const Operator& a, const Operator& b, const char* what) {
    if (a.dim() != b.dim()) {
        throw DimensionMismatch(std::string(what) + ": dimensions " + std::to_string(a.dim()) +
                                " and " + std::to_string(b.dim()) + " differ");
    }
}

Matrix hermitian_part(const Matrix& m) { return 0.5 * (m + m.adjoint()); }

}  // namespace

Operator::Operator(Matrix m) : m_(std::move(m)) {
    if (m_.rows() < 1 || m_.rows() != m_.cols()) {
        throw DimensionMismatch("Operator: matrix must be square with dim >= 1");
    }
}

Operator Operator::identity(std::size_t dim) {
    return Operator(Matrix::Identity(static_cast<Eigen::Index>(dim),
                                     static_cast<Eigen::Index>(dim)));
}

Operator Operator::zero(std::size_t dim) {
    return Operator(
        Matrix::Zero(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim)));
}

Operator Operator::diagonal(std::span<const double> values) {
    Matrix m = Matrix::Zero(static_cast<Eigen::Index>(values.size()),
                            static_cast<Eigen::Index>(values.size()));
    for (std::size_t i = 0; i < values.size(); ++i) {
        m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)) = values[i];
    }
    return Operator(std::move(m));
}

Operator Operator::diagonal(std::initializer_list<double> values) {
    return diagonal(std::span<const double>(values.begin(), values.size()));
}

Operator Operator::from_rows(std::initializer_list<std::initializer_list<Complex>> rows) {
    const auto d = static_cast<Eigen::Index>(rows.size());
    Matrix m(d, d);
    Eigen::Index r = 0;
    for (const auto& row : rows) {
        if (static_cast<Eigen::Index>(row.size()) != d) {
            throw DimensionMismatch("Operator::from_rows: ragged or non-square rows");
        }
        Eigen::Index c = 0;
        for (const Complex& v : row) m(r, c++) = v;
        ++r;
    }
    return Operator(std::move(m));
}

Operator Operator::adjoint() const { return Operator(m_.adjoint()); }

Complex Operator::trace() const { return m_.trace(); }

double Operator::frobenius_norm() const { return m_.norm(); }

bool Operator::is_hermitian(double tol) const {
    return (m_ - m_.adjoint()).cwiseAbs().maxCoeff() <= tol;
}

std::vector<double> Operator::eigenvalues() const {
    Eigen::SelfAdjointEigenSolver<Matrix> solver(hermitian_part(m_), Eigen::EigenvaluesOnly);
    const auto& ev = solver.eigenvalues();
    return {ev.data(), ev.data() + ev.size()};
}

bool Operator::is_psd(double tol) const {
    if (!is_hermitian(tol)) return false;
    return eigenvalues().front() >= -tol;
}

bool Operator::is_unitary(double tol) const {
    const Matrix id = Matrix::Identity(m_.rows(), m_.cols());
    return (m_.adjoint() * m_ - id).cwiseAbs().maxCoeff() <= tol;
}

Operator& Operator::operator+=(const Operator& rhs) {
    require_same_dim(*this, rhs, "operator+");
    m_ += rhs.m_;
    return *this;
}

Operator& Operator::operator-=(const Operator& rhs) {
    require_same_dim(*this, rhs, "operator-");
    m_ -= rhs.m_;
    return *this;
}

Operator& Operator::operator*=(Complex s) {
    m_ *= s;
    return *this;
}

Operator operator*(const Operator& lhs, const Operator& rhs) {
    require_same_dim(lhs, rhs, "operator*");
    return Operator(lhs.m_ * rhs.m_);
}

double max_abs_diff(const Operator& a, const Operator& b) {
    require_same_dim(a, b, "max_abs_diff");
    return (a.matrix() - b.matrix()).cwiseAbs().maxCoeff();
}

Operator commutator(const Operator& a, const Operator& b) {
    require_same_dim(a, b, "commutator");
    return Operator(a.matrix() * b.matrix() - b.matrix() * a.matrix());
}

double commutator_norm(const Operator& a, const Operator& b) {
    require_same_dim(a, b, "commutator_norm");
    return (a.matrix() * b.matrix() - b.matrix() * a.matrix()).norm();
}

Operator tensor_product(const Operator& a, const Operator& b) {
    const Eigen::Index da = a.matrix().rows();
    const Eigen::Index db = b.matrix().rows();
    Matrix out(da * db, da * db);
    for (Eigen::Index i = 0; i < da; ++i) {
        for (Eigen::Index j = 0; j < da; ++j) {
            out.block(i * db, j * db, db, db) = a.matrix()(i, j) * b.matrix();
        }
    }
    return Operator(std::move(out));
}

Operator psd_sqrt(const Operator& e, const Tolerances& tol) {
    if (!e.is_hermitian(tol.herm)) {
        throw InvalidOperator("psd_sqrt: operator is not Hermitian");
    }
    Eigen::SelfAdjointEigenSolver<Matrix> solver(hermitian_part(e.matrix()));
    Eigen::VectorXd ev = solver.eigenvalues();
    for (Eigen::Index i = 0; i < ev.size(); ++i) {
        if (ev(i) < -tol.psd) {
            throw InvalidOperator("psd_sqrt: eigenvalue " + std::to_string(ev(i)) +
                                  " below -tol_psd");
        }
        ev(i) = std::sqrt(std::max(ev(i), 0.0));
    }
    const Matrix& v = solver.eigenvectors();
    return Operator(v * ev.cast<Complex>().asDiagonal() * v.adjoint());
}

Operator unitary_evolution(const Operator& hamiltonian, double t) {
    if (!hamiltonian.is_hermitian()) {
        throw InvalidOperator("unitary_evolution: Hamiltonian is not Hermitian");
    }
    Eigen::SelfAdjointEigenSolver<Matrix> solver(hermitian_part(hamiltonian.matrix()));
    const Eigen::VectorXd& ev = solver.eigenvalues();
    Eigen::VectorXcd phases(ev.size());
    for (Eigen::Index i = 0; i < ev.size(); ++i) {
        phases(i) = std::exp(Complex(0.0, -ev(i) * t));
    }
    const Matrix& v = solver.eigenvectors();
    return Operator(v * phases.asDiagonal() * v.adjoint());
}

Operator pauli_x() { return Operator::from_rows({{0, 1}, {1, 0}}); }
Operator pauli_y() { return Operator::from_rows({{0, Complex(0, -1)}, {Complex(0, 1), 0}}); }
Operator pauli_z() { return Operator::from_rows({{1, 0}, {0, -1}}); }

Operator spin_component(double angle) {
    return std::cos(angle) * pauli_z() + std::sin(angle) * pauli_x();
}

Operator bloch_rotation(double nx, double ny, double nz, double angle) {
    const double c = std::cos(angle / 2.0);
    const double s = std::sin(angle / 2.0);
    // cos(a/2) I - i sin(a/2) n.sigma
    return Operator::from_rows({{Complex(c, -s * nz), Complex(-s * ny, -s * nx)},
                                {Complex(s * ny, -s * nx), Complex(c, s * nz)}});
}

Operator embed_qubit(const Operator& single, std::size_t qubit, std::size_t n_qubits) {
    if (single.dim() != 2) throw DimensionMismatch("embed_qubit: operator must be 2x2");
    if (qubit >= n_qubits) throw std::invalid_argument("embed_qubit: qubit out of range");
    const std::size_t left = std::size_t{1} << qubit;
    const std::size_t right = std::size_t{1} << (n_qubits - qubit - 1);
    return tensor_product(tensor_product(Operator::identity(left), single),
                          Operator::identity(right));
}

QuantumState::QuantumState(Operator rho, const Tolerances& tol) : rho_(std::move(rho)) {
    if (std::abs(rho_.trace() - Complex(1.0)) > tol.trace) {
        throw InvalidOperator("QuantumState: trace differs from 1");
    }
    if (!rho_.is_hermitian(tol.herm)) throw InvalidOperator("QuantumState: rho not Hermitian");
    if (!rho_.is_psd(tol.psd)) throw InvalidOperator("QuantumState: rho not PSD");
}

QuantumState QuantumState::trusted(Operator rho) { return QuantumState(std::move(rho), Unchecked{}); }

QuantumState QuantumState::pure(std::span<const Complex> amplitudes) {
    Eigen::VectorXcd psi(static_cast<Eigen::Index>(amplitudes.size()));
    for (std::size_t i = 0; i < amplitudes.size(); ++i) psi(static_cast<Eigen::Index>(i)) = amplitudes[i];
    const double n = psi.norm();
    if (n == 0.0) throw std::invalid_argument("QuantumState::pure: zero vector");
    psi /= n;
    return QuantumState(Operator(psi * psi.adjoint()), Unchecked{});
}

QuantumState QuantumState::pure(std::initializer_list<Complex> amplitudes) {
    return pure(std::span<const Complex>(amplitudes.begin(), amplitudes.size()));
}

QuantumState QuantumState::basis(std::size_t dim, std::size_t index) {
    if (index >= dim) throw std::invalid_argument("QuantumState::basis: index out of range");
    Matrix m = Matrix::Zero(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
    m(static_cast<Eigen::Index>(index), static_cast<Eigen::Index>(index)) = 1.0;
    return QuantumState(Operator(std::move(m)), Unchecked{});
}

QuantumState QuantumState::maximally_mixed(std::size_t dim) {
    return QuantumState(Operator::identity(dim) * Complex(1.0 / static_cast<double>(dim)),
                        Unchecked{});
}

QuantumState QuantumState::singlet() {
    const double r = 1.0 / std::sqrt(2.0);
    return pure({0.0, r, -r, 0.0});
}

QuantumState QuantumState::evolved(const Operator& unitary) const {
    if (unitary.dim() != dim()) throw DimensionMismatch("QuantumState::evolved: dim mismatch");
    return QuantumState(
        Operator(unitary.matrix() * rho_.matrix() * unitary.matrix().adjoint()), Unchecked{});
}

QuantumState tensor_product(const QuantumState& a, const QuantumState& b) {
    return QuantumState::trusted(tensor_product(a.rho(), b.rho()));
}

QuantumState partial_trace(const QuantumState& rho, Subsystem keep, std::size_t dim_first,
                           std::size_t dim_second) {
    if (dim_first == 0 || dim_second == 0 || dim_first * dim_second != rho.dim()) {
        throw DimensionMismatch("partial_trace: subsystem dims inconsistent with state");
    }
    const auto da = static_cast<Eigen::Index>(dim_first);
    const auto db = static_cast<Eigen::Index>(dim_second);
    const Matrix& m = rho.rho().matrix();
    if (keep == Subsystem::first) {
        Matrix out = Matrix::Zero(da, da);
        for (Eigen::Index i = 0; i < da; ++i)
            for (Eigen::Index j = 0; j < da; ++j)
                for (Eigen::Index k = 0; k < db; ++k) out(i, j) += m(i * db + k, j * db + k);
        return QuantumState::trusted(Operator(std::move(out)));
    }
    Matrix out = Matrix::Zero(db, db);
    for (Eigen::Index i = 0; i < db; ++i)
        for (Eigen::Index j = 0; j < db; ++j)
            for (Eigen::Index k = 0; k < da; ++k) out(i, j) += m(k * db + i, k * db + j);
    return QuantumState::trusted(Operator(std::move(out)));
}

Matrix conjugate_on_qubit(const Matrix& rho, const Eigen::Matrix2cd& u, std::size_t qubit,
                          std::size_t n_qubits) {
    const Eigen::Index d = rho.rows();
    if (d != (Eigen::Index{1} << n_qubits) || qubit >= n_qubits) {
        throw DimensionMismatch("conjugate_on_qubit: register size mismatch");
    }
    const Eigen::Index mask = Eigen::Index{1} << (n_qubits - 1 - qubit);
    Matrix out = rho;
    for (Eigen::Index i0 = 0; i0 < d; ++i0) {
        if (i0 & mask) continue;
        const Eigen::Index i1 = i0 | mask;
        for (Eigen::Index c = 0; c < d; ++c) {
            const Complex a = out(i0, c);
            const Complex b = out(i1, c);
            out(i0, c) = u(0, 0) * a + u(0, 1) * b;
            out(i1, c) = u(1, 0) * a + u(1, 1) * b;
        }
    }
    const Complex c00 = std::conj(u(0, 0)), c01 = std::conj(u(0, 1));
    const Complex c10 = std::conj(u(1, 0)), c11 = std::conj(u(1, 1));
    for (Eigen::Index j0 = 0; j0 < d; ++j0) {
        if (j0 & mask) continue;
        const Eigen::Index j1 = j0 | mask;
        for (Eigen::Index r = 0; r < d; ++r) {
            const Complex a = out(r, j0);
            const Complex b = out(r, j1);
            out(r, j0) = a * c00 + b * c01;
            out(r, j1) = a * c10 + b * c11;
        }
    }
    return out;
}

}  // namespace sysid
