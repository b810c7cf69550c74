#pragma once

// Binary POVMs, Born-rule sampling with Lueders updates, and the
// observational record.

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "sysid/operator.hpp"
#include "sysid/rng.hpp"
#include "sysid/scheduler.hpp"

namespace sysid {

// Effect pair (E_0, E_1) with E_0 + E_1 = I. The Kraus operators are the
// Hermitian roots M_x = sqrt(E_x), computed once at construction.
class BinaryPOVM {
public:
    BinaryPOVM(std::string label, Operator effect0, Operator effect1,
               const Tolerances& tol = kDefaultTolerances);

    // E_0 = I - E_1.
    static BinaryPOVM from_effect(std::string label, Operator effect1,
                                  const Tolerances& tol = kDefaultTolerances);
    // Computational basis on `qubit`: E_0 = |0><0|, E_1 = |1><1|.
    static BinaryPOVM computational(std::string label, std::size_t qubit = 0,
                                    std::size_t n_qubits = 1);
    // Spin along angle in the x-z plane: E_1 = (I + cos(a) Z + sin(a) X) / 2,
    // so outcome 1 is the +1 eigenvalue.
    static BinaryPOVM spin(std::string label, double angle, std::size_t qubit = 0,
                           std::size_t n_qubits = 1);

    const std::string& label() const noexcept { return label_; }
    std::size_t dim() const noexcept { return effects_[0].dim(); }
    const Operator& effect(int outcome) const { return effects_.at(static_cast<std::size_t>(outcome)); }
    const Operator& kraus(int outcome) const { return kraus_.at(static_cast<std::size_t>(outcome)); }
    bool is_projective(double tol = kDefaultTolerances.num) const;

private:
    std::string label_;
    std::array<Operator, 2> effects_;
    std::array<Operator, 2> kraus_;
};

struct BornProbabilities {
    double p0 = 0.0;
    double p1 = 0.0;
    double operator[](int outcome) const { return outcome == 0 ? p0 : p1; }
};

// p_x = tr(E_x rho), clamped to [0, 1].
BornProbabilities born_probabilities(const QuantumState& state, const BinaryPOVM& povm);

// M_x rho M_x^dagger / p_x. Throws ImpossibleBranch if p_x < tol.prob.
QuantumState post_measurement_state(const QuantumState& state, const BinaryPOVM& povm,
                                    int outcome, const Tolerances& tol = kDefaultTolerances);

struct MeasurementOutcome {
    int outcome;
    QuantumState state;
};

// Samples x with Born probabilities from one rng.uniform() draw (outcome 1
// iff u < p1), then applies the Lueders update.
MeasurementOutcome apply_measurement(const QuantumState& state, const BinaryPOVM& povm, Rng& rng,
                                     const Tolerances& tol = kDefaultTolerances);

struct RecordRow {
    std::size_t step;        // 1-based, consecutive
    std::size_t povm_index;  // 1-based index into the registered POVM list
    int outcome;             // 0 or 1
};

struct MeasurementRecord {
    std::vector<RecordRow> rows;
    std::uint64_t seed = 0;

    std::size_t size() const noexcept { return rows.size(); }
    // Header `step,povm_index,outcome`.
    std::string to_csv() const;
    // Throws std::invalid_argument on broken step numbering or indices > n.
    void validate(std::size_t n_povms) const;
};

struct RunResult {
    MeasurementRecord record;
    QuantumState final_state;
    ThermoLedger ledger;
};

// Deploys povms[schedule[k]] at step k+1, threading the state through
// successive Lueders updates and charging one bit per deployment. When
// `step_unitary` is given the state is evolved by it before every deployment.
RunResult run_record(QuantumState state, std::span<const BinaryPOVM> povms,
                     std::span<const std::size_t> schedule, ThermoLedger ledger, Rng& rng,
                     const std::optional<Operator>& step_unitary = std::nullopt);

// {0, 1} -> {-1, +1}.
constexpr int to_sign(int outcome) noexcept { return 2 * outcome - 1; }

}  // namespace sysid
