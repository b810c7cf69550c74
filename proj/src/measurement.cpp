#include "sysid/measurement.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <fmt/format.h>

namespace sysid {

BinaryPOVM::BinaryPOVM(std::string label, Operator effect0, Operator effect1,
                       const Tolerances& tol)
    : label_(std::move(label)),
      effects_{std::move(effect0), std::move(effect1)},
      kraus_{psd_sqrt(effects_[0], tol), psd_sqrt(effects_[1], tol)} {
    if (effects_[0].dim() != effects_[1].dim()) {
        throw DimensionMismatch("BinaryPOVM '" + label_ + "': effect dimensions differ");
    }
    const Operator sum = effects_[0] + effects_[1];
    if (max_abs_diff(sum, Operator::identity(sum.dim())) > tol.num) {
        throw InvalidOperator("BinaryPOVM '" + label_ + "': effects do not sum to identity");
    }
    for (const auto& e : effects_) {
        if (!e.is_psd(tol.psd)) throw InvalidOperator("BinaryPOVM '" + label_ + "': effect not PSD");
    }
}

BinaryPOVM BinaryPOVM::from_effect(std::string label, Operator effect1, const Tolerances& tol) {
    Operator effect0 = Operator::identity(effect1.dim()) - effect1;
    return BinaryPOVM(std::move(label), std::move(effect0), std::move(effect1), tol);
}

BinaryPOVM BinaryPOVM::computational(std::string label, std::size_t qubit, std::size_t n_qubits) {
    const Operator p1 = embed_qubit(Operator::diagonal({0.0, 1.0}), qubit, n_qubits);
    return from_effect(std::move(label), p1);
}

BinaryPOVM BinaryPOVM::spin(std::string label, double angle, std::size_t qubit,
                            std::size_t n_qubits) {
    const Operator up = Complex(0.5) * (Operator::identity(2) + spin_component(angle));
    return from_effect(std::move(label), embed_qubit(up, qubit, n_qubits));
}

bool BinaryPOVM::is_projective(double tol) const {
    const Operator& e = effects_[1];
    return max_abs_diff(e * e, e) <= tol;
}

BornProbabilities born_probabilities(const QuantumState& state, const BinaryPOVM& povm) {
    if (state.dim() != povm.dim()) {
        throw DimensionMismatch(fmt::format("born_probabilities: state dim {} vs POVM '{}' dim {}",
                                            state.dim(), povm.label(), povm.dim()));
    }
    // tr(E rho) = sum_ij E_ij rho_ji
    const Matrix& rho = state.rho().matrix();
    const double p1 =
        (povm.effect(1).matrix().cwiseProduct(rho.transpose())).sum().real();
    const double clamped = std::clamp(p1, 0.0, 1.0);
    return {1.0 - clamped, clamped};
}

QuantumState post_measurement_state(const QuantumState& state, const BinaryPOVM& povm,
                                    int outcome, const Tolerances& tol) {
    if (outcome != 0 && outcome != 1) throw std::invalid_argument("outcome must be 0 or 1");
    const double p = born_probabilities(state, povm)[outcome];
    if (p < tol.prob) {
        throw ImpossibleBranch(fmt::format("POVM '{}': outcome {} has probability {:.3g}",
                                           povm.label(), outcome, p));
    }
    const Matrix& m = povm.kraus(outcome).matrix();
    return QuantumState::trusted(Operator(m * state.rho().matrix() * m.adjoint() / p));
}

MeasurementOutcome apply_measurement(const QuantumState& state, const BinaryPOVM& povm, Rng& rng,
                                     const Tolerances& tol) {
    const BornProbabilities p = born_probabilities(state, povm);
    const int outcome = rng.uniform() < p.p1 ? 1 : 0;
    return {outcome, post_measurement_state(state, povm, outcome, tol)};
}

std::string MeasurementRecord::to_csv() const {
    std::string out = "step,povm_index,outcome\n";
    for (const auto& r : rows) out += fmt::format("{},{},{}\n", r.step, r.povm_index, r.outcome);
    return out;
}

void MeasurementRecord::validate(std::size_t n_povms) const {
    for (std::size_t k = 0; k < rows.size(); ++k) {
        const RecordRow& r = rows[k];
        if (r.step != k + 1) throw std::invalid_argument("record steps must run 1, 2, ...");
        if (r.povm_index < 1 || r.povm_index > n_povms) {
            throw std::invalid_argument(fmt::format("record row {}: povm_index {} outside [1, {}]",
                                                    r.step, r.povm_index, n_povms));
        }
        if (r.outcome != 0 && r.outcome != 1) throw std::invalid_argument("outcome must be a bit");
    }
}

RunResult run_record(QuantumState state, std::span<const BinaryPOVM> povms,
                     std::span<const std::size_t> schedule, ThermoLedger ledger, Rng& rng,
                     const std::optional<Operator>& step_unitary) {
    for (std::size_t idx : schedule) {
        if (idx >= povms.size()) {
            throw std::invalid_argument(
                fmt::format("run_record: schedule index {} with {} POVMs", idx, povms.size()));
        }
    }
    MeasurementRecord record;
    record.seed = rng.seed();
    record.rows.reserve(schedule.size());
    for (std::size_t k = 0; k < schedule.size(); ++k) {
        if (step_unitary) state = state.evolved(*step_unitary);
        MeasurementOutcome m = apply_measurement(state, povms[schedule[k]], rng);
        state = std::move(m.state);
        ledger.charge(1);
        record.rows.push_back({k + 1, schedule[k] + 1, m.outcome});
    }
    return {std::move(record), std::move(state), ledger};
}

}  // namespace sysid
