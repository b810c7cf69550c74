#pragma once

// Observable-system discovery on a qubit-register world.
//
// A world of d_W binary degrees of freedom is a register of d_W qubits
// (Hilbert dimension 2^d_W). An observable system is a set of k reference
// POVMs with fixed outcomes plus l pointer POVMs with free outcomes, subject
// to 1 < k < n and 1 < l < n - k, mutual commutation of the reference
// effects, and commutation of every pointer effect with every reference
// effect. Commutators are taken between the outcome-1 effects E_1 (the
// outcome-0 effect I - E_1 commutes with exactly the same operators).

#include <cstddef>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "sysid/measurement.hpp"
#include "sysid/operator.hpp"
#include "sysid/parallel.hpp"
#include "sysid/scheduler.hpp"

namespace sysid {

class WorldModel {
public:
    // backaction_strength is the coefficient kappa of the dissipation
    // backaction model used by refinement_scan.
    WorldModel(Operator self_hamiltonian, QuantumState initial_state,
               double backaction_strength = 0.0);

    // |0...0> on d_W qubits.
    static WorldModel zero_register(std::size_t degrees_of_freedom, Operator self_hamiltonian,
                                    double backaction_strength = 0.0);

    std::size_t dim() const noexcept { return initial_.dim(); }
    std::size_t degrees_of_freedom() const noexcept { return dof_; }
    const Operator& self_hamiltonian() const noexcept { return hamiltonian_; }
    const QuantumState& initial_state() const noexcept { return initial_; }
    double backaction_strength() const noexcept { return kappa_; }
    // exp(-i H_W dt) for one recording step (dt = 1 in units of dt_obs).
    const Operator& step_unitary() const noexcept { return step_unitary_; }
    bool has_static_dynamics() const noexcept { return static_; }

private:
    Operator hamiltonian_;
    QuantumState initial_;
    double kappa_;
    std::size_t dof_;
    Operator step_unitary_;
    bool static_;
};

struct ApparentSpace {
    std::vector<std::size_t> povm_indices;  // 1-based, first-use order
    std::vector<std::string> labels;        // filled when POVMs are supplied
    std::size_t dim = 0;
    // True when every employed POVM is projective and the employed E_1
    // projectors are mutually orthogonal. No claim is made otherwise.
    bool orthogonal = false;
};

ApparentSpace build_apparent_space(const MeasurementRecord& record, std::size_t n_povms);
ApparentSpace build_apparent_space(const MeasurementRecord& record,
                                   std::span<const BinaryPOVM> povms);

struct ReferenceMember {
    std::size_t index;  // 0-based position in the searched POVM list
    BinaryPOVM povm;
    int required_outcome;
};

struct PointerMember {
    std::size_t index;
    BinaryPOVM povm;
};

struct ObservableSystem {
    std::vector<ReferenceMember> reference;
    std::vector<PointerMember> pointer;
    double sieve_delta = 1e-6;
    std::size_t povm_count = 0;  // n, the size of the searched POVM list

    std::size_t k() const noexcept { return reference.size(); }
    std::size_t l() const noexcept { return pointer.size(); }
    // |R> = |x_1 ... x_k>.
    std::string reference_state() const;
    bool satisfies_bounds() const noexcept;
};

enum class SieveCondition {
    dynamics,           // [H_W + H_OW, E_i^(R)]
    reference_pair,     // [E_i^(R), E_j^(R)]
    reference_pointer,  // [E_i^(R), E_j^(P)]
};

struct SieveEntry {
    SieveCondition condition;
    std::size_t first;   // POVM index
    std::size_t second;  // POVM index; equals first for dynamics entries
    double norm;
    bool pass;
};

struct SieveReport {
    std::vector<SieveEntry> entries;
    bool disjoint = true;  // reference and pointer share no POVM
    bool passed = true;
    double delta = 0.0;
    double max_norm = 0.0;

    std::string to_csv() const;  // condition,first,second,norm,pass
};

SieveReport check_sieve(const ObservableSystem& system, const WorldModel& world,
                        const Operator& measurement_hamiltonian, double delta);

// H_OW of a uniform deployment schedule over the system's members:
// (1 / (k + l)) sum of their E_1 effects.
Operator uniform_measurement_hamiltonian(const ObservableSystem& system);

enum class FailedBound {
    reference,  // need 1 < k < n
    pointer,    // need 1 < l < n - k
    sieve,      // selected sets fail check_sieve
};

struct NotFound {
    FailedBound bound;
    std::size_t k = 0;
    std::size_t l = 0;
    std::size_t n = 0;
    std::string message;
};

struct StabilityProfile {
    // outcomes[c][i]: outcome of POVM i in deployment cycle c.
    std::vector<std::vector<int>> outcomes;
    std::vector<bool> stable;
};

using DiscoveryResult = std::variant<ObservableSystem, NotFound>;

// Deploys every POVM once per cycle, in list order, for `trials` cycles on
// the world (one H_W step before each deployment) and records which POVMs
// return a constant outcome.
StabilityProfile outcome_stability(std::span<const BinaryPOVM> povms, const WorldModel& world,
                                   std::size_t trials, Rng& rng);

// Reference: largest mutually commuting (within delta) set of outcome-stable
// POVMs that also commute with H_W, grown greedily by ascending pairwise
// commutator norm with ties broken by list order. Pointer: every remaining
// POVM that commutes with all reference members and has a non-constant
// outcome. The result is re-checked with check_sieve against
// uniform_measurement_hamiltonian. Requires n >= 4.
DiscoveryResult discover_system(std::span<const BinaryPOVM> povms, const WorldModel& world,
                                std::size_t trials, double delta, Rng& rng);

struct ObservedPropagator {
    // Pointer states |x_1^(P) ... x_l^(P)> in order of observation.
    std::vector<std::string> states;
    std::map<std::string, std::map<std::string, std::size_t>> transitions;
    bool deterministic = true;

    std::string to_csv() const;  // from,to,count
};

// A pointer state is complete once every pointer POVM has been read since
// the previous state; successive complete states define the transitions.
ObservedPropagator observed_propagator(const MeasurementRecord& record,
                                       const ObservableSystem& system);

struct RefinementRow {
    std::size_t n_probes;
    double heat_kbt;
    double ref_error_rate;
    double max_comm_norm;
    std::uint64_t errors;
    std::uint64_t checks;
};

struct RefinementScanResult {
    std::vector<RefinementRow> rows;
    std::string to_csv() const;  // n_probes,heat_kBT,ref_error_rate,max_comm_norm
};

// Backaction model: each identification probe is a computational-basis
// measurement of one qubit, charged one bit. After every recorded bit each
// qubit of W receives a rotation about a uniformly random axis by
//   theta = kappa * (cumulative heat in k_B T) / d_W.
// Once the n probes are recorded, the reference set is measured again and
// every disagreement with the recorded reference outcome counts as an error.
// max_comm_norm is the largest ||[H_W + H_OW(t) + H_kick, E_r]||_F over
// steps and already-identified references, where H_OW(t) is the deployed
// probe effect and H_kick = sum_q (theta/2) n_q.sigma_q generates the kick.
RefinementScanResult refinement_scan(const WorldModel& world,
                                     std::span<const std::size_t> probe_counts,
                                     const ThermoLedger& ledger, std::size_t trials,
                                     std::uint64_t seed, Execution exec = Execution::parallel);

}  // namespace sysid
