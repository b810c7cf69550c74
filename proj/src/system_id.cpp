#include "sysid/system_id.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <numbers>
#include <set>
#include <stdexcept>

#include <fmt/format.h>

#include "sysid/register.hpp"

namespace sysid {

namespace {

std::size_t register_size(std::size_t dim) {
    if (dim < 2 || !std::has_single_bit(dim)) {
        throw DimensionMismatch(
            fmt::format("WorldModel: dimension {} is not a qubit register (2^d_W)", dim));
    }
    return static_cast<std::size_t>(std::countr_zero(dim));
}

void require_dim(const BinaryPOVM& povm, std::size_t dim) {
    if (povm.dim() != dim) {
        throw DimensionMismatch(fmt::format("POVM '{}' has dim {}, world has dim {}", povm.label(),
                                            povm.dim(), dim));
    }
}

const char* condition_name(SieveCondition c) {
    switch (c) {
        case SieveCondition::dynamics: return "dynamics";
        case SieveCondition::reference_pair: return "reference_pair";
        case SieveCondition::reference_pointer: return "reference_pointer";
    }
    return "?";
}

}  // namespace

WorldModel::WorldModel(Operator self_hamiltonian, QuantumState initial_state,
                       double backaction_strength)
    : hamiltonian_(std::move(self_hamiltonian)),
      initial_(std::move(initial_state)),
      kappa_(backaction_strength),
      dof_(register_size(initial_.dim())),
      step_unitary_(Operator::identity(initial_.dim())),
      static_(true) {
    if (hamiltonian_.dim() != initial_.dim()) {
        throw DimensionMismatch("WorldModel: H_W and initial state dimensions differ");
    }
    if (!hamiltonian_.is_hermitian()) throw InvalidOperator("WorldModel: H_W is not Hermitian");
    if (!(kappa_ >= 0.0)) throw std::invalid_argument("WorldModel: kappa must be >= 0");
    static_ = hamiltonian_.matrix().cwiseAbs().maxCoeff() == 0.0;
    if (!static_) step_unitary_ = unitary_evolution(hamiltonian_, 1.0);
}

WorldModel WorldModel::zero_register(std::size_t degrees_of_freedom, Operator self_hamiltonian,
                                     double backaction_strength) {
    return WorldModel(std::move(self_hamiltonian),
                      QuantumState::basis(std::size_t{1} << degrees_of_freedom, 0),
                      backaction_strength);
}

ApparentSpace build_apparent_space(const MeasurementRecord& record, std::size_t n_povms) {
    record.validate(n_povms);
    ApparentSpace space;
    std::set<std::size_t> seen;
    for (const auto& row : record.rows) {
        if (seen.insert(row.povm_index).second) space.povm_indices.push_back(row.povm_index);
    }
    space.dim = space.povm_indices.size();
    return space;
}

ApparentSpace build_apparent_space(const MeasurementRecord& record,
                                   std::span<const BinaryPOVM> povms) {
    ApparentSpace space = build_apparent_space(record, povms.size());
    bool orthogonal = space.dim > 0;
    for (std::size_t a = 0; a < space.dim; ++a) {
        const BinaryPOVM& pa = povms[space.povm_indices[a] - 1];
        space.labels.push_back(pa.label());
        orthogonal = orthogonal && pa.is_projective();
        for (std::size_t b = 0; orthogonal && b < a; ++b) {
            const BinaryPOVM& pb = povms[space.povm_indices[b] - 1];
            const Operator prod = pa.effect(1) * pb.effect(1);
            orthogonal = prod.matrix().cwiseAbs().maxCoeff() <= kDefaultTolerances.num;
        }
    }
    space.orthogonal = orthogonal;
    return space;
}

std::string ObservableSystem::reference_state() const {
    std::string s;
    for (const auto& r : reference) s += static_cast<char>('0' + r.required_outcome);
    return s;
}

bool ObservableSystem::satisfies_bounds() const noexcept {
    const std::size_t n = povm_count;
    return k() > 1 && k() < n && l() > 1 && l() < n - k();
}

std::string SieveReport::to_csv() const {
    std::string out = "condition,first,second,norm,pass\n";
    for (const auto& e : entries) {
        out += fmt::format("{},{},{},{:.17g},{}\n", condition_name(e.condition), e.first + 1,
                           e.second + 1, e.norm, e.pass ? 1 : 0);
    }
    return out;
}

SieveReport check_sieve(const ObservableSystem& system, const WorldModel& world,
                        const Operator& measurement_hamiltonian, double delta) {
    const std::size_t dim = world.dim();
    if (measurement_hamiltonian.dim() != dim) {
        throw DimensionMismatch("check_sieve: H_OW dimension differs from world");
    }
    for (const auto& r : system.reference) require_dim(r.povm, dim);
    for (const auto& p : system.pointer) require_dim(p.povm, dim);

    SieveReport report;
    report.delta = delta;
    const auto add = [&](SieveCondition c, std::size_t a, std::size_t b, double norm) {
        const bool pass = norm <= delta;
        report.entries.push_back({c, a, b, norm, pass});
        report.passed = report.passed && pass;
        report.max_norm = std::max(report.max_norm, norm);
    };

    const Operator total = world.self_hamiltonian() + measurement_hamiltonian;
    for (const auto& r : system.reference) {
        add(SieveCondition::dynamics, r.index, r.index, commutator_norm(total, r.povm.effect(1)));
    }
    for (std::size_t i = 0; i < system.reference.size(); ++i) {
        for (std::size_t j = i + 1; j < system.reference.size(); ++j) {
            add(SieveCondition::reference_pair, system.reference[i].index,
                system.reference[j].index,
                commutator_norm(system.reference[i].povm.effect(1),
                                system.reference[j].povm.effect(1)));
        }
    }
    for (const auto& r : system.reference) {
        for (const auto& p : system.pointer) {
            add(SieveCondition::reference_pointer, r.index, p.index,
                commutator_norm(r.povm.effect(1), p.povm.effect(1)));
        }
    }
    std::set<std::size_t> ref_indices;
    for (const auto& r : system.reference) ref_indices.insert(r.index);
    for (const auto& p : system.pointer) {
        if (ref_indices.contains(p.index)) report.disjoint = false;
    }
    report.passed = report.passed && report.disjoint;
    return report;
}

Operator uniform_measurement_hamiltonian(const ObservableSystem& system) {
    const std::size_t members = system.k() + system.l();
    if (members == 0) throw std::invalid_argument("uniform_measurement_hamiltonian: empty system");
    const std::size_t dim =
        system.k() > 0 ? system.reference.front().povm.dim() : system.pointer.front().povm.dim();
    Operator h = Operator::zero(dim);
    for (const auto& r : system.reference) h += r.povm.effect(1);
    for (const auto& p : system.pointer) h += p.povm.effect(1);
    return h * Complex(1.0 / static_cast<double>(members));
}

StabilityProfile outcome_stability(std::span<const BinaryPOVM> povms, const WorldModel& world,
                                   std::size_t trials, Rng& rng) {
    if (trials < 2) throw std::invalid_argument("outcome_stability: need at least 2 cycles");
    for (const auto& p : povms) require_dim(p, world.dim());
    StabilityProfile profile;
    QuantumState state = world.initial_state();
    for (std::size_t c = 0; c < trials; ++c) {
        std::vector<int> cycle;
        cycle.reserve(povms.size());
        for (const auto& povm : povms) {
            if (!world.has_static_dynamics()) state = state.evolved(world.step_unitary());
            MeasurementOutcome m = apply_measurement(state, povm, rng);
            state = std::move(m.state);
            cycle.push_back(m.outcome);
        }
        profile.outcomes.push_back(std::move(cycle));
    }
    profile.stable.assign(povms.size(), true);
    for (std::size_t i = 0; i < povms.size(); ++i) {
        for (std::size_t c = 1; c < trials; ++c) {
            if (profile.outcomes[c][i] != profile.outcomes[0][i]) profile.stable[i] = false;
        }
    }
    return profile;
}

DiscoveryResult discover_system(std::span<const BinaryPOVM> povms, const WorldModel& world,
                                std::size_t trials, double delta, Rng& rng) {
    const std::size_t n = povms.size();
    if (n < 4) throw std::invalid_argument("discover_system: need at least 4 POVMs");
    const StabilityProfile profile = outcome_stability(povms, world, trials, rng);

    std::vector<std::vector<double>> norms(n, std::vector<double>(n, 0.0));
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            norms[i][j] = norms[j][i] = commutator_norm(povms[i].effect(1), povms[j].effect(1));
        }
    }

    std::vector<std::size_t> candidates;
    for (std::size_t i = 0; i < n; ++i) {
        if (profile.stable[i] &&
            commutator_norm(world.self_hamiltonian(), povms[i].effect(1)) <= delta) {
            candidates.push_back(i);
        }
    }

    std::vector<std::size_t> reference;
    for (std::size_t seed : candidates) {
        std::vector<std::size_t> group{seed};
        std::vector<std::size_t> remaining;
        for (std::size_t c : candidates) {
            if (c != seed) remaining.push_back(c);
        }
        while (!remaining.empty()) {
            std::size_t best = remaining.size();
            double best_score = std::numeric_limits<double>::infinity();
            for (std::size_t r = 0; r < remaining.size(); ++r) {
                double score = 0.0;
                for (std::size_t m : group) score = std::max(score, norms[remaining[r]][m]);
                if (score < best_score) {
                    best_score = score;
                    best = r;
                }
            }
            if (best_score > delta) break;
            group.push_back(remaining[best]);
            remaining.erase(remaining.begin() + static_cast<std::ptrdiff_t>(best));
        }
        if (group.size() > reference.size()) reference = std::move(group);
    }
    std::sort(reference.begin(), reference.end());

    const std::size_t k = reference.size();
    if (k <= 1 || k >= n) {
        return NotFound{FailedBound::reference, k, 0, n,
                        fmt::format("reference set has k = {}; need 1 < k < n = {}", k, n)};
    }

    std::vector<std::size_t> pointer;
    for (std::size_t i = 0; i < n; ++i) {
        if (std::find(reference.begin(), reference.end(), i) != reference.end()) continue;
        if (profile.stable[i]) continue;
        bool commutes = true;
        for (std::size_t r : reference) commutes = commutes && norms[i][r] <= delta;
        if (commutes) pointer.push_back(i);
    }
    const std::size_t l = pointer.size();
    if (l <= 1 || l >= n - k) {
        return NotFound{FailedBound::pointer, k, l, n,
                        fmt::format("pointer set has l = {}; need 1 < l < n - k = {}", l, n - k)};
    }

    ObservableSystem system;
    system.sieve_delta = delta;
    system.povm_count = n;
    for (std::size_t r : reference) system.reference.push_back({r, povms[r], profile.outcomes[0][r]});
    for (std::size_t p : pointer) system.pointer.push_back({p, povms[p]});

    const SieveReport report =
        check_sieve(system, world, uniform_measurement_hamiltonian(system), delta);
    if (!report.passed) {
        return NotFound{FailedBound::sieve, k, l, n,
                        fmt::format("selected sets fail the sieve (max norm {:.3g} > {:.3g})",
                                    report.max_norm, delta)};
    }
    return system;
}

std::string ObservedPropagator::to_csv() const {
    std::string out = "from,to,count\n";
    for (const auto& [from, succ] : transitions) {
        for (const auto& [to, count] : succ) out += fmt::format("{},{},{}\n", from, to, count);
    }
    return out;
}

ObservedPropagator observed_propagator(const MeasurementRecord& record,
                                       const ObservableSystem& system) {
    ObservedPropagator prop;
    const std::size_t l = system.l();
    if (l == 0) return prop;
    std::vector<int> current(l, 0);
    std::vector<bool> fresh(l, false);
    for (const auto& row : record.rows) {
        for (std::size_t p = 0; p < l; ++p) {
            if (system.pointer[p].index + 1 != row.povm_index) continue;
            current[p] = row.outcome;
            fresh[p] = true;
        }
        if (std::all_of(fresh.begin(), fresh.end(), [](bool f) { return f; })) {
            std::string s;
            for (int x : current) s += static_cast<char>('0' + x);
            prop.states.push_back(std::move(s));
            std::fill(fresh.begin(), fresh.end(), false);
        }
    }
    for (std::size_t t = 1; t < prop.states.size(); ++t) {
        ++prop.transitions[prop.states[t - 1]][prop.states[t]];
    }
    for (const auto& [from, succ] : prop.transitions) {
        if (succ.size() > 1) prop.deterministic = false;
    }
    return prop;
}

std::string RefinementScanResult::to_csv() const {
    std::string out = "n_probes,heat_kBT,ref_error_rate,max_comm_norm\n";
    for (const auto& r : rows) {
        out += fmt::format("{},{:.17g},{:.17g},{:.17g}\n", r.n_probes, r.heat_kbt,
                           r.ref_error_rate, r.max_comm_norm);
    }
    return out;
}

namespace {

struct RefinementAcc {
    std::uint64_t errors = 0;
    std::uint64_t checks = 0;
    double max_norm = 0.0;

    void merge(const RefinementAcc& o) {
        errors += o.errors;
        checks += o.checks;
        max_norm = std::max(max_norm, o.max_norm);
    }
};

// Single trial of the backaction model with `probes` identification probes.
void refinement_trial(const WorldModel& world, std::size_t probes, const ThermoLedger& ledger,
                      Rng& rng, RefinementAcc& acc) {
    const std::size_t nq = world.degrees_of_freedom();
    const double kappa = world.backaction_strength();
    const Matrix& hw = world.self_hamiltonian().matrix();
    const Matrix& u = world.step_unitary().matrix();
    const bool moving = !world.has_static_dynamics();
    const Eigen::Index dim = static_cast<Eigen::Index>(world.dim());

    Matrix rho = world.initial_state().rho().matrix();
    ThermoLedger local(ledger.c_obs(), ledger.temperature(), ledger.dt_obs());
    std::vector<int> recorded(probes, 0);

    for (std::size_t q = 0; q < probes; ++q) {
        if (moving) rho = u * rho * u.adjoint();
        const int x = rng.uniform() < register_probability_one(rho, q, nq) ? 1 : 0;
        rho = register_project(rho, q, nq, x);
        recorded[q] = x;
        local.charge(1);

        const double theta = kappa * local.heat_kbt() / static_cast<double>(nq);
        Matrix h_eff = hw;
        // H_OW(t): the deployed probe effect |1><1|_q, diagonal.
        const Eigen::Index mask = Eigen::Index{1} << (nq - 1 - q);
        for (Eigen::Index i = 0; i < dim; ++i) {
            if (i & mask) h_eff(i, i) += 1.0;
        }
        if (theta > 0.0) {
            for (std::size_t w = 0; w < nq; ++w) {
                const double nz = 2.0 * rng.uniform() - 1.0;
                const double phi = 2.0 * std::numbers::pi * rng.uniform();
                const double r = std::sqrt(std::max(0.0, 1.0 - nz * nz));
                const double nx = r * std::cos(phi);
                const double ny = r * std::sin(phi);
                const Matrix rot = bloch_rotation(nx, ny, nz, theta).matrix();
                rho = conjugate_on_qubit(rho, rot, w, nq);
                const Operator gen =
                    Complex(theta / 2.0) *
                    (Complex(nx) * pauli_x() + Complex(ny) * pauli_y() + Complex(nz) * pauli_z());
                h_eff += embed_qubit(gen, w, nq).matrix();
            }
        }
        for (std::size_t r = 0; r <= q; ++r) {
            acc.max_norm = std::max(acc.max_norm, register_projector_commutator_norm(h_eff, r, nq));
        }
    }

    for (std::size_t q = 0; q < probes; ++q) {
        if (moving) rho = u * rho * u.adjoint();
        const int x = rng.uniform() < register_probability_one(rho, q, nq) ? 1 : 0;
        rho = register_project(rho, q, nq, x);
        if (x != recorded[q]) ++acc.errors;
        ++acc.checks;
    }
}

}  // namespace

RefinementScanResult refinement_scan(const WorldModel& world,
                                     std::span<const std::size_t> probe_counts,
                                     const ThermoLedger& ledger, std::size_t trials,
                                     std::uint64_t seed, Execution exec) {
    if (trials == 0) throw std::invalid_argument("refinement_scan: trials must be positive");
    for (std::size_t i = 0; i < probe_counts.size(); ++i) {
        if (probe_counts[i] == 0) throw std::invalid_argument("refinement_scan: zero probe count");
        if (probe_counts[i] > world.degrees_of_freedom()) {
            throw std::invalid_argument(fmt::format("refinement_scan: {} probes exceed d_W = {}",
                                                    probe_counts[i], world.degrees_of_freedom()));
        }
        if (i > 0 && probe_counts[i] <= probe_counts[i - 1]) {
            throw std::invalid_argument("refinement_scan: probe counts must increase");
        }
    }

    RefinementScanResult result;
    for (std::size_t probes : probe_counts) {
        const RefinementAcc acc = reduce_trials<RefinementAcc>(
            exec, trials, [&](std::uint64_t t, RefinementAcc& local) {
                Rng rng(derive_seed(seed, streams::refinement,
                                    (static_cast<std::uint64_t>(probes) << 32) | t));
                refinement_trial(world, probes, ledger, rng, local);
            });
        const RefinementCost cost = refinement_cost(probes, ledger);
        result.rows.push_back({probes, cost.kbt,
                               static_cast<double>(acc.errors) / static_cast<double>(acc.checks),
                               acc.max_norm, acc.errors, acc.checks});
    }
    return result;
}

}  // namespace sysid
