#include "sysid/spatial.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include <fmt/format.h>

#include "sysid/measurement.hpp"
#include "sysid/rng.hpp"
#include "sysid/simplex.hpp"

namespace sysid {

namespace {

Correlator estimate(std::int64_t sum, std::uint64_t count) {
    Correlator c;
    c.sum = sum;
    c.count = count;
    if (count == 0) return c;
    const double n = static_cast<double>(count);
    c.value = static_cast<double>(sum) / n;
    c.std_error = std::sqrt(std::max(0.0, 1.0 - c.value * c.value) / n);
    return c;
}

struct TrialPair {
    TranscriptEntry alice;
    TranscriptEntry bob;
};

// Each party's identity register is a local qubit in |0>, read in the
// computational basis. It never interacts with the shared pair, so it is
// kept as a separate product factor.
struct ReferenceCheck {
    BinaryPOVM povm = BinaryPOVM::computational("ref");
    QuantumState reference = QuantumState::basis(2, 0);

    int read(QuantumState& state, Rng& rng) const {
        MeasurementOutcome m = apply_measurement(state, povm, rng);
        state = std::move(m.state);
        return m.outcome;
    }
};

LOCCTranscript assemble(std::vector<TrialPair> trials) {
    LOCCTranscript tr;
    tr.alice_log.reserve(trials.size());
    tr.bob_log.reserve(trials.size());
    for (TrialPair& p : trials) {
        tr.alice_log.push_back(p.alice);
        tr.bob_log.push_back(p.bob);
    }
    // Post-measurement classical phase: each party announces its log.
    const auto message = [](const char* from, const char* to,
                            const std::vector<TranscriptEntry>& log) {
        ClassicalMessage msg{from, to, {}};
        msg.payload.reserve(log.size());
        for (const TranscriptEntry& e : log) msg.payload.push_back({e.setting, e.outcome});
        return msg;
    };
    tr.classical_messages.push_back(message("alice", "bob", tr.alice_log));
    tr.classical_messages.push_back(message("bob", "alice", tr.bob_log));
    tr.table = tr.recompute();
    return tr;
}

int coin(Rng& rng) { return rng.bernoulli(0.5) ? 1 : 0; }

}  // namespace

Angles Angles::standard() {
    return {0.0, std::numbers::pi / 2.0, std::numbers::pi / 4.0, 3.0 * std::numbers::pi / 4.0};
}

void BipartiteScenario::validate() const {
    if (shared_state.dim() != 4) {
        throw DimensionMismatch(
            fmt::format("bipartite scenario needs a two-qubit state, got dimension {}",
                        shared_state.dim()));
    }
    for (double v : {angles.a, angles.a_prime, angles.b, angles.b_prime}) {
        if (!std::isfinite(v)) throw std::invalid_argument("bipartite scenario: angle not finite");
    }
}

CorrelationTable CorrelationTable::exact(double e_ab, double e_abp, double e_apb, double e_apbp) {
    return exact(std::array<double, 4>{e_ab, e_abp, e_apb, e_apbp});
}

CorrelationTable CorrelationTable::exact(const std::array<double, 4>& e) {
    CorrelationTable t;
    for (std::size_t i = 0; i < 4; ++i) t.entries[i].value = e[i];
    return t;
}

std::array<double, 4> CorrelationTable::values() const {
    return {entries[0].value, entries[1].value, entries[2].value, entries[3].value};
}

bool CorrelationTable::sampled() const {
    return std::any_of(entries.begin(), entries.end(),
                       [](const Correlator& c) { return c.count > 0; });
}

double CorrelationTable::chsh_std_error() const {
    double s = 0.0;
    for (const Correlator& c : entries) s += c.std_error * c.std_error;
    return std::sqrt(s);
}

void CorrelationTable::validate() const {
    const bool is_sampled = sampled();
    for (std::size_t i = 0; i < 4; ++i) {
        const Correlator& c = entries[i];
        if (!std::isfinite(c.value) || std::abs(c.value) > 1.0 + 3.0 * c.std_error) {
            throw MalformedTable(fmt::format(
                "correlation table entry (x={}, y={}) = {} lies outside [-1, 1]", i / 2, i % 2,
                c.value));
        }
        if (is_sampled && c.count == 0) {
            throw MalformedTable(fmt::format(
                "correlation table entry (x={}, y={}) has no trials", i / 2, i % 2));
        }
    }
}

std::string CorrelationTable::to_csv() const {
    std::string out = "x,y,estimate,stderr,count\n";
    for (std::size_t i = 0; i < 4; ++i) {
        out += fmt::format("{},{},{:.17g},{:.17g},{}\n", i / 2, i % 2, entries[i].value,
                           entries[i].std_error, entries[i].count);
    }
    return out;
}

std::array<double, 8> chsh_variants(const std::array<double, 4>& e) {
    const double total = e[0] + e[1] + e[2] + e[3];
    std::array<double, 8> v{};
    for (std::size_t i = 0; i < 4; ++i) {
        v[i] = total - 2.0 * e[i];
        v[i + 4] = -v[i];
    }
    return v;
}

double chsh_value(const std::array<double, 4>& e) {
    const std::array<double, 8> v = chsh_variants(e);
    return *std::max_element(v.begin(), v.end());
}

double chsh_value(const CorrelationTable& table) { return chsh_value(table.values()); }

double exact_correlator(const QuantumState& state, double alice_angle, double bob_angle) {
    if (state.dim() != 4) throw DimensionMismatch("exact_correlator: need a two-qubit state");
    const Operator obs = tensor_product(spin_component(alice_angle), spin_component(bob_angle));
    return (state.rho() * obs).trace().real();
}

CorrelationTable exact_correlations(const BipartiteScenario& scenario) {
    scenario.validate();
    std::array<double, 4> e{};
    for (int x = 0; x < 2; ++x) {
        for (int y = 0; y < 2; ++y) {
            e[static_cast<std::size_t>(2 * x + y)] = exact_correlator(
                scenario.shared_state, scenario.angles.alice(x), scenario.angles.bob(y));
        }
    }
    return CorrelationTable::exact(e);
}

CorrelationTable LOCCTranscript::recompute() const {
    if (alice_log.size() != bob_log.size()) {
        throw MalformedTable("transcript logs differ in length");
    }
    std::array<std::int64_t, 4> sum{};
    std::array<std::uint64_t, 4> count{};
    for (std::size_t t = 0; t < alice_log.size(); ++t) {
        const std::size_t idx = static_cast<std::size_t>(2 * alice_log[t].setting + bob_log[t].setting);
        sum[idx] += to_sign(alice_log[t].outcome) * to_sign(bob_log[t].outcome);
        ++count[idx];
    }
    CorrelationTable out;
    for (std::size_t i = 0; i < 4; ++i) out.entries[i] = estimate(sum[i], count[i]);
    return out;
}

std::size_t LOCCTranscript::reference_exceptions() const {
    std::size_t n = 0;
    for (const auto* log : {&alice_log, &bob_log}) {
        for (const TranscriptEntry& e : *log) {
            n += static_cast<std::size_t>(e.ref_outcomes[0] != reference_outcome) +
                 static_cast<std::size_t>(e.ref_outcomes[1] != reference_outcome);
        }
    }
    return n;
}

std::string LOCCTranscript::log_csv(const std::vector<TranscriptEntry>& log) {
    std::string out = "trial,setting,outcome,ref_outcomes\n";
    out.reserve(out.size() + log.size() * 16);
    for (const TranscriptEntry& e : log) {
        out += fmt::format("{},{},{},{}|{}\n", e.trial, e.setting, e.outcome, e.ref_outcomes[0],
                           e.ref_outcomes[1]);
    }
    return out;
}

LOCCTranscript run_epr_sampled(const BipartiteScenario& scenario, std::uint64_t seed,
                               Execution exec) {
    scenario.validate();
    std::array<BinaryPOVM, 2> alice_povm{
        BinaryPOVM::spin("a", scenario.angles.a, 0, 2),
        BinaryPOVM::spin("a'", scenario.angles.a_prime, 0, 2)};
    std::array<BinaryPOVM, 2> bob_povm{BinaryPOVM::spin("b", scenario.angles.b, 1, 2),
                                       BinaryPOVM::spin("b'", scenario.angles.b_prime, 1, 2)};
    const ReferenceCheck check;

    std::vector<TrialPair> trials(scenario.trials);
    for_each_index(exec, trials.size(), trials.data(), [&](std::size_t t) {
        Rng alice_rng(derive_seed(seed, streams::alice, t));
        Rng bob_rng(derive_seed(seed, streams::bob, t));
        TrialPair p;
        p.alice.trial = p.bob.trial = t;
        p.alice.setting = coin(alice_rng);
        p.bob.setting = coin(bob_rng);

        QuantumState alice_ref = check.reference;
        QuantumState bob_ref = check.reference;
        p.alice.ref_outcomes[0] = check.read(alice_ref, alice_rng);
        p.bob.ref_outcomes[0] = check.read(bob_ref, bob_rng);

        MeasurementOutcome a = apply_measurement(
            scenario.shared_state, alice_povm[static_cast<std::size_t>(p.alice.setting)], alice_rng);
        const MeasurementOutcome b =
            apply_measurement(a.state, bob_povm[static_cast<std::size_t>(p.bob.setting)], bob_rng);
        p.alice.outcome = a.outcome;
        p.bob.outcome = b.outcome;

        p.alice.ref_outcomes[1] = check.read(alice_ref, alice_rng);
        p.bob.ref_outcomes[1] = check.read(bob_ref, bob_rng);
        return p;
    });
    return assemble(std::move(trials));
}

InstructionSet InstructionSet::from_index(std::size_t index) {
    if (index >= 16) throw std::out_of_range("instruction set index must be < 16");
    const int i = static_cast<int>(index);
    return {{(i >> 3) & 1, (i >> 2) & 1}, {(i >> 1) & 1, i & 1}};
}

std::array<InstructionSet, 16> InstructionSet::all() {
    std::array<InstructionSet, 16> sets{};
    for (std::size_t i = 0; i < 16; ++i) sets[i] = from_index(i);
    return sets;
}

std::array<double, 4> InstructionSet::correlators() const {
    std::array<double, 4> e{};
    for (int x = 0; x < 2; ++x) {
        for (int y = 0; y < 2; ++y) {
            e[static_cast<std::size_t>(2 * x + y)] =
                to_sign(alice[static_cast<std::size_t>(x)]) * to_sign(bob[static_cast<std::size_t>(y)]);
        }
    }
    return e;
}

std::array<double, 4> HVModel::correlators() const {
    std::array<double, 4> e{};
    for (std::size_t s = 0; s < 16; ++s) {
        const std::array<double, 4> v = InstructionSet::from_index(s).correlators();
        for (std::size_t i = 0; i < 4; ++i) e[i] += weights[s] * v[i];
    }
    return e;
}

void HVModel::validate() const {
    double total = 0.0;
    for (double w : weights) {
        if (!(w >= 0.0)) throw std::invalid_argument("HV model has a negative weight");
        total += w;
    }
    if (std::abs(total - 1.0) > 1e-12) {
        throw std::invalid_argument(fmt::format("HV model weights sum to {:.17g}", total));
    }
}

std::size_t HVModel::support_size(double tol) const {
    return static_cast<std::size_t>(
        std::count_if(weights.begin(), weights.end(), [tol](double w) { return w > tol; }));
}

std::optional<HVModel> charlie_play(const CorrelationTable& target) {
    target.validate();
    const std::array<double, 4> e = target.values();
    for (double v : e) {
        if (std::abs(v) > 1.0) throw MalformedTable("charlie_play: correlator outside [-1, 1]");
    }
    Eigen::MatrixXd a(4, 16);
    for (std::size_t s = 0; s < 16; ++s) {
        const std::array<double, 4> v = InstructionSet::from_index(s).correlators();
        for (std::size_t i = 0; i < 4; ++i) a(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(s)) = v[i];
    }
    Eigen::VectorXd b(4);
    for (std::size_t i = 0; i < 4; ++i) b(static_cast<Eigen::Index>(i)) = e[i];
    const auto w = feasible_convex_weights(a, b);
    if (!w) return std::nullopt;
    HVModel model;
    std::copy(w->begin(), w->end(), model.weights.begin());
    return model;
}

bool hv_oracle(const CorrelationTable& table) {
    table.validate();
    const std::array<double, 4> e = table.values();
    for (double v : e) {
        if (std::abs(v) > 1.0) throw MalformedTable("hv_oracle: correlator outside [-1, 1]");
    }
    std::vector<std::array<double, 4>> vertices;
    for (const InstructionSet& s : InstructionSet::all()) {
        const std::array<double, 4> v = s.correlators();
        if (std::find(vertices.begin(), vertices.end(), v) == vertices.end()) vertices.push_back(v);
    }
    const std::size_t nv = vertices.size();
    Eigen::VectorXd rhs(5);
    rhs << e[0], e[1], e[2], e[3], 1.0;

    // Caratheodory: a point of the hull lies in the hull of at most five
    // affinely independent vertices.
    for (std::uint32_t mask = 1; mask < (1u << nv); ++mask) {
        const int size = __builtin_popcount(mask);
        if (size > 5) continue;
        Eigen::MatrixXd m(5, size);
        int col = 0;
        for (std::size_t v = 0; v < nv; ++v) {
            if (!(mask & (1u << v))) continue;
            for (int i = 0; i < 4; ++i) m(i, col) = vertices[v][static_cast<std::size_t>(i)];
            m(4, col) = 1.0;
            ++col;
        }
        const Eigen::VectorXd w = m.colPivHouseholderQr().solve(rhs);
        if ((m * w - rhs).norm() <= 1e-9 && w.minCoeff() >= -1e-12) return true;
    }
    return false;
}

const char* to_string(JointVerdict v) noexcept {
    return v == JointVerdict::joint_system_witnessed ? "joint-system-witnessed"
                                                     : "indistinguishable-from-Charlie";
}

std::string VerdictReport::summary() const {
    std::string out = fmt::format("chsh_S={:.17g}\nchsh_stderr={:.17g}\nthreshold={:.17g}\nverdict={}\n",
                                  chsh, std_error, threshold, to_string(verdict));
    if (model) {
        out += fmt::format("hv_model_support={}\nhv_model_projected={}\n", model->support_size(),
                           model->projected ? "true" : "false");
    }
    return out;
}

VerdictReport verdict_joint_identification(const CorrelationTable& table, double sigmas) {
    table.validate();
    VerdictReport r;
    r.chsh = chsh_value(table);
    if (table.sampled()) {
        r.std_error = table.chsh_std_error();
        r.threshold = 2.0 + sigmas * r.std_error;
        if (r.chsh > r.threshold) {
            r.verdict = JointVerdict::joint_system_witnessed;
            return r;
        }
        r.verdict = JointVerdict::indistinguishable_from_charlie;
        r.model = charlie_play(table);
        if (!r.model) {
            std::array<double, 4> scaled = table.values();
            for (double& v : scaled) v *= 2.0 / r.chsh;
            r.model = charlie_play(CorrelationTable::exact(scaled));
            if (r.model) r.model->projected = true;
        }
        return r;
    }
    r.model = charlie_play(table);
    r.verdict = r.model ? JointVerdict::indistinguishable_from_charlie
                        : JointVerdict::joint_system_witnessed;
    return r;
}

LOCCTranscript run_charlie(const HVModel& model, std::uint64_t trials, std::uint64_t seed,
                           Execution exec) {
    model.validate();
    std::array<double, 16> cumulative{};
    double acc = 0.0;
    for (std::size_t s = 0; s < 16; ++s) cumulative[s] = acc += model.weights[s];
    const ReferenceCheck check;

    std::vector<TrialPair> out(trials);
    for_each_index(exec, out.size(), out.data(), [&](std::size_t t) {
        Rng source(derive_seed(seed, streams::charlie, t));
        Rng alice_rng(derive_seed(seed, streams::alice, t));
        Rng bob_rng(derive_seed(seed, streams::bob, t));
        const double u = source.uniform() * acc;
        const std::size_t pick = static_cast<std::size_t>(
            std::min<std::ptrdiff_t>(15, std::upper_bound(cumulative.begin(), cumulative.end(), u) -
                                             cumulative.begin()));
        const InstructionSet lambda = InstructionSet::from_index(pick);

        TrialPair p;
        p.alice.trial = p.bob.trial = t;
        p.alice.setting = coin(alice_rng);
        p.bob.setting = coin(bob_rng);
        QuantumState alice_ref = check.reference;
        QuantumState bob_ref = check.reference;
        p.alice.ref_outcomes[0] = check.read(alice_ref, alice_rng);
        p.bob.ref_outcomes[0] = check.read(bob_ref, bob_rng);
        p.alice.outcome = lambda.alice[static_cast<std::size_t>(p.alice.setting)];
        p.bob.outcome = lambda.bob[static_cast<std::size_t>(p.bob.setting)];
        p.alice.ref_outcomes[1] = check.read(alice_ref, alice_rng);
        p.bob.ref_outcomes[1] = check.read(bob_ref, bob_rng);
        return p;
    });
    return assemble(std::move(out));
}

ChshScan chsh_grid_scan(const QuantumState& state, std::size_t grid_points, Execution exec) {
    if (grid_points == 0) throw std::invalid_argument("chsh_grid_scan: empty grid");
    const std::size_t g = grid_points;
    const auto angle = [g](std::size_t i) {
        return 2.0 * std::numbers::pi * static_cast<double>(i) / static_cast<double>(g);
    };
    std::vector<double> e(g * g);
    for_each_index(exec, e.size(), e.data(),
                   [&](std::size_t k) { return exact_correlator(state, angle(k / g), angle(k % g)); });

    std::vector<ChshScan> rows(g);
    for_each_index(exec, g, rows.data(), [&](std::size_t i) {
        ChshScan best{-1.0, {}};
        for (std::size_t ip = 0; ip < g; ++ip) {
            for (std::size_t j = 0; j < g; ++j) {
                for (std::size_t jp = 0; jp < g; ++jp) {
                    const double s = chsh_value(std::array<double, 4>{
                        e[i * g + j], e[i * g + jp], e[ip * g + j], e[ip * g + jp]});
                    if (s > best.max_chsh) {
                        best = {s, {angle(i), angle(ip), angle(j), angle(jp)}};
                    }
                }
            }
        }
        return best;
    });
    ChshScan best = rows.front();
    for (const ChshScan& r : rows) {
        if (r.max_chsh > best.max_chsh) best = r;
    }
    return best;
}

}  // namespace sysid
