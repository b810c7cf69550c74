#pragma once

// Bipartite CHSH experiments, the classical adversary who plays
// deterministic instruction sets, and the local-hidden-variable feasibility
// test on correlation tables.
//
// Settings are indexed x, y in {0, 1}: x = 0 is Alice's a, x = 1 is a'; y = 0
// is Bob's b, y = 1 is b'. Table entries are stored at index 2x + y.

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "sysid/operator.hpp"
#include "sysid/parallel.hpp"

namespace sysid {

// Measurement directions in the x-z plane of the Bloch sphere.
struct Angles {
    double a = 0.0;
    double a_prime = 0.0;
    double b = 0.0;
    double b_prime = 0.0;

    // a = 0, a' = pi/2, b = pi/4, b' = 3 pi/4.
    static Angles standard();
    double alice(int x) const { return x == 0 ? a : a_prime; }
    double bob(int y) const { return y == 0 ? b : b_prime; }
};

struct BipartiteScenario {
    QuantumState shared_state;
    Angles angles;
    std::uint64_t trials = 100000;

    void validate() const;
};

struct Correlator {
    double value = 0.0;
    double std_error = 0.0;
    std::int64_t sum = 0;
    std::uint64_t count = 0;
};

struct CorrelationTable {
    std::array<Correlator, 4> entries{};

    // Noise-free table from four correlators in the order
    // E(a,b), E(a,b'), E(a',b), E(a',b').
    static CorrelationTable exact(double e_ab, double e_abp, double e_apb, double e_apbp);
    static CorrelationTable exact(const std::array<double, 4>& e);

    double e(int x, int y) const { return entries[static_cast<std::size_t>(2 * x + y)].value; }
    std::array<double, 4> values() const;
    bool sampled() const;
    // sqrt of the summed squared standard errors of the four entries.
    double chsh_std_error() const;
    // Rejects entries with |E| > 1 + 3 stderr and sampled entries without
    // trials. Throws MalformedTable.
    void validate() const;
    // `x,y,estimate,stderr,count`, x and y as setting indices.
    std::string to_csv() const;
};

// Signed values +-(E00 + E01 + E10 + E11 - 2 E_xy) for each choice of the
// negated entry xy, positive variants first.
std::array<double, 8> chsh_variants(const std::array<double, 4>& e);
double chsh_value(const std::array<double, 4>& e);
double chsh_value(const CorrelationTable& table);

// tr(rho (s(x) (x) s(y))) with s(angle) = cos(angle) Z + sin(angle) X.
double exact_correlator(const QuantumState& state, double alice_angle, double bob_angle);
CorrelationTable exact_correlations(const BipartiteScenario& scenario);

struct TranscriptEntry {
    std::uint64_t trial = 0;
    int setting = 0;
    int outcome = 0;
    // Reference readings taken before and after the pointer measurement.
    std::array<int, 2> ref_outcomes{};
};

struct ClassicalMessage {
    std::string sender;
    std::string receiver;
    // (setting, outcome) of every trial, in trial order.
    std::vector<std::array<int, 2>> payload;
};

struct LOCCTranscript {
    std::vector<TranscriptEntry> alice_log;
    std::vector<TranscriptEntry> bob_log;
    std::vector<ClassicalMessage> classical_messages;
    CorrelationTable table;
    // Declared reference outcome of both parties' identity checks.
    int reference_outcome = 0;

    // Rebuilds the table from the two logs alone.
    CorrelationTable recompute() const;
    std::size_t reference_exceptions() const;
    // `trial,setting,outcome,ref_outcomes`; ref_outcomes as before|after.
    static std::string log_csv(const std::vector<TranscriptEntry>& log);
};

// Per trial: independent fair setting coins for Alice and Bob, a local
// Lueders measurement by each on the shared state, and a reference check on
// each party's own identity register before and after. Messages are
// exchanged only after all trials.
LOCCTranscript run_epr_sampled(const BipartiteScenario& scenario, std::uint64_t seed,
                               Execution exec = Execution::parallel);

// Alice's bits (a, a') and Bob's bits (b, b'), outcome 1 read as +1.
struct InstructionSet {
    std::array<int, 2> alice{};
    std::array<int, 2> bob{};

    // Index 8 alice[0] + 4 alice[1] + 2 bob[0] + bob[1].
    static InstructionSet from_index(std::size_t index);
    static std::array<InstructionSet, 16> all();
    std::array<double, 4> correlators() const;
};

struct HVModel {
    std::array<double, 16> weights{};
    // Set when the model reproduces a table rescaled onto the local polytope
    // rather than the table itself.
    bool projected = false;

    std::array<double, 4> correlators() const;
    void validate() const;
    std::size_t support_size(double tol = 1e-12) const;
};

// LP over the 16 instruction sets matching the four correlators. nullopt
// when no local deterministic model reproduces the table.
std::optional<HVModel> charlie_play(const CorrelationTable& target);

// Independent feasibility check: brute-force search for a convex
// combination of the eight distinct deterministic correlator vectors, using
// every subset of at most five vertices.
bool hv_oracle(const CorrelationTable& table);

enum class JointVerdict { joint_system_witnessed, indistinguishable_from_charlie };
const char* to_string(JointVerdict v) noexcept;

struct VerdictReport {
    JointVerdict verdict = JointVerdict::indistinguishable_from_charlie;
    double chsh = 0.0;
    double std_error = 0.0;
    double threshold = 2.0;
    std::optional<HVModel> model;

    std::string summary() const;
};

// Exact tables: witnessed iff charlie_play fails. Sampled tables: witnessed
// iff S > 2 + sigmas * chsh_std_error(). Otherwise Charlie's model is
// attached; for a sampled table outside the local polytope the model
// reproduces the table scaled by 2/S and is marked projected.
VerdictReport verdict_joint_identification(const CorrelationTable& table, double sigmas = 3.0);

// Charlie draws an instruction set per trial from `model`; Alice and Bob
// draw their settings as in run_epr_sampled and read off the assigned bits.
LOCCTranscript run_charlie(const HVModel& model, std::uint64_t trials, std::uint64_t seed,
                           Execution exec = Execution::parallel);

struct ChshScan {
    double max_chsh = 0.0;
    Angles argmax;
};

// Evaluates E on a grid_points x grid_points grid of (alice, bob) angles in
// [0, 2 pi) and maximizes S over every choice of a, a', b, b' on the grid.
ChshScan chsh_grid_scan(const QuantumState& state, std::size_t grid_points,
                        Execution exec = Execution::parallel);

}  // namespace sysid
