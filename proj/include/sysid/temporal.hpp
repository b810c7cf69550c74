#pragma once

// Two-time correlators and the three-term Leggett-Garg test
//   K = C21 + C32 - C31 <= 1,
// with outcomes mapped {0, 1} -> {-1, +1}. Each C_jk comes from its own
// ensemble: prepare, evolve to t_j, measure (invasively), evolve to t_k,
// measure.
//
// Two backends: exact path enumeration over the outcome branches and seeded
// Monte Carlo. Calibration state is a classical flag of the scenario, not
// part of the quantum state.

#include <array>
#include <cstddef>
#include <cstdint>
#include <string>
#include <utility>
#include <variant>

#include "sysid/measurement.hpp"
#include "sysid/operator.hpp"
#include "sysid/parallel.hpp"

namespace sysid {

enum class LGPair { c21, c32, c31 };

struct LGTimes {
    std::size_t t1 = 0;
    std::size_t t2 = 1;
    std::size_t t3 = 2;

    void validate() const;
    // (earlier, later) measurement times of a pair.
    std::pair<std::size_t, std::size_t> of(LGPair pair) const;
};

// Classical two-state pointer with measurement-induced memory.
//   p_stay_after_1 = Prob(next reading 1 | this reading 1)
//   p_stay_after_0 = Prob(next reading 1 | this reading 0)
// A measurement reads the bit faithfully and then rewrites it to 1 with
// p_stay_after_<reading>; between measurements the bit flips with base_flip
// per step. The pointer remembers its last reading iff the two conditionals
// differ.
class HystereticPointer {
public:
    HystereticPointer(double p_stay_after_1, double p_stay_after_0, double base_flip,
                      double initial_p_one = 0.5);

    double p_stay_after_1() const noexcept { return p1_; }
    double p_stay_after_0() const noexcept { return p0_; }
    double base_flip() const noexcept { return flip_; }
    double initial_p_one() const noexcept { return initial_; }
    double p_one_after(int reading) const noexcept { return reading == 1 ? p1_ : p0_; }
    // Prob(bit = 1) after `steps` free steps starting from Prob(bit = 1) = q.
    double drift(double q, std::size_t steps) const noexcept;

private:
    double p1_;
    double p0_;
    double flip_;
    double initial_;
};

bool memory_condition_check(const HystereticPointer& pointer) noexcept;

struct QuantumPointer {
    Operator step_unitary;
    BinaryPOVM pointer;
    QuantumState initial;
};

struct LGScenario {
    std::variant<QuantumPointer, HystereticPointer> model;
    LGTimes times;
    std::uint64_t trials = 100000;
    bool calibrate_between = false;
    int calibration_standard = 0;

    // Qubit precessing about x by theta_per_step per step, read in the
    // computational basis, starting maximally mixed.
    static LGScenario precession(double theta_per_step, LGTimes times = {},
                                 std::uint64_t trials = 100000);
    void validate() const;
};

struct Estimate {
    double value = 0.0;
    double std_error = 0.0;
    std::int64_t sum = 0;      // sum of +-1 products (sampled backend)
    std::uint64_t count = 0;   // trials (sampled backend)
};

struct CorrelatorMatrix {
    double c21 = 0.0, c32 = 0.0, c31 = 0.0;
    double se21 = 0.0, se32 = 0.0, se31 = 0.0;
    double k_value = 0.0;

    static CorrelatorMatrix from(const Estimate& c21, const Estimate& c32, const Estimate& c31);
    double recomputed_k() const noexcept { return c21 + c32 - c31; }
    double combined_std_error() const noexcept;
};

enum class LGVerdict { violated, not_violated };

struct LGResult {
    CorrelatorMatrix correlators;
    LGVerdict verdict = LGVerdict::not_violated;

    // `pair,estimate,stderr` rows followed by `K,<value>,<verdict>`.
    std::string to_csv() const;
    // violated: the pointer statistics admit no single macrorealist
    // trajectory, which is the evidence that one system was identified
    // across the three times.
    std::string interpretation() const;
};

const char* to_string(LGVerdict v) noexcept;
const char* to_string(LGPair p) noexcept;

// Exact correlator by enumerating the four outcome branches of the pair.
double exact_correlator(const LGScenario& scenario, LGPair pair);
// Exact backend: stderr 0, verdict violated iff K > 1.
LGResult lg_test_exact(const LGScenario& scenario);

Estimate two_time_correlator(const LGScenario& scenario, LGPair pair, std::uint64_t seed,
                             Execution exec = Execution::parallel);
// Sampled backend: violated iff K > 1 + 3 * sqrt(se21^2 + se32^2 + se31^2).
LGResult lg_test(const LGScenario& scenario, std::uint64_t seed,
                 Execution exec = Execution::parallel);

// Re-prepares the pointer in the computational basis state |standard>.
QuantumState calibrate(const QuantumState& pointer_state, int standard);
constexpr int calibrate(int /*pointer_bit*/, int standard) noexcept { return standard; }

// Joint distribution of the three readings when the pointer is run as a
// chain whose transitions do not depend on being read: per step,
// Prob(1 | b) = p_b (1 - f) + (1 - p_b) f. Index = 4 x1 + 2 x2 + x3.
struct PathDistribution {
    std::array<double, 8> probability{};

    double correlator(LGPair pair) const noexcept;
    double k_value() const noexcept;
};

PathDistribution noninvasive_paths(const HystereticPointer& pointer, const LGTimes& times);

struct PrecessionScan {
    double theta = 0.0;
    double k_max = 0.0;
};

// Maximizes exact K over theta in (0, pi) for the precession scenario with
// t = (0, 1, 2): grid of `grid_points`, then golden-section refinement
// around the best grid point.
PrecessionScan scan_precession_maximum(std::size_t grid_points,
                                       Execution exec = Execution::parallel);

}  // namespace sysid
