#include <cmath>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "sysid/error.hpp"
#include "sysid/rng.hpp"
#include "sysid/temporal.hpp"

using namespace sysid;

namespace {

LGScenario frozen_definite() {
    return LGScenario{QuantumPointer{Operator::identity(2), BinaryPOVM::computational("z"),
                                     QuantumState::basis(2, 1)},
                      LGTimes{}, 1000, false, 0};
}

// Two-time correlator of a z pointer under x precession, from the
// closed-form Bloch-vector picture: starting maximally mixed, the first
// reading is +-1 with probability 1/2 and collapses onto +-z; after a
// rotation by phi the second reading has mean +-cos(phi).
double precession_oracle(double theta, int tau) { return std::cos(theta * tau); }

// Memoryless pointer, one ensemble per pair: the reading at t_j is
// independent of what follows, so C_jk factorizes into the mean reading at
// t_j times the mean reading t_k - t_j steps after a rewrite.
double memoryless_correlator(const HystereticPointer& h, std::size_t tj, std::size_t tk) {
    const double r = 1.0 - 2.0 * h.base_flip();
    const double mean_j = (2.0 * h.initial_p_one() - 1.0) * std::pow(r, static_cast<double>(tj));
    const double mean_k = (2.0 * h.p_stay_after_1() - 1.0) * std::pow(r, static_cast<double>(tk - tj));
    return mean_j * mean_k;
}

}  // namespace

TEST(LGTimes, MustIncrease) {
    EXPECT_THROW((LGTimes{1, 1, 2}.validate()), std::invalid_argument);
    EXPECT_NO_THROW((LGTimes{0, 3, 7}.validate()));
}

TEST(Correlator, FrozenDynamicsGivesOne) {
    const LGScenario s = frozen_definite();
    for (LGPair p : {LGPair::c21, LGPair::c32, LGPair::c31}) {
        EXPECT_EQ(exact_correlator(s, p), 1.0);
        const Estimate e = two_time_correlator(s, p, 3);
        EXPECT_EQ(e.value, 1.0);
        EXPECT_EQ(e.std_error, 0.0);
    }
    const LGResult r = lg_test_exact(s);
    EXPECT_EQ(r.correlators.k_value, 1.0);
    EXPECT_EQ(r.verdict, LGVerdict::not_violated);
    EXPECT_EQ(lg_test(s, 4).verdict, LGVerdict::not_violated);
}

TEST(Correlator, PrecessionMatchesCosineOracle) {
    for (double theta : {0.2, 0.7, 1.3, 2.5}) {
        const LGScenario s = LGScenario::precession(theta, LGTimes{0, 1, 3});
        EXPECT_NEAR(exact_correlator(s, LGPair::c21), precession_oracle(theta, 1), 1e-12);
        EXPECT_NEAR(exact_correlator(s, LGPair::c32), precession_oracle(theta, 2), 1e-12);
        EXPECT_NEAR(exact_correlator(s, LGPair::c31), precession_oracle(theta, 3), 1e-12);
    }
}

TEST(Correlator, PerfectClassicalFlipGivesMinusOne) {
    LGScenario s = frozen_definite();
    s.model = HystereticPointer(1.0, 0.0, 1.0);
    EXPECT_EQ(exact_correlator(s, LGPair::c21), -1.0);
    EXPECT_EQ(two_time_correlator(s, LGPair::c21, 8).value, -1.0);
    EXPECT_EQ(exact_correlator(s, LGPair::c31), 1.0);
}

TEST(Correlator, SampledAgreesWithExactWithinThreeSigma) {
    LGScenario s = LGScenario::precession(1.1, LGTimes{0, 1, 2}, 50000);
    for (LGPair p : {LGPair::c21, LGPair::c32, LGPair::c31}) {
        const Estimate e = two_time_correlator(s, p, 11);
        EXPECT_LE(std::abs(e.value - exact_correlator(s, p)), 3.0 * e.std_error);
        EXPECT_EQ(e.count, 50000u);
        EXPECT_DOUBLE_EQ(e.value, static_cast<double>(e.sum) / 50000.0);
    }
}

TEST(LGTest, PiOverThreeGivesOnePointFive) {
    const LGResult r = lg_test_exact(LGScenario::precession(std::numbers::pi / 3.0));
    EXPECT_NEAR(r.correlators.c21, 0.5, 1e-12);
    EXPECT_NEAR(r.correlators.c32, 0.5, 1e-12);
    EXPECT_NEAR(r.correlators.c31, -0.5, 1e-12);
    EXPECT_NEAR(r.correlators.k_value, 1.5, 1e-12);
    EXPECT_EQ(r.verdict, LGVerdict::violated);
    EXPECT_EQ(r.correlators.recomputed_k(), r.correlators.k_value);
}

TEST(LGTest, SampledPrecessionIsViolated) {
    const LGResult r = lg_test(LGScenario::precession(std::numbers::pi / 3.0), 21);
    EXPECT_EQ(r.verdict, LGVerdict::violated);
    EXPECT_NEAR(r.correlators.k_value, 1.5, 4.0 * r.correlators.combined_std_error());
    EXPECT_EQ(r.correlators.recomputed_k(), r.correlators.k_value);
}

TEST(LGTest, ScanFindsMaximumOnePointFive) {
    const PrecessionScan scan = scan_precession_maximum(90);
    EXPECT_NEAR(scan.k_max, 1.5, 1e-9);
    EXPECT_NEAR(scan.theta, std::numbers::pi / 3.0, 1e-5);
    // Independent grid check of the Lueders ceiling.
    for (int i = 1; i < 1000; ++i) {
        const double theta = std::numbers::pi * i / 1000.0;
        EXPECT_LE(2 * std::cos(theta) - std::cos(2 * theta), 1.5 + 1e-9);
        EXPECT_LE(lg_test_exact(LGScenario::precession(theta)).correlators.k_value, 1.5 + 1e-9);
    }
}

TEST(LGTest, ScanSerialAndParallelAgree) {
    const PrecessionScan a = scan_precession_maximum(40, Execution::serial);
    const PrecessionScan b = scan_precession_maximum(40, Execution::parallel);
    EXPECT_EQ(a.theta, b.theta);
    EXPECT_EQ(a.k_max, b.k_max);
}

TEST(LGTest, SampledSerialAndParallelAgreeBitForBit) {
    const LGScenario s = LGScenario::precession(0.9, LGTimes{0, 2, 3}, 20000);
    const LGResult a = lg_test(s, 5, Execution::serial);
    const LGResult b = lg_test(s, 5, Execution::parallel);
    EXPECT_EQ(a.to_csv(), b.to_csv());
}

TEST(LGTest, CsvLayout) {
    const std::string csv = lg_test_exact(frozen_definite()).to_csv();
    EXPECT_EQ(csv.substr(0, csv.find('\n')), "pair,estimate,stderr");
    EXPECT_NE(csv.find("\nK,1,not-violated\n"), std::string::npos);
}

TEST(Memory, ConditionExamples) {
    EXPECT_FALSE(memory_condition_check(HystereticPointer(0.9, 0.9, 0.1)));
    EXPECT_TRUE(memory_condition_check(HystereticPointer(0.9, 0.5, 0.1)));
    EXPECT_TRUE(memory_condition_check(HystereticPointer(1.0, 0.0, 0.1)));
    EXPECT_THROW(HystereticPointer(1.2, 0.0, 0.1), std::invalid_argument);
}

TEST(Memory, MemorylessPointerSatisfiesBoundExactlyAndSampled) {
    std::mt19937_64 gen(31);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int trial = 0; trial < 200; ++trial) {
        const double p = u(gen), f = u(gen);
        const HystereticPointer h(p, p, f, u(gen));
        const LGTimes t{static_cast<std::size_t>(trial % 2), 1 + static_cast<std::size_t>(trial % 2) + static_cast<std::size_t>(trial % 3),
                        4 + static_cast<std::size_t>(trial % 2)};
        LGScenario s = frozen_definite();
        s.times = t;
        s.model = h;
        const double k = lg_test_exact(s).correlators.k_value;
        EXPECT_LE(k, 1.0 + 1e-12);
        const double oracle = memoryless_correlator(h, t.t1, t.t2) + memoryless_correlator(h, t.t2, t.t3) -
                              memoryless_correlator(h, t.t1, t.t3);
        EXPECT_NEAR(k, oracle, 1e-12);
    }
    LGScenario s = frozen_definite();
    s.trials = 100000;
    s.model = HystereticPointer(0.7, 0.7, 0.2);
    const LGResult r = lg_test(s, 77);
    EXPECT_LE(r.correlators.k_value, 1.0 + 3.0 * r.correlators.combined_std_error());
    EXPECT_EQ(r.verdict, LGVerdict::not_violated);
}

TEST(Memory, NoninvasivePathsRespectClassicalBound) {
    std::mt19937_64 gen(32);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int trial = 0; trial < 500; ++trial) {
        const HystereticPointer h(u(gen), u(gen), u(gen), u(gen));
        const PathDistribution d = noninvasive_paths(h, LGTimes{0, 1, 2});
        double total = 0.0;
        for (double p : d.probability) {
            EXPECT_GE(p, 0.0);
            total += p;
        }
        EXPECT_NEAR(total, 1.0, 1e-12);
        EXPECT_LE(d.k_value(), 1.0 + 1e-12);
    }
}

TEST(Calibration, IdempotentAndResetsToStandard) {
    const QuantumState mixed = QuantumState::maximally_mixed(2);
    const QuantumState once = calibrate(mixed, 1);
    EXPECT_LT(max_abs_diff(calibrate(once, 1).rho(), once.rho()), 1e-15);
    EXPECT_LT(max_abs_diff(once.rho(), QuantumState::basis(2, 1).rho()), 1e-15);
    static_assert(calibrate(calibrate(0, 1), 1) == 1);
}

TEST(Calibration, ErasesHistoryChiSquare) {
    // History: an x reading of |0>. Without calibration the next x readings
    // repeat it; after calibrating to |0> they are independent of it.
    const BinaryPOVM x = BinaryPOVM::spin("x", std::numbers::pi / 2.0);
    const int n = 10000;
    std::array<std::array<double, 2>, 2> table{};
    int repeats_without = 0;
    for (int t = 0; t < n; ++t) {
        Rng rng(derive_seed(2024, 1, static_cast<std::uint64_t>(t)));
        const MeasurementOutcome history = apply_measurement(QuantumState::basis(2, 0), x, rng);
        const MeasurementOutcome raw = apply_measurement(history.state, x, rng);
        repeats_without += raw.outcome == history.outcome;
        const QuantumState c = calibrate(history.state, 0);
        const MeasurementOutcome first = apply_measurement(c, x, rng);
        const MeasurementOutcome second = apply_measurement(first.state, x, rng);
        EXPECT_EQ(first.outcome, second.outcome);
        table[static_cast<std::size_t>(history.outcome)][static_cast<std::size_t>(first.outcome)] += 1.0;
    }
    EXPECT_EQ(repeats_without, n);
    double chi2 = 0.0;
    for (int a = 0; a < 2; ++a) {
        for (int b = 0; b < 2; ++b) {
            const double row = table[a][0] + table[a][1];
            const double col = table[0][b] + table[1][b];
            const double expected = row * col / n;
            chi2 += (table[a][b] - expected) * (table[a][b] - expected) / expected;
        }
    }
    const double p_value = std::erfc(std::sqrt(chi2 / 2.0));
    EXPECT_GT(p_value, 0.01) << "chi2 = " << chi2;
}

TEST(Calibration, RestoresClassicalBoundInLGRun) {
    LGScenario s = LGScenario::precession(std::numbers::pi / 3.0);
    s.calibrate_between = true;
    const LGResult exact = lg_test_exact(s);
    EXPECT_LE(exact.correlators.k_value, 1.0 + 1e-12);
    const LGResult sampled = lg_test(s, 99);
    EXPECT_LE(sampled.correlators.k_value, 1.0 + 3.0 * sampled.correlators.combined_std_error());
    EXPECT_EQ(sampled.verdict, LGVerdict::not_violated);
}

TEST(LGScenario, RejectsNonUnitaryDynamics) {
    LGScenario s = LGScenario::precession(0.5);
    std::get<QuantumPointer>(s.model).step_unitary = Operator::diagonal({1.0, 0.5});
    EXPECT_THROW(lg_test_exact(s), InvalidOperator);
}
