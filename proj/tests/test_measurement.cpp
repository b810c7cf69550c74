#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "support.hpp"
#include "sysid/error.hpp"
#include "sysid/measurement.hpp"
#include "sysid/register.hpp"

using namespace sysid;
using sysid::testing::random_effect;
using sysid::testing::random_state;

namespace {

QuantumState plus_state() {
    const double h = 1.0 / std::sqrt(2.0);
    return QuantumState::pure({h, h});
}

}  // namespace

TEST(BinaryPOVM, RejectsEffectsThatDoNotSumToIdentity) {
    EXPECT_THROW(BinaryPOVM("bad", Operator::diagonal({1, 0}), Operator::diagonal({0, 0.5})),
                 InvalidOperator);
    EXPECT_THROW(BinaryPOVM("neg", Operator::diagonal({1.5, 0}), Operator::diagonal({-0.5, 1})),
                 InvalidOperator);
    EXPECT_THROW(BinaryPOVM("dim", Operator::identity(2), Operator::zero(3)), DimensionMismatch);
}

TEST(BinaryPOVM, KrausOperatorsSquareToEffects) {
    std::mt19937_64 gen(11);
    const BinaryPOVM povm = BinaryPOVM::from_effect("e", random_effect(gen, 3));
    for (int x = 0; x < 2; ++x) {
        EXPECT_LT(max_abs_diff(povm.kraus(x) * povm.kraus(x), povm.effect(x)), 1e-12);
    }
    EXPECT_FALSE(povm.is_projective());
    EXPECT_TRUE(BinaryPOVM::computational("z").is_projective());
}

TEST(BinaryPOVM, SpinOutcomeOneIsPlusEigenvalue) {
    const BinaryPOVM x = BinaryPOVM::spin("x", std::numbers::pi / 2.0);
    EXPECT_NEAR(born_probabilities(plus_state(), x).p1, 1.0, 1e-15);
    EXPECT_LT(max_abs_diff(x.effect(1) - x.effect(0), pauli_x()), 1e-15);
}

TEST(BornProbabilities, ComputationalExamples) {
    const BinaryPOVM z = BinaryPOVM::computational("z");
    const BornProbabilities zero = born_probabilities(QuantumState::basis(2, 0), z);
    EXPECT_EQ(zero.p0, 1.0);
    EXPECT_EQ(zero.p1, 0.0);
    const BornProbabilities plus = born_probabilities(plus_state(), z);
    EXPECT_NEAR(plus.p0, 0.5, 1e-15);
    EXPECT_NEAR(plus.p1, 0.5, 1e-15);
}

TEST(BornProbabilities, MaximallyMixedGivesHalfForRankOneProjectors) {
    for (double a : {0.0, 0.4, 1.3, 2.9}) {
        const BornProbabilities p =
            born_probabilities(QuantumState::maximally_mixed(2), BinaryPOVM::spin("s", a));
        EXPECT_NEAR(p.p0, 0.5, 1e-15);
        EXPECT_NEAR(p.p1, 0.5, 1e-15);
    }
}

TEST(BornProbabilities, SumToOneOnRandomPairs) {
    std::mt19937_64 gen(12);
    std::uniform_int_distribution<int> dim(2, 8);
    for (int trial = 0; trial < 1000; ++trial) {
        const std::size_t d = static_cast<std::size_t>(dim(gen));
        const QuantumState s = random_state(gen, d);
        const BinaryPOVM povm = BinaryPOVM::from_effect("r", random_effect(gen, d));
        const BornProbabilities p = born_probabilities(s, povm);
        ASSERT_NEAR(p.p0 + p.p1, 1.0, 1e-9);
        ASSERT_GE(p.p0, 0.0);
        ASSERT_GE(p.p1, 0.0);
        // Independent trace evaluation.
        const double direct = (povm.effect(1).matrix() * s.rho().matrix()).trace().real();
        ASSERT_NEAR(p.p1, direct, 1e-12);
    }
}

TEST(BornProbabilities, DimensionMismatchThrows) {
    EXPECT_THROW(born_probabilities(QuantumState::basis(4, 0), BinaryPOVM::computational("z")),
                 DimensionMismatch);
}

TEST(ApplyMeasurement, FixedPointAndLuedersCollapse) {
    Rng rng(5);
    const BinaryPOVM z = BinaryPOVM::computational("z");
    for (int i = 0; i < 20; ++i) {
        const MeasurementOutcome m = apply_measurement(QuantumState::basis(2, 0), z, rng);
        EXPECT_EQ(m.outcome, 0);
        EXPECT_LT(max_abs_diff(m.state.rho(), QuantumState::basis(2, 0).rho()), 1e-15);
    }
    const QuantumState post = post_measurement_state(plus_state(), z, 0);
    EXPECT_LT(max_abs_diff(post.rho(), QuantumState::basis(2, 0).rho()), 1e-15);
}

TEST(ApplyMeasurement, ImpossibleBranchThrows) {
    EXPECT_THROW(post_measurement_state(QuantumState::basis(2, 0), BinaryPOVM::computational("z"), 1),
                 ImpossibleBranch);
}

TEST(ApplyMeasurement, LuedersUpdateMatchesExplicitFormula) {
    std::mt19937_64 gen(13);
    const QuantumState s = random_state(gen, 3);
    const BinaryPOVM povm = BinaryPOVM::from_effect("r", random_effect(gen, 3));
    for (int x = 0; x < 2; ++x) {
        const Matrix m = povm.kraus(x).matrix();
        Matrix expected = m * s.rho().matrix() * m.adjoint();
        expected /= expected.trace();
        EXPECT_LT((post_measurement_state(s, povm, x).rho().matrix() - expected).cwiseAbs().maxCoeff(),
                  1e-13);
    }
}

TEST(ApplyMeasurement, ProjectiveRepeatability) {
    std::mt19937_64 gen(14);
    Rng rng(99);
    int mismatches = 0;
    for (int trial = 0; trial < 1000; ++trial) {
        const QuantumState s = random_state(gen, 2);
        const BinaryPOVM povm = BinaryPOVM::spin("s", std::uniform_real_distribution<double>(0, 6.28)(gen));
        const MeasurementOutcome first = apply_measurement(s, povm, rng);
        const MeasurementOutcome second = apply_measurement(first.state, povm, rng);
        mismatches += first.outcome != second.outcome;
    }
    EXPECT_EQ(mismatches, 0);
}

TEST(ApplyMeasurement, SampledFrequencyMatchesBorn) {
    Rng rng(7);
    const BinaryPOVM povm = BinaryPOVM::spin("s", 1.0);
    const int n = 200000;
    int ones = 0;
    for (int i = 0; i < n; ++i) ones += apply_measurement(QuantumState::basis(2, 0), povm, rng).outcome;
    const double p = (1.0 + std::cos(1.0)) / 2.0;
    EXPECT_NEAR(static_cast<double>(ones) / n, p, 4.0 * std::sqrt(p * (1 - p) / n));
}

TEST(RunRecord, EmptyScheduleLeavesLedgerUnchanged) {
    Rng rng(1);
    const std::vector<BinaryPOVM> povms{BinaryPOVM::computational("z")};
    const RunResult r = run_record(QuantumState::basis(2, 0), povms, {}, ThermoLedger(), rng);
    EXPECT_EQ(r.record.size(), 0u);
    EXPECT_EQ(r.ledger.charged_bits(), 0u);
    EXPECT_EQ(r.ledger.heat_joules(), 0.0);
}

TEST(RunRecord, FixedOrderPatternAndLedgerHeat) {
    const std::size_t nq = 4;
    std::vector<BinaryPOVM> povms;
    for (std::size_t q = 0; q < nq; ++q) povms.push_back(BinaryPOVM::computational("z", q, nq));
    const PulseSchedule pulse{4, 3, 1.0};
    const std::vector<std::size_t> schedule = pulse.deployment_sequence();
    Rng rng(3);
    const ThermoLedger ledger(std::numbers::ln2, 300.0, 1.0);
    const RunResult r = run_record(QuantumState::basis(16, 0), povms, schedule, ledger, rng);
    ASSERT_EQ(r.record.size(), 12u);
    for (std::size_t k = 0; k < 12; ++k) {
        EXPECT_EQ(r.record.rows[k].step, k + 1);
        EXPECT_EQ(r.record.rows[k].povm_index, k % 4 + 1);
    }
    EXPECT_NO_THROW(r.record.validate(4));
    EXPECT_EQ(r.ledger.charged_bits(), 12u);
    EXPECT_EQ(total_action(pulse, ledger), 12.0 * ledger.bit_action());
}

TEST(RunRecord, TenDeploymentsChargeTenBits) {
    Rng rng(4);
    const std::vector<BinaryPOVM> povms{BinaryPOVM::spin("s", 0.7)};
    const std::vector<std::size_t> schedule(10, 0);
    const ThermoLedger ledger(1.0, 300.0, 1.0);
    const RunResult r = run_record(QuantumState::maximally_mixed(2), povms, schedule, ledger, rng);
    EXPECT_DOUBLE_EQ(r.ledger.heat_joules(), 10.0 * 1.0 * kBoltzmann * 300.0);
}

TEST(RunRecord, SameSeedGivesIdenticalRecord) {
    std::mt19937_64 gen(15);
    const QuantumState s = random_state(gen, 4);
    std::vector<BinaryPOVM> povms{BinaryPOVM::spin("a", 0.3, 0, 2), BinaryPOVM::spin("b", 1.9, 1, 2),
                                  BinaryPOVM::spin("c", 2.4, 0, 2)};
    std::vector<std::size_t> schedule;
    for (int i = 0; i < 60; ++i) schedule.push_back(static_cast<std::size_t>(i % 3));
    const Operator u = bloch_rotation(0, 1, 0, 0.4);
    const Operator step = tensor_product(u, u);
    Rng r1(77), r2(77);
    const RunResult a = run_record(s, povms, schedule, ThermoLedger(), r1, step);
    const RunResult b = run_record(s, povms, schedule, ThermoLedger(), r2, step);
    EXPECT_EQ(a.record.to_csv(), b.record.to_csv());
    EXPECT_EQ(a.record.seed, 77u);
}

TEST(RunRecord, InvalidScheduleIndexThrows) {
    Rng rng(1);
    const std::vector<BinaryPOVM> povms{BinaryPOVM::computational("z")};
    const std::vector<std::size_t> schedule{0, 1};
    EXPECT_THROW(run_record(QuantumState::basis(2, 0), povms, schedule, ThermoLedger(), rng),
                 std::invalid_argument);
}

TEST(MeasurementRecord, CsvHeaderAndValidation) {
    MeasurementRecord rec;
    rec.rows = {{1, 1, 0}, {2, 2, 1}};
    EXPECT_EQ(rec.to_csv(), "step,povm_index,outcome\n1,1,0\n2,2,1\n");
    EXPECT_NO_THROW(rec.validate(2));
    EXPECT_THROW(rec.validate(1), std::invalid_argument);
    rec.rows[1].step = 3;
    EXPECT_THROW(rec.validate(2), std::invalid_argument);
}

TEST(RegisterFastPath, AgreesWithGeneralOperators) {
    std::mt19937_64 gen(16);
    const std::size_t nq = 3;
    for (int trial = 0; trial < 30; ++trial) {
        const QuantumState s = random_state(gen, 8);
        const Operator h = sysid::testing::random_hermitian(gen, 8);
        for (std::size_t q = 0; q < nq; ++q) {
            const BinaryPOVM z = BinaryPOVM::computational("z", q, nq);
            const double p1 = born_probabilities(s, z).p1;
            EXPECT_NEAR(register_probability_one(s.rho().matrix(), q, nq), p1, 1e-13);
            for (int x = 0; x < 2; ++x) {
                const Matrix fast = register_project(s.rho().matrix(), q, nq, x, 1e-12);
                EXPECT_LT((fast - post_measurement_state(s, z, x).rho().matrix()).cwiseAbs().maxCoeff(),
                          1e-12);
            }
            EXPECT_NEAR(register_projector_commutator_norm(h.matrix(), q, nq),
                        commutator_norm(h, z.effect(1)), 1e-12);
        }
    }
}
