#include "sysid/temporal.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <vector>

#include <fmt/format.h>

#include "sysid/rng.hpp"

namespace sysid {

namespace {

std::uint64_t stream_of(LGPair pair) {
    switch (pair) {
        case LGPair::c21: return streams::lg_c21;
        case LGPair::c32: return streams::lg_c32;
        case LGPair::c31: return streams::lg_c31;
    }
    return 0;
}

Operator power(const Operator& u, std::size_t k) {
    Operator out = Operator::identity(u.dim());
    for (std::size_t i = 0; i < k; ++i) out = out * u;
    return out;
}

struct QuantumPlan {
    Operator to_first;
    Operator between;
};

QuantumPlan plan(const QuantumPointer& q, const LGTimes& times, LGPair pair) {
    const auto [tj, tk] = times.of(pair);
    return {power(q.step_unitary, tj), power(q.step_unitary, tk - tj)};
}

struct SumAcc {
    std::int64_t sum = 0;
    std::uint64_t count = 0;
    void merge(const SumAcc& o) {
        sum += o.sum;
        count += o.count;
    }
};

LGVerdict decide(const CorrelatorMatrix& c, double sigmas) {
    return c.k_value > 1.0 + sigmas * c.combined_std_error() ? LGVerdict::violated
                                                              : LGVerdict::not_violated;
}

}  // namespace

void LGTimes::validate() const {
    if (!(t1 < t2 && t2 < t3)) {
        throw std::invalid_argument(
            fmt::format("LG times must increase strictly, got {}, {}, {}", t1, t2, t3));
    }
}

std::pair<std::size_t, std::size_t> LGTimes::of(LGPair pair) const {
    switch (pair) {
        case LGPair::c21: return {t1, t2};
        case LGPair::c32: return {t2, t3};
        case LGPair::c31: return {t1, t3};
    }
    throw std::invalid_argument("invalid LG pair");
}

HystereticPointer::HystereticPointer(double p_stay_after_1, double p_stay_after_0,
                                     double base_flip, double initial_p_one)
    : p1_(p_stay_after_1), p0_(p_stay_after_0), flip_(base_flip), initial_(initial_p_one) {
    for (double p : {p1_, p0_, flip_, initial_}) {
        if (!(p >= 0.0 && p <= 1.0)) {
            throw std::invalid_argument("HystereticPointer: probabilities must lie in [0, 1]");
        }
    }
}

double HystereticPointer::drift(double q, std::size_t steps) const noexcept {
    for (std::size_t s = 0; s < steps; ++s) q = q * (1.0 - flip_) + (1.0 - q) * flip_;
    return q;
}

bool memory_condition_check(const HystereticPointer& pointer) noexcept {
    return pointer.p_stay_after_1() != pointer.p_stay_after_0();
}

LGScenario LGScenario::precession(double theta_per_step, LGTimes times, std::uint64_t trials) {
    return LGScenario{QuantumPointer{bloch_rotation(1.0, 0.0, 0.0, theta_per_step),
                                     BinaryPOVM::computational("z"),
                                     QuantumState::maximally_mixed(2)},
                      times, trials, false, 0};
}

void LGScenario::validate() const {
    times.validate();
    if (calibration_standard != 0 && calibration_standard != 1) {
        throw std::invalid_argument("calibration standard must be a bit");
    }
    if (const auto* q = std::get_if<QuantumPointer>(&model)) {
        if (!q->step_unitary.is_unitary()) throw InvalidOperator("LG dynamics is not unitary");
        if (q->step_unitary.dim() != q->pointer.dim() || q->initial.dim() != q->pointer.dim()) {
            throw DimensionMismatch("LG scenario dimensions differ");
        }
        if (calibrate_between && static_cast<std::size_t>(calibration_standard) >= q->initial.dim()) {
            throw std::invalid_argument("calibration standard outside the pointer space");
        }
    }
}

CorrelatorMatrix CorrelatorMatrix::from(const Estimate& c21, const Estimate& c32,
                                        const Estimate& c31) {
    CorrelatorMatrix m;
    m.c21 = c21.value;
    m.c32 = c32.value;
    m.c31 = c31.value;
    m.se21 = c21.std_error;
    m.se32 = c32.std_error;
    m.se31 = c31.std_error;
    m.k_value = m.c21 + m.c32 - m.c31;
    return m;
}

double CorrelatorMatrix::combined_std_error() const noexcept {
    return std::sqrt(se21 * se21 + se32 * se32 + se31 * se31);
}

const char* to_string(LGVerdict v) noexcept {
    return v == LGVerdict::violated ? "violated" : "not-violated";
}

const char* to_string(LGPair p) noexcept {
    switch (p) {
        case LGPair::c21: return "C21";
        case LGPair::c32: return "C32";
        case LGPair::c31: return "C31";
    }
    return "?";
}

std::string LGResult::to_csv() const {
    const CorrelatorMatrix& c = correlators;
    return fmt::format(
        "pair,estimate,stderr\nC21,{:.17g},{:.17g}\nC32,{:.17g},{:.17g}\nC31,{:.17g},{:.17g}\n"
        "K,{:.17g},{}\n",
        c.c21, c.se21, c.c32, c.se32, c.c31, c.se31, c.k_value, to_string(verdict));
}

std::string LGResult::interpretation() const {
    if (verdict == LGVerdict::violated) {
        return "Leggett-Garg violated: evidence that a single objective system has been "
               "identified over time";
    }
    return "Leggett-Garg satisfied: the record is consistent with distinct objective systems at "
           "the measurement times";
}

double exact_correlator(const LGScenario& scenario, LGPair pair) {
    scenario.validate();
    const auto [tj, tk] = scenario.times.of(pair);
    if (const auto* q = std::get_if<QuantumPointer>(&scenario.model)) {
        const QuantumPlan p = plan(*q, scenario.times, pair);
        const QuantumState at_first = q->initial.evolved(p.to_first);
        const BornProbabilities first = born_probabilities(at_first, q->pointer);
        double c = 0.0;
        for (int b = 0; b < 2; ++b) {
            if (first[b] < kDefaultTolerances.prob) continue;
            QuantumState after = scenario.calibrate_between
                                     ? calibrate(at_first, scenario.calibration_standard)
                                     : post_measurement_state(at_first, q->pointer, b);
            const BornProbabilities second =
                born_probabilities(after.evolved(p.between), q->pointer);
            for (int x = 0; x < 2; ++x) c += first[b] * second[x] * to_sign(b) * to_sign(x);
        }
        return c;
    }
    const auto& h = std::get<HystereticPointer>(scenario.model);
    const double q_first = h.drift(h.initial_p_one(), tj);
    double c = 0.0;
    for (int b = 0; b < 2; ++b) {
        const double pb = b == 1 ? q_first : 1.0 - q_first;
        const double reset = scenario.calibrate_between
                                 ? static_cast<double>(scenario.calibration_standard)
                                 : h.p_one_after(b);
        const double q_second = h.drift(reset, tk - tj);
        c += pb * (q_second * to_sign(b) - (1.0 - q_second) * to_sign(b));
    }
    return c;
}

LGResult lg_test_exact(const LGScenario& scenario) {
    const auto exact = [&](LGPair p) { return Estimate{exact_correlator(scenario, p), 0.0, 0, 0}; };
    LGResult r;
    r.correlators = CorrelatorMatrix::from(exact(LGPair::c21), exact(LGPair::c32),
                                           exact(LGPair::c31));
    r.verdict = decide(r.correlators, 3.0);
    return r;
}

Estimate two_time_correlator(const LGScenario& scenario, LGPair pair, std::uint64_t seed,
                             Execution exec) {
    scenario.validate();
    if (scenario.trials == 0) throw std::invalid_argument("LG scenario needs trials > 0");
    const auto [tj, tk] = scenario.times.of(pair);
    const std::uint64_t stream = stream_of(pair);

    SumAcc acc;
    if (const auto* q = std::get_if<QuantumPointer>(&scenario.model)) {
        const QuantumPlan p = plan(*q, scenario.times, pair);
        acc = reduce_trials<SumAcc>(exec, scenario.trials, [&](std::uint64_t t, SumAcc& local) {
            Rng rng(derive_seed(seed, stream, t));
            MeasurementOutcome first = apply_measurement(q->initial.evolved(p.to_first), q->pointer, rng);
            QuantumState state = scenario.calibrate_between
                                     ? calibrate(first.state, scenario.calibration_standard)
                                     : std::move(first.state);
            const MeasurementOutcome second =
                apply_measurement(state.evolved(p.between), q->pointer, rng);
            local.sum += to_sign(first.outcome) * to_sign(second.outcome);
            ++local.count;
        });
    } else {
        const auto& h = std::get<HystereticPointer>(scenario.model);
        acc = reduce_trials<SumAcc>(exec, scenario.trials, [&](std::uint64_t t, SumAcc& local) {
            Rng rng(derive_seed(seed, stream, t));
            int bit = rng.bernoulli(h.initial_p_one()) ? 1 : 0;
            for (std::size_t s = 0; s < tj; ++s) bit ^= rng.bernoulli(h.base_flip()) ? 1 : 0;
            const int first = bit;
            bit = scenario.calibrate_between ? calibrate(bit, scenario.calibration_standard)
                                             : (rng.bernoulli(h.p_one_after(first)) ? 1 : 0);
            for (std::size_t s = tj; s < tk; ++s) bit ^= rng.bernoulli(h.base_flip()) ? 1 : 0;
            local.sum += to_sign(first) * to_sign(bit);
            ++local.count;
        });
    }
    const double n = static_cast<double>(acc.count);
    const double mean = static_cast<double>(acc.sum) / n;
    // Products are +-1, so the sample variance is 1 - mean^2.
    const double se = std::sqrt(std::max(0.0, 1.0 - mean * mean) / n);
    return {mean, se, acc.sum, acc.count};
}

LGResult lg_test(const LGScenario& scenario, std::uint64_t seed, Execution exec) {
    LGResult r;
    r.correlators = CorrelatorMatrix::from(two_time_correlator(scenario, LGPair::c21, seed, exec),
                                           two_time_correlator(scenario, LGPair::c32, seed, exec),
                                           two_time_correlator(scenario, LGPair::c31, seed, exec));
    r.verdict = decide(r.correlators, 3.0);
    return r;
}

QuantumState calibrate(const QuantumState& pointer_state, int standard) {
    if (standard < 0 || static_cast<std::size_t>(standard) >= pointer_state.dim()) {
        throw std::invalid_argument("calibrate: standard outside the pointer space");
    }
    return QuantumState::basis(pointer_state.dim(), static_cast<std::size_t>(standard));
}

double PathDistribution::correlator(LGPair pair) const noexcept {
    double c = 0.0;
    for (int idx = 0; idx < 8; ++idx) {
        const int x1 = to_sign((idx >> 2) & 1);
        const int x2 = to_sign((idx >> 1) & 1);
        const int x3 = to_sign(idx & 1);
        const int prod = pair == LGPair::c21 ? x2 * x1 : pair == LGPair::c32 ? x3 * x2 : x3 * x1;
        c += probability[static_cast<std::size_t>(idx)] * prod;
    }
    return c;
}

double PathDistribution::k_value() const noexcept {
    return correlator(LGPair::c21) + correlator(LGPair::c32) - correlator(LGPair::c31);
}

PathDistribution noninvasive_paths(const HystereticPointer& pointer, const LGTimes& times) {
    times.validate();
    // Transition probability to 1 over `steps` steps from reading b.
    const auto step_to_one = [&](double q) {
        return q * (pointer.p_stay_after_1() * (1.0 - pointer.base_flip()) +
                    (1.0 - pointer.p_stay_after_1()) * pointer.base_flip()) +
               (1.0 - q) * (pointer.p_stay_after_0() * (1.0 - pointer.base_flip()) +
                            (1.0 - pointer.p_stay_after_0()) * pointer.base_flip());
    };
    const auto evolve = [&](double q, std::size_t steps) {
        for (std::size_t s = 0; s < steps; ++s) q = step_to_one(q);
        return q;
    };
    PathDistribution d;
    const double q1 = evolve(pointer.initial_p_one(), times.t1);
    for (int x1 = 0; x1 < 2; ++x1) {
        const double p1 = x1 ? q1 : 1.0 - q1;
        const double q2 = evolve(static_cast<double>(x1), times.t2 - times.t1);
        for (int x2 = 0; x2 < 2; ++x2) {
            const double p2 = x2 ? q2 : 1.0 - q2;
            const double q3 = evolve(static_cast<double>(x2), times.t3 - times.t2);
            for (int x3 = 0; x3 < 2; ++x3) {
                const double p3 = x3 ? q3 : 1.0 - q3;
                d.probability[static_cast<std::size_t>(4 * x1 + 2 * x2 + x3)] = p1 * p2 * p3;
            }
        }
    }
    return d;
}

PrecessionScan scan_precession_maximum(std::size_t grid_points, Execution exec) {
    if (grid_points < 3) throw std::invalid_argument("scan needs at least three grid points");
    const auto k_at = [](double theta) {
        return lg_test_exact(LGScenario::precession(theta)).correlators.k_value;
    };
    const auto theta_at = [&](std::size_t g) {
        return std::numbers::pi * static_cast<double>(g + 1) / static_cast<double>(grid_points + 1);
    };
    std::vector<double> k(grid_points);
    for_each_index(exec, grid_points, k.data(), [&](std::size_t g) { return k_at(theta_at(g)); });
    const std::size_t best =
        static_cast<std::size_t>(std::max_element(k.begin(), k.end()) - k.begin());

    double lo = best == 0 ? 0.0 : theta_at(best - 1);
    double hi = best + 1 == grid_points ? std::numbers::pi : theta_at(best + 1);
    const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
    double a = hi - inv_phi * (hi - lo);
    double b = lo + inv_phi * (hi - lo);
    double ka = k_at(a), kb = k_at(b);
    while (hi - lo > 1e-12) {
        if (ka > kb) {
            hi = b;
            b = a;
            kb = ka;
            a = hi - inv_phi * (hi - lo);
            ka = k_at(a);
        } else {
            lo = a;
            a = b;
            ka = kb;
            b = lo + inv_phi * (hi - lo);
            kb = k_at(b);
        }
    }
    PrecessionScan scan{0.5 * (lo + hi), 0.0};
    scan.k_max = std::max(k_at(scan.theta), k[best]);
    if (k[best] > k_at(scan.theta)) scan.theta = theta_at(best);
    return scan;
}

}  // namespace sysid
