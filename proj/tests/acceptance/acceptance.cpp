// Acceptance runner: one PASS/FAIL line per criterion. Tolerances and
// wall-clock limits are fixed here; a criterion passes only when every check
// holds and it finishes inside its limit. Exit status is the failure count.

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <fmt/core.h>

#include "support.hpp"
#include "sysid/config.hpp"
#include "sysid/measurement.hpp"
#include "sysid/scenario.hpp"
#include "sysid/scheduler.hpp"
#include "sysid/spatial.hpp"
#include "sysid/system_id.hpp"
#include "sysid/temporal.hpp"

using namespace sysid;

namespace {

constexpr double kTsirelson = 2.8284271247461903;

class Checks {
public:
    void expect(bool ok, const std::string& what) {
        if (!ok) failures_.push_back(what);
    }
    bool ok() const { return failures_.empty(); }
    std::string first_failure() const { return failures_.empty() ? "" : failures_.front(); }
    std::size_t failure_count() const { return failures_.size(); }

private:
    std::vector<std::string> failures_;
};

struct Criterion {
    int id;
    std::string name;
    double limit_seconds;
    std::function<std::string(Checks&)> body;  // returns a short detail string
};

std::string read_all(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream s;
    s << in.rdbuf();
    return s.str();
}

std::string pulse_algebra(Checks& c) {
    // Piecewise values at interior and boundary points, unit width.
    c.expect(pi_pulse(0, 1, 3, 1.0, 0.5) == 1.0, "interior value 1");
    c.expect(pi_pulse(0, 1, 3, 1.0, 0.0) == 0.5, "left edge value 1/2");
    c.expect(pi_pulse(0, 1, 3, 1.0, 1.0) == 0.5, "right edge value 1/2");
    c.expect(pi_pulse(0, 1, 3, 1.0, 2.0) == 0.0, "off-pulse value 0");
    c.expect(pi_pulse(1, 2, 3, 1.0, 4.5) == 1.0, "second cycle interior");
    c.expect(pi_pulse(1, 2, 3, 1.0, 4.0) == 0.5, "second cycle edge");

    const std::size_t n = 5, m = 4;
    const double dt = 0.25, end = static_cast<double>(n * m) * dt;
    for (int q = 0; q <= 20000; ++q) {
        const double t = end * q / 20000.0;
        int ones = 0;
        for (std::size_t i = 0; i < n; ++i) {
            const double v = pi_pulse(i, m, n, dt, t);
            c.expect(v == 0.0 || v == 0.5 || v == 1.0, fmt::format("value {} at t={}", v, t));
            ones += v == 1.0;
        }
        c.expect(ones <= 1, fmt::format("overlap at t={}", t));
    }

    // Exact piecewise integration: the pulse is constant between half-step
    // breakpoints, so midpoint sums on that grid are exact.
    double worst = 0.0;
    const int pieces = static_cast<int>(2 * n * m);
    for (std::size_t i = 0; i < n; ++i) {
        double integral = 0.0;
        for (int p = 0; p < pieces; ++p) integral += 0.5 * dt * pi_pulse(i, m, n, dt, (p + 0.5) * 0.5 * dt);
        worst = std::max(worst, std::abs(integral - m * dt) / (m * dt));
    }
    c.expect(worst <= 1e-6, fmt::format("quadrature relative error {}", worst));
    return fmt::format("quadrature rel err {:.1e}", worst);
}

std::string thermo_accounting(Checks& c) {
    const ThermoLedger l(std::numbers::ln2, 300.0, 1.0);
    for (std::size_t n : {1u, 4u, 7u}) {
        for (std::size_t m : {1u, 3u, 10u}) {
            const double expected = static_cast<double>(n * m) * 1.0 * std::numbers::ln2 * kBoltzmann * 300.0;
            c.expect(total_action(PulseSchedule{n, m, 1.0}, l) == l.bit_action() * static_cast<double>(n * m),
                     "total_action is n m bit actions");
            c.expect(std::abs(total_action(PulseSchedule{n, m, 1.0}, l) - expected) <= 1e-15 * expected,
                     "total_action matches n m dt c kB T");
        }
    }
    for (std::uint64_t n : {1u, 12u, 1000u}) {
        const ThermoLedger base(1.5, 4.0, 1.0);
        ThermoLedger charged = base;
        charged.charge(n);
        c.expect(charged.heat_joules() == static_cast<double>(n) * base.bit_cost_joules(),
                 "ledger heat is N bit costs");
    }
    std::mt19937_64 gen(2);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<Operator> ops;
    for (std::size_t i = 0; i < 3; ++i) {
        std::vector<double> d(3, 0.0);
        d[i] = 1.0;
        ops.push_back(Operator::diagonal(d));
    }
    double worst = 0.0;
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<std::vector<double>> table(12, std::vector<double>(3));
        for (auto& row : table) {
            double s = 0.0;
            for (double& w : row) s += w = u(gen);
            for (double& w : row) w /= s;
        }
        const DissipationReport r = per_step_dissipation_check(GeneralSchedule::from_table(table), ops, l);
        c.expect(r.holds, "per-step dissipation under reweighting");
        worst = std::max(worst, r.max_relative_error);
    }
    return fmt::format("reweighting max rel err {:.1e}", worst);
}

std::string measurement_core(Checks& c) {
    std::mt19937_64 gen(3);
    std::uniform_int_distribution<int> dim(2, 8);
    double worst = 0.0;
    for (int trial = 0; trial < 1000; ++trial) {
        const std::size_t d = static_cast<std::size_t>(dim(gen));
        const QuantumState s = sysid::testing::random_state(gen, d);
        const BinaryPOVM povm = BinaryPOVM::from_effect("r", sysid::testing::random_effect(gen, d));
        const BornProbabilities p = born_probabilities(s, povm);
        worst = std::max(worst, std::abs(p.p0 + p.p1 - 1.0));
    }
    c.expect(worst <= 1e-9, fmt::format("Born sum error {}", worst));
    Rng rng(33);
    int mismatches = 0;
    std::uniform_real_distribution<double> angle(0.0, 2.0 * std::numbers::pi);
    for (int trial = 0; trial < 1000; ++trial) {
        const QuantumState s = sysid::testing::random_state(gen, 2);
        const BinaryPOVM povm = BinaryPOVM::spin("s", angle(gen));
        const MeasurementOutcome first = apply_measurement(s, povm, rng);
        mismatches += apply_measurement(first.state, povm, rng).outcome != first.outcome;
    }
    c.expect(mismatches == 0, fmt::format("{} repeatability mismatches", mismatches));
    return fmt::format("Born sum err {:.1e}, mismatches {}", worst, mismatches);
}

std::string sieve_discovery(Checks& c) {
    const DiscoveryScenario reg = register_scenario(true);
    Rng rng(derive_seed(1, 2, 0));
    const DiscoveryResult r = discover_system(reg.povms, reg.world, 32, 1e-6, rng);
    std::string detail = "register: not-found";
    if (const auto* s = std::get_if<ObservableSystem>(&r)) {
        c.expect(s->k() == 3 && s->l() == 2, fmt::format("k={} l={}", s->k(), s->l()));
        const SieveReport sieve = check_sieve(*s, reg.world, uniform_measurement_hamiltonian(*s), 1e-6);
        c.expect(sieve.passed, "sieve at delta 1e-6");
        detail = fmt::format("register: k={} l={} sieve max {:.1e}", s->k(), s->l(), sieve.max_norm);
    } else {
        c.expect(false, "register scenario not found");
    }
    const DiscoveryScenario nc = noncommuting_scenario();
    Rng rng2(derive_seed(1, 2, 1));
    c.expect(std::holds_alternative<NotFound>(discover_system(nc.povms, nc.world, 32, 1e-6, rng2)),
             "non-commuting scenario should be not-found");
    return detail + "; non-commuting: not-found";
}

std::string refinement_mechanism(Checks& c) {
    const ThermoLedger ledger;
    const std::vector<std::size_t> probes{1, 2, 3, 4, 5, 6};
    const WorldModel kicked = WorldModel::zero_register(6, Operator::zero(64), 2.0);
    const RefinementScanResult r = refinement_scan(kicked, probes, ledger, 100, 1);
    double worst_drop = 0.0;
    for (std::size_t i = 1; i < r.rows.size(); ++i) {
        worst_drop = std::max(worst_drop, r.rows[i - 1].ref_error_rate - r.rows[i].ref_error_rate);
    }
    c.expect(worst_drop <= 0.01, fmt::format("adjacent drop {}", worst_drop));
    c.expect(r.rows.back().ref_error_rate > r.rows.front().ref_error_rate, "errors grow across the scan");
    for (const RefinementRow& row : r.rows) {
        c.expect(row.heat_kbt == static_cast<double>(row.n_probes) * ledger.c_obs(), "heat equals d c");
        c.expect(refinement_cost(row.n_probes, ledger).joules ==
                     static_cast<double>(row.n_probes) * ledger.bit_cost_joules(),
                 "refinement cost equals d c kB T");
    }
    const WorldModel quiet = WorldModel::zero_register(6, Operator::zero(64), 0.0);
    for (const RefinementRow& row : refinement_scan(quiet, probes, ledger, 100, 1).rows) {
        c.expect(row.errors == 0, "kappa 0 must give zero errors");
    }
    return fmt::format("error rate {:.3f} -> {:.3f}, worst adjacent drop {:.3f}", r.rows.front().ref_error_rate,
                       r.rows.back().ref_error_rate, worst_drop);
}

std::string leggett_garg(Checks& c) {
    const LGScenario frozen{QuantumPointer{Operator::identity(2), BinaryPOVM::computational("z"),
                                           QuantumState::basis(2, 0)},
                            LGTimes{}, 1000, false, 0};
    c.expect(lg_test_exact(frozen).correlators.k_value == 1.0, "frozen dynamics K = 1");
    c.expect(lg_test_exact(LGScenario::precession(0.0)).correlators.k_value == 1.0, "theta 0 K = 1");

    std::mt19937_64 gen(6);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    double worst_memoryless = -1e300;
    for (int trial = 0; trial < 2000; ++trial) {
        const double p = u(gen);
        const HystereticPointer h(p, p, u(gen), u(gen));
        const LGTimes t{0, 1 + static_cast<std::size_t>(trial % 3), 5};
        worst_memoryless = std::max(worst_memoryless, noninvasive_paths(h, t).k_value());
        LGScenario s = frozen;
        s.model = h;
        s.times = t;
        worst_memoryless = std::max(worst_memoryless, lg_test_exact(s).correlators.k_value);
    }
    c.expect(worst_memoryless <= 1.0 + 1e-12, fmt::format("memoryless K {}", worst_memoryless));

    const PrecessionScan scan = scan_precession_maximum(64);
    c.expect(std::abs(scan.k_max - 1.5) <= 1e-9, fmt::format("scan max K {}", scan.k_max));

    LGScenario calibrated = LGScenario::precession(scan.theta, LGTimes{}, 100000);
    calibrated.calibrate_between = true;
    const LGResult r = lg_test(calibrated, 7);
    const double bound = 1.0 + 3.0 * r.correlators.combined_std_error();
    c.expect(r.correlators.k_value <= bound, fmt::format("calibrated K {} > {}", r.correlators.k_value, bound));
    return fmt::format("scan K_max {:.12f} at theta {:.9f}; calibrated K {:.4f} (bound {:.4f}); memoryless max {:.4f}",
                       scan.k_max, scan.theta, r.correlators.k_value, bound, worst_memoryless);
}

std::string chsh_fine(Checks& c) {
    for (const InstructionSet& s : InstructionSet::all()) {
        c.expect(chsh_value(s.correlators()) == 2.0, "instruction set CHSH must be 2");
    }
    const BipartiteScenario singlet{QuantumState::singlet(), Angles::standard(), 100000};
    const double exact = chsh_value(exact_correlations(singlet));
    c.expect(std::abs(exact - kTsirelson) <= 1e-9, fmt::format("exact S {}", exact));
    const LOCCTranscript t = run_epr_sampled(singlet, 1);
    const double sampled = chsh_value(t.table);
    c.expect(std::abs(sampled - kTsirelson) <= 3.0 * t.table.chsh_std_error(),
             fmt::format("sampled S {} +- {}", sampled, t.table.chsh_std_error()));

    std::mt19937_64 gen(7);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    int disagreements = 0;
    for (int trial = 0; trial < 10000; ++trial) {
        const CorrelationTable table = CorrelationTable::exact(u(gen), u(gen), u(gen), u(gen));
        disagreements += hv_oracle(table) != (chsh_value(table) <= 2.0);
    }
    c.expect(disagreements == 0, fmt::format("{} oracle disagreements", disagreements));

    double grid_max = 0.0;
    for (int trial = 0; trial < 4; ++trial) {
        grid_max = std::max(grid_max, chsh_grid_scan(sysid::testing::random_state(gen, 4, 1), 24).max_chsh);
    }
    grid_max = std::max(grid_max, chsh_grid_scan(QuantumState::singlet(), 24).max_chsh);
    c.expect(grid_max <= kTsirelson + 1e-9, fmt::format("grid max {}", grid_max));
    return fmt::format("exact S {:.12f}, sampled {:.4f} +- {:.4f}, oracle disagreements {}, grid max {:.12f}", exact,
                       sampled, t.table.chsh_std_error(), disagreements, grid_max);
}

std::string verdicts(Checks& c) {
    const VerdictReport classical = verdict_joint_identification(CorrelationTable::exact(1, 1, 1, 1));
    c.expect(classical.verdict == JointVerdict::indistinguishable_from_charlie, "all-ones verdict");
    c.expect(classical.model.has_value(), "all-ones model present");
    if (classical.model) {
        c.expect(classical.model->weights.size() == 16, "model over 16 instruction sets");
        for (double e : classical.model->correlators()) c.expect(std::abs(e - 1.0) <= 1e-9, "model reproduces E=1");
    }
    const VerdictReport quantum = verdict_joint_identification(
        exact_correlations(BipartiteScenario{QuantumState::singlet(), Angles::standard()}));
    c.expect(quantum.verdict == JointVerdict::joint_system_witnessed, "singlet verdict");

    const LOCCTranscript t =
        run_epr_sampled(BipartiteScenario{QuantumState::singlet(), Angles::standard(), 20000}, 3);
    c.expect(t.recompute().to_csv() == t.table.to_csv(), "transcript recompute is bit-exact");
    c.expect(t.reference_exceptions() == 0, "reference readings constant");
    return fmt::format("all-ones: {}, singlet: {}", to_string(classical.verdict), to_string(quantum.verdict));
}

struct ReproCase {
    const char* name;
    const char* config;
    double limit_seconds;
};

std::string reproducibility(Checks& c) {
    const ReproCase cases[] = {
        {"schedule", "experiment = schedule\n", 1.0},
        {"identify", "experiment = identify\n", 5.0},
        {"refine", "experiment = refine\n", 60.0},
        {"lg", "experiment = lg\n", 60.0},
        {"lg-hysteretic", "experiment = lg\n[lg]\npointer_model = hysteretic\n", 60.0},
        {"chsh", "experiment = chsh\n[chsh]\nmode = sampled\nscan_points = 16\n", 120.0},
    };
    const auto root = std::filesystem::temp_directory_path() / "sysid_acceptance";
    std::string detail;
    for (const ReproCase& rc : cases) {
        const ScenarioConfig config = parse_config(std::string("seed = 2024\n") + rc.config);
        std::vector<std::filesystem::path> dirs;
        double slowest = 0.0;
        for (int run = 0; run < 2; ++run) {
            const auto dir = root / fmt::format("{}_{}", rc.name, run);
            std::filesystem::remove_all(dir);
            const auto start = std::chrono::steady_clock::now();
            write_outputs(run_scenario(config), dir.string());
            slowest = std::max(slowest, std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count());
            dirs.push_back(dir);
        }
        std::size_t files = 0;
        for (const auto& entry : std::filesystem::directory_iterator(dirs[0])) {
            ++files;
            const auto other = dirs[1] / entry.path().filename();
            c.expect(std::filesystem::exists(other) && read_all(entry.path()) == read_all(other),
                     fmt::format("{}: {} differs", rc.name, entry.path().filename().string()));
        }
        std::size_t files_b = 0;
        for ([[maybe_unused]] const auto& entry : std::filesystem::directory_iterator(dirs[1])) ++files_b;
        c.expect(files == files_b && files > 1, fmt::format("{}: file sets differ", rc.name));
        c.expect(slowest < rc.limit_seconds, fmt::format("{}: {:.2f} s over {} s", rc.name, slowest, rc.limit_seconds));
        detail += fmt::format("{}{} {} files {:.2f}s", detail.empty() ? "" : ", ", rc.name, files, slowest);
    }
    std::filesystem::remove_all(root);
    return detail;
}

}  // namespace

int main() {
    const std::vector<Criterion> criteria{
        {1, "pulse algebra", 1.0, pulse_algebra},
        {2, "thermodynamic accounting", 1.0, thermo_accounting},
        {3, "measurement core", 5.0, measurement_core},
        {4, "sieve and discovery", 5.0, sieve_discovery},
        {5, "refinement backaction", 60.0, refinement_mechanism},
        {6, "Leggett-Garg", 60.0, leggett_garg},
        {7, "CHSH and Fine", 120.0, chsh_fine},
        {8, "joint-identification verdicts", 10.0, verdicts},
        // The per-scenario limits are enforced inside; the outer bound is their sum.
        {9, "reproducibility", 2.0 * (1 + 5 + 60 + 60 + 60 + 120), reproducibility},
    };
    int failed = 0;
    for (const Criterion& cr : criteria) {
        Checks checks;
        std::string detail;
        const auto start = std::chrono::steady_clock::now();
        try {
            detail = cr.body(checks);
        } catch (const std::exception& e) {
            checks.expect(false, fmt::format("exception: {}", e.what()));
        }
        const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        checks.expect(seconds < cr.limit_seconds, fmt::format("runtime {:.2f} s over limit", seconds));
        const bool pass = checks.ok();
        failed += !pass;
        fmt::print("{} criterion {} ({}): {} [{:.2f} s, limit {:.0f} s]\n", pass ? "PASS" : "FAIL", cr.id, cr.name,
                   pass ? detail : fmt::format("{} ({} failed checks)", checks.first_failure(), checks.failure_count()),
                   seconds, cr.limit_seconds);
    }
    return failed;
}
