#include "sysid/scenario.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include <fmt/format.h>

#include "sysid/register.hpp"
#include "sysid/rng.hpp"
#include "sysid/scheduler.hpp"
#include "sysid/temporal.hpp"

namespace sysid {

namespace {

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error(fmt::format("cannot open '{}'", path));
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string kv(const std::string& key, const std::string& value) { return key + "=" + value + "\n"; }
std::string kv(const std::string& key, double value) { return kv(key, format_real(value)); }
std::string kv_int(const std::string& key, std::uint64_t value) { return kv(key, std::to_string(value)); }
std::string kv_bool(const std::string& key, bool value) { return kv(key, value ? "true" : "false"); }

ThermoLedger ledger_of(const ScheduleConfig& s) {
    return ThermoLedger(s.c_obs, s.temperature_K, s.dt_obs);
}

ScenarioOutput run_schedule(const ScenarioConfig& c) {
    const ScheduleConfig& s = c.schedule;
    ThermoLedger ledger = ledger_of(s);
    const PulseSchedule pulse{s.n, s.m, s.dt_obs};
    pulse.validate();

    std::optional<GeneralSchedule> general;
    std::vector<std::size_t> deployed;
    switch (s.kind) {
        case ScheduleConfig::Kind::pulse:
            general = GeneralSchedule::from_pulse(pulse);
            deployed = pulse.deployment_sequence();
            break;
        case ScheduleConfig::Kind::uniform:
            general = GeneralSchedule::uniform(s.n, pulse.total_steps(), s.dt_obs);
            break;
        case ScheduleConfig::Kind::weights_file:
            general = GeneralSchedule::from_csv(read_file(s.weights_file), s.dt_obs);
            if (general->n() != s.n) {
                throw std::invalid_argument(fmt::format(
                    "weights file has {} operator columns, config n = {}", general->n(), s.n));
            }
            break;
    }
    if (deployed.empty()) {
        Rng rng(derive_seed(c.seed, streams::schedule, 0));
        deployed = general->sample_deployments(rng);
    }
    const std::size_t steps = general->total_steps();
    ledger.charge(steps);

    // Each deployed operator acts as the projector onto its own slot of the
    // n-dimensional apparent space.
    std::vector<Operator> operators;
    for (std::size_t i = 0; i < s.n; ++i) {
        std::vector<double> d(s.n, 0.0);
        d[i] = 1.0;
        operators.push_back(Operator::diagonal(d));
    }
    const DissipationReport report = per_step_dissipation_check(*general, operators, ledger);

    ScenarioOutput out;
    std::string csv = "step,t_start,t_end,deployed";
    for (std::size_t i = 1; i <= s.n; ++i) csv += fmt::format(",alpha_{}", i);
    csv += "\n";
    for (std::size_t k = 0; k < steps; ++k) {
        csv += fmt::format("{},{},{},{}", k + 1, format_real(static_cast<double>(k) * s.dt_obs),
                           format_real(static_cast<double>(k + 1) * s.dt_obs), deployed[k] + 1);
        for (std::size_t i = 0; i < s.n; ++i) csv += "," + format_real(general->weight(k, i));
        csv += "\n";
    }
    out.files["schedule.csv"] = csv;

    if (s.kind == ScheduleConfig::Kind::pulse) {
        std::string p = "t";
        for (std::size_t i = 1; i <= s.n; ++i) p += fmt::format(",pi_{}", i);
        p += "\n";
        const std::size_t samples = 4 * steps;
        for (std::size_t q = 0; q <= samples; ++q) {
            const double t = static_cast<double>(q) * s.dt_obs / 4.0;
            p += format_real(t);
            for (std::size_t i = 0; i < s.n; ++i) p += "," + format_real(pi_pulse(i, s.m, s.n, s.dt_obs, t));
            p += "\n";
        }
        out.files["pulses.csv"] = p;
    }

    std::string ledger_csv = "quantity,value\n";
    std::istringstream lines(ledger.summary());
    for (std::string line; std::getline(lines, line);) {
        const auto eq = line.find('=');
        if (eq != std::string::npos) ledger_csv += line.substr(0, eq) + "," + line.substr(eq + 1) + "\n";
    }
    out.files["ledger.csv"] = ledger_csv;

    const double action = static_cast<double>(s.n * s.m) * ledger.bit_action();
    std::string summary = kv("experiment", "schedule");
    summary += kv_int("n", s.n) + kv_int("m", s.m) + kv_int("total_steps", steps);
    summary += kv("total_action_Js", action);
    if (s.kind == ScheduleConfig::Kind::pulse) summary += kv("pulse_total_action_Js", total_action(pulse, ledger));
    summary += ledger.summary();
    summary += kv_bool("per_step_dissipation_holds", report.holds);
    summary += kv_int("normalization_violations", report.normalization_violations.size());
    summary += kv_int("heat_mismatches", report.heat_mismatches.size());
    out.files["summary.txt"] = summary;
    return out;
}

ScenarioOutput run_identify(const ScenarioConfig& c) {
    const IdentifyConfig& id = c.identify;
    const DiscoveryScenario sc =
        id.scenario == IdentifyConfig::Scenario::noncommuting
            ? noncommuting_scenario()
            : register_scenario(id.scenario == IdentifyConfig::Scenario::register6, id.theta);

    Rng discovery_rng(derive_seed(c.seed, streams::discovery, 0));
    const DiscoveryResult result =
        discover_system(sc.povms, sc.world, id.trials, id.delta, discovery_rng);

    std::vector<std::size_t> schedule;
    for (std::size_t cycle = 0; cycle < id.record_cycles; ++cycle) {
        for (std::size_t i = 0; i < sc.povms.size(); ++i) schedule.push_back(i);
    }
    Rng record_rng(derive_seed(c.seed, streams::record, 0));
    const std::optional<Operator> step =
        sc.world.has_static_dynamics() ? std::nullopt : std::optional<Operator>(sc.world.step_unitary());
    const RunResult run = run_record(sc.world.initial_state(), sc.povms, schedule,
                                     ledger_of(c.schedule), record_rng, step);
    const ApparentSpace space = build_apparent_space(run.record, sc.povms);

    ScenarioOutput out;
    out.files["record.csv"] = run.record.to_csv();
    std::string summary = kv("experiment", "identify");
    summary += kv_int("n_povms", sc.povms.size());
    summary += kv_int("world_qubits", sc.world.degrees_of_freedom());
    summary += kv_int("record_length", run.record.size());
    summary += kv_int("apparent_space_dim", space.dim);
    summary += kv_bool("apparent_space_orthogonal", space.orthogonal);
    summary += kv("record_heat_kBT", run.ledger.heat_kbt());

    if (const auto* sys = std::get_if<ObservableSystem>(&result)) {
        const SieveReport sieve =
            check_sieve(*sys, sc.world, uniform_measurement_hamiltonian(*sys), id.delta);
        out.files["sieve.csv"] = sieve.to_csv();
        const ObservedPropagator prop = observed_propagator(run.record, *sys);
        out.files["propagator.csv"] = prop.to_csv();
        std::string members;
        for (const ReferenceMember& r : sys->reference) members += (members.empty() ? "" : ";") + r.povm.label();
        std::string pointers;
        for (const PointerMember& p : sys->pointer) pointers += (pointers.empty() ? "" : ";") + p.povm.label();
        summary += kv("discovery", "found");
        summary += kv_int("k", sys->k()) + kv_int("l", sys->l());
        summary += kv("reference", members) + kv("pointer", pointers);
        summary += kv("reference_state", sys->reference_state());
        summary += kv_bool("sieve_passed", sieve.passed);
        summary += kv("sieve_max_norm", sieve.max_norm);
        summary += kv_bool("propagator_deterministic", prop.deterministic);
    } else {
        const NotFound& nf = std::get<NotFound>(result);
        const char* bound = nf.bound == FailedBound::reference ? "reference"
                            : nf.bound == FailedBound::pointer ? "pointer"
                                                               : "sieve";
        summary += kv("discovery", "not-found");
        summary += kv("failed_bound", bound);
        summary += kv_int("k", nf.k) + kv_int("l", nf.l);
        summary += kv("reason", nf.message);
    }
    out.files["summary.txt"] = summary;
    return out;
}

ScenarioOutput run_refine(const ScenarioConfig& c, Execution exec) {
    const RefineConfig& r = c.refine;
    const std::size_t dim = std::size_t{1} << r.d_w;
    const WorldModel world = WorldModel::zero_register(r.d_w, Operator::zero(dim), r.kappa);
    const ThermoLedger ledger = ledger_of(c.schedule);
    const RefinementScanResult scan =
        refinement_scan(world, r.probe_counts, ledger, r.trials, c.seed, exec);

    std::size_t violations = 0;
    bool heat_exact = true;
    double max_norm = 0.0;
    for (std::size_t i = 0; i < scan.rows.size(); ++i) {
        const RefinementRow& row = scan.rows[i];
        if (i > 0 && row.ref_error_rate < scan.rows[i - 1].ref_error_rate) ++violations;
        heat_exact = heat_exact && row.heat_kbt == refinement_cost(row.n_probes, ledger).kbt;
        max_norm = std::max(max_norm, row.max_comm_norm);
    }
    ScenarioOutput out;
    out.files["refinement.csv"] = scan.to_csv();
    std::string summary = kv("experiment", "refine");
    summary += kv_int("d_w", r.d_w) + kv("kappa", r.kappa) + kv_int("trials_per_row", r.trials);
    summary += kv_int("rows", scan.rows.size());
    summary += kv_int("monotonicity_violations", violations);
    summary += kv_bool("heat_matches_d_c", heat_exact);
    summary += kv("max_comm_norm", max_norm);
    summary += kv_bool("sieve_within_delta", max_norm <= r.delta);
    if (!scan.rows.empty()) summary += kv("final_ref_error_rate", scan.rows.back().ref_error_rate);
    out.files["summary.txt"] = summary;
    return out;
}

ScenarioOutput run_lg(const ScenarioConfig& c, Execution exec) {
    const LGConfig& g = c.lg;
    const LGTimes times{g.t1, g.t2, g.t3};
    LGScenario scenario = LGScenario::precession(g.theta_per_step, times, g.trials);
    std::optional<HystereticPointer> hysteretic;
    if (g.pointer_model == LGConfig::Model::hysteretic) {
        hysteretic.emplace(g.p_stay_after_1, g.p_stay_after_0, g.base_flip);
        scenario.model = *hysteretic;
    }
    scenario.calibrate_between = g.calibrate_between;
    scenario.calibration_standard = g.calibration_standard;

    const LGResult result =
        g.mode == LGConfig::Mode::exact ? lg_test_exact(scenario) : lg_test(scenario, c.seed, exec);

    ScenarioOutput out;
    out.files["lg.csv"] = result.to_csv();
    std::string summary = kv("experiment", "lg");
    summary += kv("pointer_model", g.pointer_model == LGConfig::Model::qubit ? "qubit" : "hysteretic");
    summary += kv("mode", g.mode == LGConfig::Mode::exact ? "exact" : "sampled");
    summary += kv_bool("calibrate_between", g.calibrate_between);
    summary += kv("K", result.correlators.k_value);
    summary += kv("K_stderr", result.correlators.combined_std_error());
    summary += kv("verdict", to_string(result.verdict));
    summary += kv("interpretation", result.interpretation());

    if (hysteretic) {
        const PathDistribution paths = noninvasive_paths(*hysteretic, times);
        std::string csv = "x1,x2,x3,probability\n";
        for (std::size_t i = 0; i < 8; ++i) {
            csv += fmt::format("{},{},{},{}\n", (i >> 2) & 1, (i >> 1) & 1, i & 1,
                               format_real(paths.probability[i]));
        }
        out.files["paths.csv"] = csv;
        summary += kv_bool("memory_condition", memory_condition_check(*hysteretic));
        summary += kv("K_noninvasive_paths", paths.k_value());
    } else if (g.scan_points > 0) {
        std::string csv = "theta,K\n";
        for (std::size_t i = 0; i <= g.scan_points; ++i) {
            const double theta = std::numbers::pi * static_cast<double>(i) / static_cast<double>(g.scan_points);
            csv += format_real(theta) + "," +
                   format_real(lg_test_exact(LGScenario::precession(theta, times)).correlators.k_value) + "\n";
        }
        out.files["lg_scan.csv"] = csv;
    }
    out.files["summary.txt"] = summary;
    return out;
}

void add_transcript(ScenarioOutput& out, std::string& summary, const LOCCTranscript& tr) {
    out.files["alice_log.csv"] = LOCCTranscript::log_csv(tr.alice_log);
    out.files["bob_log.csv"] = LOCCTranscript::log_csv(tr.bob_log);
    std::string messages = "order,sender,receiver,entries\n";
    for (std::size_t i = 0; i < tr.classical_messages.size(); ++i) {
        const ClassicalMessage& m = tr.classical_messages[i];
        messages += fmt::format("{},{},{},{}\n", i + 1, m.sender, m.receiver, m.payload.size());
    }
    out.files["messages.csv"] = messages;
    const CorrelationTable again = tr.recompute();
    bool exact = true;
    for (std::size_t i = 0; i < 4; ++i) {
        exact = exact && again.entries[i].value == tr.table.entries[i].value &&
                again.entries[i].sum == tr.table.entries[i].sum &&
                again.entries[i].count == tr.table.entries[i].count;
    }
    summary += kv_bool("transcript_recompute_exact", exact);
    summary += kv_int("reference_exceptions", tr.reference_exceptions());
}

ScenarioOutput run_chsh(const ScenarioConfig& c, Execution exec) {
    const ChshConfig& h = c.chsh;
    ScenarioOutput out;
    std::string summary = kv("experiment", "chsh");

    if (h.adversary != "none") {
        const CorrelationTable target = parse_correlation_table(read_file(h.adversary));
        summary += kv("adversary_target_S", chsh_value(target));
        const std::optional<HVModel> model = charlie_play(target);
        if (!model) {
            summary += kv("charlie", "impossible");
            summary += kv("verdict", to_string(verdict_joint_identification(target, h.sigma).verdict));
            out.files["summary.txt"] = summary;
            return out;
        }
        std::string csv = "index,a,a_prime,b,b_prime,weight\n";
        for (std::size_t s = 0; s < 16; ++s) {
            const InstructionSet set = InstructionSet::from_index(s);
            csv += fmt::format("{},{},{},{},{},{}\n", s, set.alice[0], set.alice[1], set.bob[0],
                               set.bob[1], format_real(model->weights[s]));
        }
        out.files["hv_model.csv"] = csv;
        summary += kv("charlie", "model");
        const LOCCTranscript tr = run_charlie(*model, h.trials, c.seed, exec);
        out.files["chsh.csv"] = tr.table.to_csv();
        add_transcript(out, summary, tr);
        const VerdictReport v = verdict_joint_identification(tr.table, h.sigma);
        summary += v.summary();
        out.files["summary.txt"] = summary;
        return out;
    }

    QuantumState state = QuantumState::singlet();
    if (h.state == ChshConfig::State::product) state = QuantumState::basis(4, 0);
    if (h.state == ChshConfig::State::file) state = parse_two_qubit_state(read_file(h.state_file));
    const BipartiteScenario scenario{state, {h.angles[0], h.angles[1], h.angles[2], h.angles[3]},
                                     h.trials};
    summary += kv("state", h.state == ChshConfig::State::singlet   ? "singlet"
                           : h.state == ChshConfig::State::product ? "product"
                                                                   : "file");
    summary += kv("mode", h.mode == ChshConfig::Mode::exact ? "exact" : "sampled");

    CorrelationTable table;
    if (h.mode == ChshConfig::Mode::exact) {
        table = exact_correlations(scenario);
    } else {
        const LOCCTranscript tr = run_epr_sampled(scenario, c.seed, exec);
        table = tr.table;
        add_transcript(out, summary, tr);
        summary += kv("exact_S", chsh_value(exact_correlations(scenario)));
    }
    out.files["chsh.csv"] = table.to_csv();
    summary += verdict_joint_identification(table, h.sigma).summary();
    if (h.scan_points > 0) {
        const ChshScan scan = chsh_grid_scan(state, h.scan_points, exec);
        summary += kv("scan_max_S", scan.max_chsh);
        summary += kv("scan_argmax", fmt::format("{},{},{},{}", format_real(scan.argmax.a),
                                                 format_real(scan.argmax.a_prime),
                                                 format_real(scan.argmax.b),
                                                 format_real(scan.argmax.b_prime)));
    }
    out.files["summary.txt"] = summary;
    return out;
}

std::vector<double> parse_numbers(const std::string& line) {
    std::vector<double> out;
    std::istringstream in(line);
    for (std::string cell; std::getline(in, cell, ',');) {
        std::size_t used = 0;
        const double v = std::stod(cell, &used);
        out.push_back(v);
    }
    return out;
}

bool skippable(const std::string& line) {
    const auto first = line.find_first_not_of(" \t\r");
    return first == std::string::npos || line[first] == '#';
}

}  // namespace

std::string format_real(double x) { return fmt::format("{:.17g}", x); }

ScenarioOutput run_scenario(const ScenarioConfig& config, Execution exec) {
    switch (config.experiment) {
        case Experiment::schedule: return run_schedule(config);
        case Experiment::identify: return run_identify(config);
        case Experiment::refine: return run_refine(config, exec);
        case Experiment::lg: return run_lg(config, exec);
        case Experiment::chsh: return run_chsh(config, exec);
    }
    throw std::invalid_argument("unknown experiment");
}

void write_outputs(const ScenarioOutput& output, const std::string& dir) {
    namespace fs = std::filesystem;
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw std::runtime_error(fmt::format("cannot create '{}': {}", dir, ec.message()));
    for (const auto& [name, content] : output.files) {
        const fs::path path = fs::path(dir) / name;
        std::ofstream f(path, std::ios::binary | std::ios::trunc);
        f << content;
        f.close();
        if (!f) throw std::runtime_error(fmt::format("cannot write '{}'", path.string()));
    }
}

DiscoveryScenario register_scenario(bool with_environment_probe, double theta) {
    constexpr std::size_t nq = 4;
    std::vector<BinaryPOVM> povms{
        BinaryPOVM::computational("Z1", 0, nq),
        BinaryPOVM::computational("Z2", 1, nq),
        BinaryPOVM::computational("Z3", 2, nq),
        BinaryPOVM::spin("X4", std::numbers::pi / 2.0, 3, nq),
        BinaryPOVM::computational("Z4", 3, nq),
    };
    if (with_environment_probe) {
        const double h = 0.5;
        const Operator pair = Operator::from_rows({{1, 0, 0, 0},
                                                   {0, h, h, 0},
                                                   {0, h, h, 0},
                                                   {0, 0, 0, 0}});
        povms.push_back(BinaryPOVM::from_effect("E12", tensor_product(pair, Operator::identity(4))));
    }
    const Operator hw = embed_qubit(Complex(theta / 2.0) * pauli_y(), 3, nq);
    return {std::move(povms), WorldModel::zero_register(nq, hw)};
}

DiscoveryScenario noncommuting_scenario() {
    std::vector<BinaryPOVM> povms;
    for (int i = 0; i < 4; ++i) {
        povms.push_back(BinaryPOVM::spin(fmt::format("S{}", i + 1), std::numbers::pi / 4.0 * i, 0, 2));
    }
    return {std::move(povms), WorldModel::zero_register(2, Operator::zero(4))};
}

QuantumState parse_two_qubit_state(const std::string& text) {
    Matrix rho(4, 4);
    std::istringstream in(text);
    Eigen::Index row = 0;
    for (std::string line; std::getline(in, line);) {
        if (skippable(line)) continue;
        if (row == 4) throw std::invalid_argument("state file: more than four rows");
        std::vector<double> v;
        try {
            v = parse_numbers(line);
        } catch (const std::exception&) {
            throw std::invalid_argument(fmt::format("state file row {}: not numeric", row + 1));
        }
        if (v.size() != 8) {
            throw std::invalid_argument(
                fmt::format("state file row {}: expected 8 numbers, got {}", row + 1, v.size()));
        }
        for (Eigen::Index col = 0; col < 4; ++col) {
            rho(row, col) = Complex(v[static_cast<std::size_t>(2 * col)], v[static_cast<std::size_t>(2 * col + 1)]);
        }
        ++row;
    }
    if (row != 4) throw std::invalid_argument("state file: expected four rows");
    return QuantumState(Operator(rho));
}

CorrelationTable parse_correlation_table(const std::string& text) {
    std::array<double, 4> e{};
    std::array<bool, 4> seen{};
    std::istringstream in(text);
    for (std::string line; std::getline(in, line);) {
        if (skippable(line) || line.rfind("x,", 0) == 0) continue;
        std::vector<double> v;
        try {
            v = parse_numbers(line);
        } catch (const std::exception&) {
            throw MalformedTable(fmt::format("correlation table: cannot parse '{}'", line));
        }
        if (v.size() < 3 || (v[0] != 0.0 && v[0] != 1.0) || (v[1] != 0.0 && v[1] != 1.0)) {
            throw MalformedTable(fmt::format("correlation table: bad row '{}'", line));
        }
        const std::size_t idx = static_cast<std::size_t>(2 * v[0] + v[1]);
        if (seen[idx]) throw MalformedTable("correlation table: duplicate setting pair");
        seen[idx] = true;
        e[idx] = v[2];
    }
    for (bool s : seen) {
        if (!s) throw MalformedTable("correlation table: missing setting pair");
    }
    return CorrelationTable::exact(e);
}

}  // namespace sysid
