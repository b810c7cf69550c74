#include "sysid/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <sstream>

#include <fmt/format.h>

namespace sysid {

namespace {

std::string trim(const std::string& s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> parts;
    std::string item;
    std::istringstream in(s);
    while (std::getline(in, item, sep)) parts.push_back(trim(item));
    if (!s.empty() && s.back() == sep) parts.push_back({});
    return parts;
}

// Setters return an error message describing the expected value, or
// nothing on success.
using Setter = std::function<std::optional<std::string>(const std::string&)>;

std::optional<std::uint64_t> to_u64(const std::string& v) {
    if (v.empty() || v.front() == '-' || v.front() == '+') return std::nullopt;
    std::uint64_t out = 0;
    const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc{} || ptr != v.data() + v.size()) return std::nullopt;
    return out;
}

std::optional<double> to_double(const std::string& v) {
    if (v.empty()) return std::nullopt;
    std::size_t used = 0;
    double out = 0.0;
    try {
        out = std::stod(v, &used);
    } catch (const std::exception&) {
        return std::nullopt;
    }
    if (used != v.size() || !std::isfinite(out)) return std::nullopt;
    return out;
}

template <class T>
Setter integer(T& target, std::uint64_t min_value, std::uint64_t max_value = UINT64_MAX) {
    return [&target, min_value, max_value](const std::string& v) -> std::optional<std::string> {
        const auto x = to_u64(v);
        if (!x || *x < min_value || *x > max_value) {
            if (max_value == UINT64_MAX) {
                return fmt::format("must be an integer >= {}, got '{}'", min_value, v);
            }
            return fmt::format("must be an integer in [{}, {}], got '{}'", min_value, max_value, v);
        }
        target = static_cast<T>(*x);
        return std::nullopt;
    };
}

Setter real(double& target, std::function<bool(double)> ok, std::string constraint) {
    return [&target, ok = std::move(ok), constraint = std::move(constraint)](
               const std::string& v) -> std::optional<std::string> {
        const auto x = to_double(v);
        if (!x || !ok(*x)) return fmt::format("must be a real number {}, got '{}'", constraint, v);
        target = *x;
        return std::nullopt;
    };
}

Setter any_real(double& target) {
    return real(target, [](double) { return true; }, "");
}

Setter boolean(bool& target) {
    return [&target](const std::string& v) -> std::optional<std::string> {
        if (v == "true") {
            target = true;
        } else if (v == "false") {
            target = false;
        } else {
            return fmt::format("must be true or false, got '{}'", v);
        }
        return std::nullopt;
    };
}

template <class E>
Setter choice(E& target, std::vector<std::pair<std::string, E>> options) {
    return [&target, options = std::move(options)](const std::string& v) -> std::optional<std::string> {
        for (const auto& [name, value] : options) {
            if (v == name) {
                target = value;
                return std::nullopt;
            }
        }
        std::string names;
        for (const auto& [name, value] : options) names += (names.empty() ? "" : " | ") + name;
        return fmt::format("must be one of {{{}}}, got '{}'", names, v);
    };
}

Setter text(std::string& target) {
    return [&target](const std::string& v) -> std::optional<std::string> {
        if (v.empty()) return std::string("must not be empty");
        target = v;
        return std::nullopt;
    };
}

struct KeySpec {
    std::string section;  // empty for top-level keys
    std::string key;
    std::string doc;
    Setter set;
};

std::vector<KeySpec> key_table(ScenarioConfig& c) {
    using S = ScheduleConfig;
    using I = IdentifyConfig;
    using L = LGConfig;
    using C = ChshConfig;
    const auto positive = [](double x) { return x > 0.0; };
    return {
        {"", "experiment", "schedule | identify | refine | lg | chsh (required)",
         choice(c.experiment, std::vector<std::pair<std::string, Experiment>>{
                                  {"schedule", Experiment::schedule},
                                  {"identify", Experiment::identify},
                                  {"refine", Experiment::refine},
                                  {"lg", Experiment::lg},
                                  {"chsh", Experiment::chsh}})},
        {"", "seed", "master seed, unsigned 64-bit (default 1)", integer(c.seed, 0)},
        {"", "output_dir", "directory for CSV and summary output (default out)",
         text(c.output_dir)},

        {"schedule", "n", "operators per cycle (default 4)", integer(c.schedule.n, 1)},
        {"schedule", "m", "cycles per operator (default 3)", integer(c.schedule.m, 1)},
        {"schedule", "dt_obs", "seconds per recorded bit (default 1)",
         real(c.schedule.dt_obs, positive, "> 0")},
        {"schedule", "c_obs", "dissipation per bit in k_B T, >= ln 2 (default ln 2)",
         real(c.schedule.c_obs, [](double x) { return x >= 0.69314718055994531; }, ">= ln 2")},
        {"schedule", "temperature_K", "bath temperature in kelvin (default 300)",
         real(c.schedule.temperature_K, positive, "> 0")},
        {"schedule", "schedule", "pulse | uniform | weights-file (default pulse)",
         choice(c.schedule.kind, std::vector<std::pair<std::string, S::Kind>>{
                                     {"pulse", S::Kind::pulse},
                                     {"uniform", S::Kind::uniform},
                                     {"weights-file", S::Kind::weights_file}})},
        {"schedule", "weights_file", "CSV of per-step weights, one column per operator",
         text(c.schedule.weights_file)},

        {"identify", "scenario", "register6 | register5 | noncommuting (default register6)",
         choice(c.identify.scenario, std::vector<std::pair<std::string, I::Scenario>>{
                                         {"register6", I::Scenario::register6},
                                         {"register5", I::Scenario::register5},
                                         {"noncommuting", I::Scenario::noncommuting}})},
        {"identify", "trials", "stability cycles, >= 2 (default 32)", integer(c.identify.trials, 2)},
        {"identify", "delta", "sieve tolerance (default 1e-6)",
         real(c.identify.delta, positive, "> 0")},
        {"identify", "theta", "rotation per step of the free qubit (default 0.7)",
         any_real(c.identify.theta)},
        {"identify", "record_cycles", "deployment cycles in record.csv (default 8)",
         integer(c.identify.record_cycles, 1)},

        {"refine", "d_w", "qubits in the world, 1..10 (default 6)", integer(c.refine.d_w, 1, 10)},
        {"refine", "kappa", "backaction strength, >= 0 (default 2)",
         real(c.refine.kappa, [](double x) { return x >= 0.0; }, ">= 0")},
        {"refine", "delta", "commutator tolerance reported in the summary (default 1e-6)",
         real(c.refine.delta, positive, "> 0")},
        {"refine", "trials", "trials per row (default 100)", integer(c.refine.trials, 1)},
        {"refine", "probe_counts", "increasing comma-separated list (default 1..d_w)",
         [&c](const std::string& v) -> std::optional<std::string> {
             std::vector<std::size_t> out;
             for (const std::string& part : split(v, ',')) {
                 const auto x = to_u64(part);
                 if (!x || *x == 0) {
                     return fmt::format("must be a list of positive integers, got '{}'", v);
                 }
                 out.push_back(static_cast<std::size_t>(*x));
             }
             if (out.empty()) return std::string("must not be empty");
             c.refine.probe_counts = std::move(out);
             return std::nullopt;
         }},

        {"lg", "pointer_model", "qubit | hysteretic (default qubit)",
         choice(c.lg.pointer_model, std::vector<std::pair<std::string, L::Model>>{
                                        {"qubit", L::Model::qubit},
                                        {"hysteretic", L::Model::hysteretic}})},
        {"lg", "mode", "exact | sampled (default sampled)",
         choice(c.lg.mode, std::vector<std::pair<std::string, L::Mode>>{
                               {"exact", L::Mode::exact}, {"sampled", L::Mode::sampled}})},
        {"lg", "theta_per_step", "precession angle per step (default pi/3)",
         any_real(c.lg.theta_per_step)},
        {"lg", "t1", "first measurement step (default 0)", integer(c.lg.t1, 0)},
        {"lg", "t2", "second measurement step (default 1)", integer(c.lg.t2, 0)},
        {"lg", "t3", "third measurement step (default 2)", integer(c.lg.t3, 0)},
        {"lg", "trials", "trials per correlator (default 100000)", integer(c.lg.trials, 1)},
        {"lg", "calibrate_between", "re-prepare the pointer after the first reading",
         boolean(c.lg.calibrate_between)},
        {"lg", "calibration_standard", "0 or 1 (default 0)",
         integer(c.lg.calibration_standard, 0, 1)},
        {"lg", "p_stay_after_1", "hysteretic: Prob(next 1 | read 1) (default 0.9)",
         real(c.lg.p_stay_after_1, [](double x) { return x >= 0.0 && x <= 1.0; }, "in [0, 1]")},
        {"lg", "p_stay_after_0", "hysteretic: Prob(next 1 | read 0) (default 0.1)",
         real(c.lg.p_stay_after_0, [](double x) { return x >= 0.0 && x <= 1.0; }, "in [0, 1]")},
        {"lg", "base_flip", "hysteretic: flip probability per free step (default 0.05)",
         real(c.lg.base_flip, [](double x) { return x >= 0.0 && x <= 1.0; }, "in [0, 1]")},
        {"lg", "scan_points", "qubit model: theta grid for lg_scan.csv, 0 disables (default 64)",
         integer(c.lg.scan_points, 0)},

        {"chsh", "state", "singlet | product | file (default singlet)",
         choice(c.chsh.state, std::vector<std::pair<std::string, C::State>>{
                                  {"singlet", C::State::singlet},
                                  {"product", C::State::product},
                                  {"file", C::State::file}})},
        {"chsh", "state_file", "4x4 density matrix, 4 lines of re,im pairs",
         text(c.chsh.state_file)},
        {"chsh", "angles", "a,a',b,b' in radians (default 0,pi/2,pi/4,3pi/4)",
         [&c](const std::string& v) -> std::optional<std::string> {
             const std::vector<std::string> parts = split(v, ',');
             std::array<double, 4> out{};
             if (parts.size() != 4) return fmt::format("must be four comma-separated reals, got '{}'", v);
             for (std::size_t i = 0; i < 4; ++i) {
                 const auto x = to_double(parts[i]);
                 if (!x) return fmt::format("must be four comma-separated reals, got '{}'", v);
                 out[i] = *x;
             }
             c.chsh.angles = out;
             return std::nullopt;
         }},
        {"chsh", "trials", "sampled trials (default 100000)", integer(c.chsh.trials, 1)},
        {"chsh", "mode", "exact | sampled (default exact)",
         choice(c.chsh.mode, std::vector<std::pair<std::string, C::Mode>>{
                                 {"exact", C::Mode::exact}, {"sampled", C::Mode::sampled}})},
        {"chsh", "adversary", "none | path to a correlation table x,y,estimate (default none)",
         text(c.chsh.adversary)},
        {"chsh", "sigma", "sampled decision threshold in standard errors (default 3)",
         real(c.chsh.sigma, [](double x) { return x >= 0.0; }, ">= 0")},
        {"chsh", "scan_points", "angle grid for the CHSH maximum, 0 disables (default 0)",
         integer(c.chsh.scan_points, 0, 64)},
    };
}

}  // namespace

const char* to_string(Experiment e) noexcept {
    switch (e) {
        case Experiment::schedule: return "schedule";
        case Experiment::identify: return "identify";
        case Experiment::refine: return "refine";
        case Experiment::lg: return "lg";
        case Experiment::chsh: return "chsh";
    }
    return "?";
}

ConfigError::ConfigError(std::vector<std::string> errors)
    : std::invalid_argument([&] {
          std::string msg = fmt::format("{} configuration error(s):", errors.size());
          for (const auto& e : errors) msg += "\n  " + e;
          return msg;
      }()),
      errors_(std::move(errors)) {}

ScenarioConfig parse_config(const std::string& text_in) {
    ScenarioConfig config;
    const std::vector<KeySpec> keys = key_table(config);
    std::set<std::string> sections;
    for (const KeySpec& k : keys) sections.insert(k.section);

    std::vector<std::string> errors;
    std::set<std::string> seen;
    std::string section;
    bool section_known = true;
    std::istringstream in(text_in);
    std::string raw;
    for (std::size_t line_no = 1; std::getline(in, raw); ++line_no) {
        const std::string line = trim(raw);
        if (line.empty() || line.front() == '#' || line.front() == ';') continue;
        if (line.front() == '[') {
            if (line.back() != ']') {
                errors.push_back(fmt::format("line {}: malformed section header '{}'", line_no, line));
                continue;
            }
            section = trim(line.substr(1, line.size() - 2));
            section_known = !section.empty() && sections.count(section) > 0;
            if (!section_known) {
                errors.push_back(fmt::format("line {}: unknown section [{}]", line_no, section));
            }
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            errors.push_back(fmt::format("line {}: expected 'key = value', got '{}'", line_no, line));
            continue;
        }
        if (!section_known) continue;
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        const std::string qualified = section.empty() ? key : section + "." + key;
        const auto spec = std::find_if(keys.begin(), keys.end(), [&](const KeySpec& k) {
            return k.section == section && k.key == key;
        });
        if (spec == keys.end()) {
            errors.push_back(fmt::format("line {}: unknown key '{}'", line_no, qualified));
            continue;
        }
        if (!seen.insert(qualified).second) {
            errors.push_back(fmt::format("line {}: duplicate key '{}'", line_no, qualified));
            continue;
        }
        if (auto err = spec->set(value)) {
            errors.push_back(fmt::format("line {}: key '{}' {}", line_no, qualified, *err));
        }
    }

    if (!seen.count("experiment")) errors.push_back("missing required key 'experiment'");
    if (config.schedule.kind == ScheduleConfig::Kind::weights_file &&
        config.schedule.weights_file.empty()) {
        errors.push_back("key 'schedule.weights_file' is required when schedule = weights-file");
    }
    if (config.chsh.state == ChshConfig::State::file && config.chsh.state_file.empty()) {
        errors.push_back("key 'chsh.state_file' is required when state = file");
    }
    if (!(config.lg.t1 < config.lg.t2 && config.lg.t2 < config.lg.t3)) {
        errors.push_back(fmt::format("keys 'lg.t1', 'lg.t2', 'lg.t3' must increase strictly, got {}, {}, {}",
                                     config.lg.t1, config.lg.t2, config.lg.t3));
    }
    const auto& probes = config.refine.probe_counts;
    for (std::size_t i = 0; i < probes.size(); ++i) {
        if (probes[i] > config.refine.d_w || (i > 0 && probes[i] <= probes[i - 1])) {
            errors.push_back(fmt::format(
                "key 'refine.probe_counts' must increase strictly and stay <= d_w = {}",
                config.refine.d_w));
            break;
        }
    }
    if (!errors.empty()) throw ConfigError(std::move(errors));
    if (probes.empty()) {
        for (std::size_t d = 1; d <= config.refine.d_w; ++d) config.refine.probe_counts.push_back(d);
    }
    return config;
}

std::string config_reference() {
    ScenarioConfig scratch;
    std::string out;
    std::string section = "-";
    for (const KeySpec& k : key_table(scratch)) {
        if (k.section != section) {
            section = k.section;
            out += section.empty() ? "top level:\n" : fmt::format("[{}]\n", section);
        }
        out += fmt::format("  {:<22} {}\n", k.key, k.doc);
    }
    return out;
}

}  // namespace sysid
