#include "sysid/scheduler.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include <fmt/format.h>

namespace sysid {

namespace {

void require_operators(std::span<const Operator> operators, std::size_t n) {
    if (operators.size() != n) {
        throw std::invalid_argument(fmt::format(
            "schedule expects {} operators, got {}", n, operators.size()));
    }
    for (const auto& op : operators) {
        if (op.dim() != operators.front().dim()) {
            throw DimensionMismatch("schedule operators have unequal dimensions");
        }
    }
}

}  // namespace

ThermoLedger::ThermoLedger(double c_obs, double temperature, double dt_obs)
    : c_obs_(c_obs), temperature_(temperature), dt_obs_(dt_obs) {
    if (!(c_obs >= std::numbers::ln2)) {
        throw std::invalid_argument(fmt::format("c_obs = {} is below ln 2", c_obs));
    }
    if (!(temperature > 0.0)) throw std::invalid_argument("temperature must be positive");
    if (!(dt_obs > 0.0)) throw std::invalid_argument("dt_obs must be positive");
}

std::string ThermoLedger::summary() const {
    return fmt::format(
        "c_obs={:.17g}\ntemperature_K={:.17g}\ndt_obs={:.17g}\ncharged_bits={}\n"
        "bit_cost_J={:.17g}\nheat_J={:.17g}\nheat_kBT={:.17g}\nelapsed_s={:.17g}\n",
        c_obs_, temperature_, dt_obs_, charged_bits_, bit_cost_joules(), heat_joules(),
        heat_kbt(), elapsed_seconds());
}

double unit_pulse(double x) noexcept {
    const double a = std::abs(x);
    if (a < 0.5) return 1.0;
    if (a == 0.5) return 0.5;
    return 0.0;
}

double pi_pulse(std::size_t offset, std::size_t cycles, std::size_t duty, double dt, double t) {
    if (offset >= duty) {
        throw std::invalid_argument(
            fmt::format("pi_pulse: offset {} outside [0, {})", offset, duty));
    }
    if (!(dt > 0.0)) throw std::invalid_argument("pi_pulse: dt must be positive");
    if (cycles == 0) return 0.0;
    // Only the cycles whose pulse centre lies within one period of t can
    // contribute; every other term of the sum is exactly zero.
    const auto n = static_cast<double>(duty);
    const double centre_cycle = (t / dt - static_cast<double>(offset) - 0.5) / n;
    const double lo = std::max(0.0, std::floor(centre_cycle) - 1.0);
    const double hi = std::min(static_cast<double>(cycles - 1), std::ceil(centre_cycle) + 1.0);
    double value = 0.0;
    for (double j = lo; j <= hi; j += 1.0) {
        const double centre = (n * j + static_cast<double>(offset) + 0.5) * dt;
        value += unit_pulse((t - centre) / dt);
    }
    return value;
}

void PulseSchedule::validate() const {
    if (n < 1) throw std::invalid_argument("PulseSchedule: n must be >= 1");
    if (m < 1) throw std::invalid_argument("PulseSchedule: m must be >= 1");
    if (!(dt_obs > 0.0)) throw std::invalid_argument("PulseSchedule: dt_obs must be positive");
}

std::vector<std::size_t> PulseSchedule::deployment_sequence() const {
    validate();
    std::vector<std::size_t> seq;
    seq.reserve(total_steps());
    for (std::size_t k = 0; k < total_steps(); ++k) {
        const double t = (static_cast<double>(k) + 0.5) * dt_obs;
        std::size_t active = n;
        for (std::size_t i = 0; i < n; ++i) {
            if (pi_pulse(i, m, n, dt_obs, t) == 1.0) {
                active = i;
                break;
            }
        }
        if (active == n) throw std::logic_error("PulseSchedule: no pulse active at step midpoint");
        seq.push_back(active);
    }
    return seq;
}

GeneralSchedule::GeneralSchedule(std::size_t n, std::size_t total_steps, double dt_obs,
                                 WeightFn weights)
    : n_(n), total_steps_(total_steps), dt_obs_(dt_obs), weights_(std::move(weights)) {
    if (n_ < 1) throw std::invalid_argument("GeneralSchedule: n must be >= 1");
    if (!(dt_obs_ > 0.0)) throw std::invalid_argument("GeneralSchedule: dt_obs must be positive");
    if (!weights_) throw std::invalid_argument("GeneralSchedule: missing weight function");
}

GeneralSchedule GeneralSchedule::uniform(std::size_t n, std::size_t total_steps, double dt_obs) {
    const double w = 1.0 / static_cast<double>(n);
    return GeneralSchedule(n, total_steps, dt_obs, [w](std::size_t, std::size_t) { return w; });
}

GeneralSchedule GeneralSchedule::from_pulse(const PulseSchedule& pulse) {
    pulse.validate();
    return GeneralSchedule(pulse.n, pulse.total_steps(), pulse.dt_obs,
                           [pulse](std::size_t step, std::size_t i) {
                               const double t = (static_cast<double>(step) + 0.5) * pulse.dt_obs;
                               return pi_pulse(i, pulse.m, pulse.n, pulse.dt_obs, t);
                           });
}

GeneralSchedule GeneralSchedule::from_table(std::vector<std::vector<double>> table, double dt_obs) {
    if (table.empty() || table.front().empty()) {
        throw std::invalid_argument("GeneralSchedule::from_table: empty table");
    }
    const std::size_t n = table.front().size();
    for (const auto& row : table) {
        if (row.size() != n) throw std::invalid_argument("GeneralSchedule::from_table: ragged rows");
    }
    const std::size_t steps = table.size();
    return GeneralSchedule(n, steps, dt_obs,
                           [table = std::move(table)](std::size_t step, std::size_t i) {
                               return table.at(step).at(i);
                           });
}

GeneralSchedule GeneralSchedule::from_csv(const std::string& text, double dt_obs) {
    std::vector<std::vector<double>> table;
    std::istringstream in(text);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto first = line.find_first_not_of(" \t\r");
        if (first == std::string::npos || line[first] == '#') continue;
        std::vector<double> row;
        std::istringstream cells(line);
        std::string cell;
        while (std::getline(cells, cell, ',')) {
            try {
                std::size_t used = 0;
                row.push_back(std::stod(cell, &used));
                if (cell.find_first_not_of(" \t\r", used) != std::string::npos) throw std::invalid_argument("");
            } catch (const std::exception&) {
                throw std::invalid_argument(
                    fmt::format("weights file line {}: '{}' is not a number", line_no, cell));
            }
        }
        table.push_back(std::move(row));
    }
    return from_table(std::move(table), dt_obs);
}

std::vector<std::size_t> GeneralSchedule::normalization_violations(double tol) const {
    std::vector<std::size_t> bad;
    for (std::size_t k = 0; k < total_steps_; ++k) {
        double sum = 0.0;
        bool in_range = true;
        for (std::size_t i = 0; i < n_; ++i) {
            const double w = weights_(k, i);
            in_range = in_range && w >= 0.0 && w <= 1.0;
            sum += w;
        }
        if (!in_range || std::abs(sum - 1.0) > tol) bad.push_back(k);
    }
    return bad;
}

std::vector<std::size_t> GeneralSchedule::sample_deployments(Rng& rng) const {
    std::vector<std::size_t> seq;
    seq.reserve(total_steps_);
    for (std::size_t k = 0; k < total_steps_; ++k) {
        const double u = rng.uniform();
        double cumulative = 0.0;
        std::size_t chosen = n_ - 1;
        for (std::size_t i = 0; i < n_; ++i) {
            cumulative += weights_(k, i);
            if (u < cumulative) {
                chosen = i;
                break;
            }
        }
        seq.push_back(chosen);
    }
    return seq;
}

Operator schedule_hamiltonian(const PulseSchedule& schedule, std::span<const Operator> operators,
                              double t) {
    schedule.validate();
    require_operators(operators, schedule.n);
    Operator h = Operator::zero(operators.front().dim());
    for (std::size_t i = 0; i < schedule.n; ++i) {
        const double w = pi_pulse(i, schedule.m, schedule.n, schedule.dt_obs, t);
        if (w != 0.0) h += Complex(w) * operators[i];
    }
    return h;
}

Operator schedule_hamiltonian(const GeneralSchedule& schedule,
                              std::span<const Operator> operators, double t) {
    require_operators(operators, schedule.n());
    const double s = std::floor(t / schedule.dt_obs());
    if (s < 0.0 || s >= static_cast<double>(schedule.total_steps())) {
        throw std::invalid_argument("schedule_hamiltonian: t outside the schedule");
    }
    const auto step = static_cast<std::size_t>(s);
    Operator h = Operator::zero(operators.front().dim());
    double sum = 0.0;
    for (std::size_t i = 0; i < schedule.n(); ++i) {
        const double w = schedule.weight(step, i);
        if (w < 0.0 || w > 1.0) {
            throw std::invalid_argument(fmt::format("weight {} at step {} outside [0, 1]", w, step));
        }
        sum += w;
        if (w != 0.0) h += Complex(w) * operators[i];
    }
    if (std::abs(sum - 1.0) > 1e-12) {
        throw std::invalid_argument(
            fmt::format("weights at step {} sum to {} instead of 1", step, sum));
    }
    return h;
}

double dissipation_after(std::size_t /*k*/, std::size_t j, const ThermoLedger& ledger) noexcept {
    return static_cast<double>(j) * ledger.bit_cost_joules();
}

double total_action(const PulseSchedule& schedule, const ThermoLedger& ledger) {
    schedule.validate();
    return static_cast<double>(schedule.n * schedule.m) * ledger.bit_action();
}

DissipationReport per_step_dissipation_check(const GeneralSchedule& schedule,
                                             std::span<const Operator> operators,
                                             const ThermoLedger& ledger) {
    require_operators(operators, schedule.n());
    DissipationReport report;
    report.normalization_violations = schedule.normalization_violations();
    const double cost = ledger.bit_cost_joules();
    for (std::size_t k = 0; k < schedule.total_steps(); ++k) {
        // Each operator carries unit dissipation weight, so the step's heat is
        // (sum_i alpha_i) c_obs k_B T.
        double heat = 0.0;
        for (std::size_t i = 0; i < schedule.n(); ++i) heat += schedule.weight(k, i) * cost;
        const double rel = std::abs(heat - cost) / cost;
        report.max_relative_error = std::max(report.max_relative_error, rel);
        if (rel > 1e-12) report.heat_mismatches.push_back(k);
    }
    report.holds = report.normalization_violations.empty() && report.heat_mismatches.empty();
    return report;
}

RefinementCost refinement_cost(std::size_t d, const ThermoLedger& ledger) {
    const auto bits = static_cast<double>(d);
    return {bits * ledger.bit_cost_joules(), bits * ledger.c_obs(), bits * ledger.dt_obs()};
}

}  // namespace sysid
