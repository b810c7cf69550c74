#pragma once

// Measurement scheduling and the observer's thermodynamic ledger.
//
// Time runs in units of the per-bit recording time dt_obs. Step k (0-based)
// covers [k dt_obs, (k+1) dt_obs); the measurement record numbers steps from 1.
//
// Heat bookkeeping uses a unit dissipation weight per deployed operator: a
// step whose deployment weights sum to one charges exactly c_obs k_B T,
// whatever the matrices M_i are. Matrix dynamics and heat accounting are
// kept as separate channels.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "sysid/operator.hpp"
#include "sysid/rng.hpp"

namespace sysid {

inline constexpr double kBoltzmann = 1.380649e-23;  // J/K, exact SI value

class ThermoLedger {
public:
    ThermoLedger() : ThermoLedger(std::numbers::ln2, 300.0, 1.0) {}
    // Rejects c_obs < ln 2, temperature <= 0 and dt_obs <= 0.
    ThermoLedger(double c_obs, double temperature, double dt_obs);

    double c_obs() const noexcept { return c_obs_; }
    double temperature() const noexcept { return temperature_; }
    double dt_obs() const noexcept { return dt_obs_; }
    std::uint64_t charged_bits() const noexcept { return charged_bits_; }

    void charge(std::uint64_t bits) noexcept { charged_bits_ += bits; }

    // c_obs k_B T.
    double bit_cost_joules() const noexcept { return c_obs_ * kBoltzmann * temperature_; }
    // c_obs k_B T dt_obs.
    double bit_action() const noexcept { return bit_cost_joules() * dt_obs_; }
    double heat_joules() const noexcept {
        return static_cast<double>(charged_bits_) * bit_cost_joules();
    }
    // Heat in units of k_B T.
    double heat_kbt() const noexcept { return static_cast<double>(charged_bits_) * c_obs_; }
    double elapsed_seconds() const noexcept {
        return static_cast<double>(charged_bits_) * dt_obs_;
    }

    // key=value lines, one quantity per line.
    std::string summary() const;

private:
    double c_obs_;
    double temperature_;
    double dt_obs_;
    std::uint64_t charged_bits_ = 0;
};

// Unit rectangle: 1 for |x| < 1/2, 1/2 at |x| = 1/2, 0 outside.
double unit_pulse(double x) noexcept;

// Pulse train of operator `offset` with duty cycle `duty` (= n) over `cycles`
// (= m) cycles: sum over j < m of unit_pulse((t - (n j + offset + 1/2) dt) / dt).
// Throws std::invalid_argument unless offset < duty.
double pi_pulse(std::size_t offset, std::size_t cycles, std::size_t duty, double dt, double t);

struct PulseSchedule {
    std::size_t n = 1;
    std::size_t m = 1;
    double dt_obs = 1.0;

    void validate() const;
    std::size_t total_steps() const noexcept { return n * m; }
    // 0-based operator index deployed in each step, read off the pulse trains
    // at step midpoints.
    std::vector<std::size_t> deployment_sequence() const;
};

// Deployment weights alpha_i(t), piecewise constant over steps of length dt_obs.
class GeneralSchedule {
public:
    using WeightFn = std::function<double(std::size_t step, std::size_t index)>;

    GeneralSchedule(std::size_t n, std::size_t total_steps, double dt_obs, WeightFn weights);

    static GeneralSchedule uniform(std::size_t n, std::size_t total_steps, double dt_obs = 1.0);
    static GeneralSchedule from_pulse(const PulseSchedule& pulse);
    // table[step][index].
    static GeneralSchedule from_table(std::vector<std::vector<double>> table, double dt_obs = 1.0);
    // Comma-separated, one row per step, one column per operator; blank lines
    // and lines starting with '#' are skipped.
    static GeneralSchedule from_csv(const std::string& text, double dt_obs = 1.0);

    std::size_t n() const noexcept { return n_; }
    std::size_t total_steps() const noexcept { return total_steps_; }
    double dt_obs() const noexcept { return dt_obs_; }
    double weight(std::size_t step, std::size_t index) const { return weights_(step, index); }

    // Steps where some weight leaves [0, 1] or the weights do not sum to 1
    // within tol.
    std::vector<std::size_t> normalization_violations(double tol = 1e-12) const;

    // Draws one operator per step with probability alpha_i(step).
    std::vector<std::size_t> sample_deployments(Rng& rng) const;

private:
    std::size_t n_;
    std::size_t total_steps_;
    double dt_obs_;
    WeightFn weights_;
};

Operator schedule_hamiltonian(const PulseSchedule& schedule, std::span<const Operator> operators,
                              double t);
// Throws std::invalid_argument if the weights at the step containing t
// violate normalization.
Operator schedule_hamiltonian(const GeneralSchedule& schedule,
                              std::span<const Operator> operators, double t);

// Heat from operator k over its first j cycles, in joules: j c_obs k_B T.
double dissipation_after(std::size_t k, std::size_t j, const ThermoLedger& ledger) noexcept;

// n m dt_obs c_obs k_B T.
double total_action(const PulseSchedule& schedule, const ThermoLedger& ledger);

struct DissipationReport {
    bool holds = true;
    std::vector<std::size_t> normalization_violations;
    // Steps whose charged heat differs from c_obs k_B T beyond 1e-12 relative.
    std::vector<std::size_t> heat_mismatches;
    double max_relative_error = 0.0;
};

DissipationReport per_step_dissipation_check(const GeneralSchedule& schedule,
                                             std::span<const Operator> operators,
                                             const ThermoLedger& ledger);

struct RefinementCost {
    double joules = 0.0;
    double kbt = 0.0;
    double tau_seconds = 0.0;
};

// Cost of identifying d binary degrees of freedom: d c_obs k_B T, taking
// d dt_obs.
RefinementCost refinement_cost(std::size_t d, const ThermoLedger& ledger);

}  // namespace sysid
