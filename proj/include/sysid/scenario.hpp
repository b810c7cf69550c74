#pragma once

// Experiment dispatch for the command-line front end. Every experiment
// renders its artifacts in memory first, so runs can be compared byte for
// byte before anything touches the filesystem.

#include <map>
#include <string>
#include <vector>

#include "sysid/config.hpp"
#include "sysid/measurement.hpp"
#include "sysid/operator.hpp"
#include "sysid/parallel.hpp"
#include "sysid/spatial.hpp"
#include "sysid/system_id.hpp"

namespace sysid {

struct ScenarioOutput {
    // File name -> content. Always contains summary.txt.
    std::map<std::string, std::string> files;

    const std::string& summary() const { return files.at("summary.txt"); }
};

ScenarioOutput run_scenario(const ScenarioConfig& config, Execution exec = Execution::parallel);

// Creates `dir` if needed and writes every file. Throws std::runtime_error
// on I/O failure.
void write_outputs(const ScenarioOutput& output, const std::string& dir);

std::string format_real(double x);

struct DiscoveryScenario {
    std::vector<BinaryPOVM> povms;
    WorldModel world;
};

// Four-qubit world starting in |0000>, with H_W = (theta / 2) Y on qubit 4
// (1-based). register6 deploys Z1, Z2, Z3, X4, Z4 and an environment probe
// E = |00><00| + |Psi+><Psi+| on qubits 1-2; register5 drops the probe.
DiscoveryScenario register_scenario(bool with_environment_probe, double theta = 0.7);
// Two-qubit static world probed by four spin directions of qubit 1, no two
// of which commute.
DiscoveryScenario noncommuting_scenario();

// Four lines of eight comma-separated reals: re, im of each row entry.
QuantumState parse_two_qubit_state(const std::string& text);
// `x,y,estimate` rows (extra columns ignored, header optional), one per
// setting pair.
CorrelationTable parse_correlation_table(const std::string& text);

}  // namespace sysid
