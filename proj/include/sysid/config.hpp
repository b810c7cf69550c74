#pragma once

// Scenario configuration: flat INI text with top-level keys and one
// [section] per experiment namespace. Parsing is strict: unknown sections,
// unknown keys, duplicates and malformed values are all errors, and every
// error in the file is reported at once.

#include <array>
#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace sysid {

enum class Experiment { schedule, identify, refine, lg, chsh };
const char* to_string(Experiment e) noexcept;

struct ScheduleConfig {
    enum class Kind { pulse, uniform, weights_file };
    std::size_t n = 4;
    std::size_t m = 3;
    double dt_obs = 1.0;
    double c_obs = 0.69314718055994531;  // ln 2
    double temperature_K = 300.0;
    Kind kind = Kind::pulse;
    std::string weights_file;
};

struct IdentifyConfig {
    enum class Scenario { register6, register5, noncommuting };
    Scenario scenario = Scenario::register6;
    std::size_t trials = 32;         // stability cycles
    double delta = 1e-6;
    double theta = 0.7;              // rotation per step of the free qubit
    std::size_t record_cycles = 8;   // deployment cycles in the emitted record
};

struct RefineConfig {
    std::size_t d_w = 6;
    double kappa = 2.0;
    double delta = 1e-6;
    std::size_t trials = 100;
    std::vector<std::size_t> probe_counts;  // empty: 1 .. d_w
};

struct LGConfig {
    enum class Model { qubit, hysteretic };
    enum class Mode { exact, sampled };
    Model pointer_model = Model::qubit;
    Mode mode = Mode::sampled;
    double theta_per_step = 1.0471975511965976;  // pi / 3
    std::size_t t1 = 0, t2 = 1, t3 = 2;
    std::uint64_t trials = 100000;
    bool calibrate_between = false;
    int calibration_standard = 0;
    double p_stay_after_1 = 0.9;
    double p_stay_after_0 = 0.1;
    double base_flip = 0.05;
    std::size_t scan_points = 64;
};

struct ChshConfig {
    enum class State { singlet, product, file };
    enum class Mode { exact, sampled };
    State state = State::singlet;
    std::string state_file;
    std::array<double, 4> angles{0.0, 1.5707963267948966, 0.78539816339744831,
                                 2.3561944901923448};
    std::uint64_t trials = 100000;
    Mode mode = Mode::exact;
    std::string adversary = "none";  // "none" or a correlation-table file
    double sigma = 3.0;
    std::size_t scan_points = 0;     // 0 disables the angle grid scan
};

struct ScenarioConfig {
    Experiment experiment = Experiment::schedule;
    std::uint64_t seed = 1;
    std::string output_dir = "out";
    ScheduleConfig schedule;
    IdentifyConfig identify;
    RefineConfig refine;
    LGConfig lg;
    ChshConfig chsh;
};

class ConfigError : public std::invalid_argument {
public:
    explicit ConfigError(std::vector<std::string> errors);
    const std::vector<std::string>& errors() const noexcept { return errors_; }

private:
    std::vector<std::string> errors_;
};

// Throws ConfigError listing every problem found.
ScenarioConfig parse_config(const std::string& text);

// Documentation of every section and key, for --help.
std::string config_reference();

}  // namespace sysid
