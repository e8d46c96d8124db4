#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "pfocal/assoc.hpp"
#include "pfocal/cepstrum.hpp"
#include "pfocal/filter.hpp"
#include "pfocal/geometry.hpp"
#include "pfocal/sim.hpp"

namespace pfocal {

/// Generative source setup for synthetic runs.
struct ScenarioConfig {
    double initial_range = 500.0;
    double initial_depth = 0.0;
    double initial_speed = 3.0;
    int n_scans = 100;
    double accel_noise_var = 0.0;  // truth driving noise; 0 keeps trials comparable
    double depth_noise_var = 0.0;
};

/// Receiver depth over the run: either fixed or a triangular sweep between
/// depth_min and depth_max with a one-way leg of sweep_scans scans.
struct ReceiverProfile {
    enum class Kind { kConstant, kSweep };
    Kind kind = Kind::kSweep;
    double depth = 20.0;
    double depth_min = 5.0;
    double depth_max = 40.0;
    int sweep_scans = 50;

    std::vector<double> depths(int n_scans) const;
};

struct RunSection {
    int trials = 50;
    std::uint64_t seed = 1;
    // Fraction of diverged trials above which the CLI exits with the
    // divergence warning code.
    double divergence_exit_fraction = 0.2;
};

struct WaveformConfig {
    bool enabled = false;
    double sample_rate = 8000.0;
    double band_low = 100.0;
    double band_high = 2000.0;
    double snr_db = 10.0;
};

struct CepstrumConfig {
    double window_seconds = 1.0;
    double overlap = 0.5;         // fraction of the window shared by neighbors
    double floor_db = -240.0;
    int svd_rank = 3;             // 0 disables the source/propagation split
    int background_time_bins = 21;
    int background_quefrency_bins = 21;
    double peak_gain = 5.0;
    double guard_quefrency = 0.002;
    double max_quefrency = 0.1;
    double cluster_eps_time = 3.0;
    double cluster_eps_quefrency = 0.001;
    int cluster_min_pts = 5;
};

/// Input file paths; empty means "not supplied". A run with measurements set
/// tracks ingested data instead of simulating.
struct DataConfig {
    std::string measurements;
    std::string receiver;
    std::string truth;
    std::string waveform;
};

/// Defaults are the worked shallow-water setup: 65 m water column, 1508 m/s
/// sound speed, weak detection with moderate clutter, and a 10^4-particle
/// filter. config_key_docs() lists every key with the same defaults.
struct RunConfig {
    Environment env{65.0, 1508.0};
    ScenarioConfig scenario;
    ReceiverProfile receiver;
    DetectionModel detection{{0.12, 0.08, 0.06}, true};
    ClutterModel clutter{4.0, 0.1};
    NoiseModel noise{{5e-4, 5e-4, 5e-4}};
    MotionModel motion;  // filter-side motion model
    Prior prior;
    FilterParams filter;
    RunSection run;
    WaveformConfig waveform;
    CepstrumConfig cepstrum;
    DataConfig data;
};

/// Parses `key = value` lines (# comments, blank lines allowed) into a config
/// over the defaults. Unknown or duplicate keys and malformed values throw
/// ConfigError naming the key and line. No environment overrides, no
/// validation; origin labels error messages.
RunConfig parse_config(std::istream& in, const std::string& origin);

/// Applies PFOCAL_<KEY> environment variables (dots become underscores,
/// uppercased: env.sound_speed -> PFOCAL_ENV_SOUND_SPEED) on top of the
/// current values.
void apply_env_overrides(RunConfig& cfg);

/// Range and consistency checks across all sections; throws ConfigError.
void validate_config(const RunConfig& cfg);

/// parse + env overrides + validation in one call.
RunConfig load_config(const std::string& path);

/// All recognized keys with their documentation and default, for --help and
/// the README.
struct ConfigKeyDoc {
    std::string key;
    std::string doc;
    std::string default_value;
};
std::vector<ConfigKeyDoc> config_key_docs();

/// Assembles the generative scenario for one trial; the seed argument keeps
/// trial draws independent.
Scenario make_scenario(const RunConfig& cfg, std::uint64_t seed);

MeasurementModel make_measurement_model(const RunConfig& cfg);

}  // namespace pfocal
