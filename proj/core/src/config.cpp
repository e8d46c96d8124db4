#include "pfocal/config.hpp"

#include <cctype>
#include <charconv>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <set>
#include <sstream>
#include <string_view>

#include "pfocal/errors.hpp"
#include "pfocal/rng.hpp"

namespace pfocal {

namespace {

std::string trim(std::string_view s) {
    std::size_t b = 0;
    std::size_t e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return std::string(s.substr(b, e - b));
}

double num(const std::string& v) {
    char* end = nullptr;
    const double x = std::strtod(v.c_str(), &end);
    if (end != v.c_str() + v.size() || v.empty()) {
        throw std::invalid_argument("expected a number, got '" + v + "'");
    }
    return x;
}

int integer(const std::string& v) {
    int x = 0;
    const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), x);
    if (ec != std::errc() || p != v.data() + v.size()) {
        throw std::invalid_argument("expected an integer, got '" + v + "'");
    }
    return x;
}

std::uint64_t unsigned64(const std::string& v) {
    std::uint64_t x = 0;
    const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), x);
    if (ec != std::errc() || p != v.data() + v.size()) {
        throw std::invalid_argument("expected an unsigned integer, got '" + v + "'");
    }
    return x;
}

bool boolean(const std::string& v) {
    if (v == "true" || v == "1") return true;
    if (v == "false" || v == "0") return false;
    throw std::invalid_argument("expected true/false, got '" + v + "'");
}

ReceiverProfile::Kind profile_kind(const std::string& v) {
    if (v == "constant") return ReceiverProfile::Kind::kConstant;
    if (v == "sweep") return ReceiverProfile::Kind::kSweep;
    throw std::invalid_argument("expected constant or sweep, got '" + v + "'");
}

struct KeyEntry {
    const char* key;
    const char* doc;
    const char* preset;
    void (*apply)(RunConfig&, const std::string&);
};

// clang-format off
const KeyEntry kKeyTable[] = {
    {"env.seafloor_depth", "water column depth in meters", "65",
     +[](RunConfig& c, const std::string& v) { c.env.seafloor_depth = num(v); }},
    {"env.sound_speed", "isovelocity sound speed in m/s", "1508",
     +[](RunConfig& c, const std::string& v) { c.env.sound_speed = num(v); }},

    {"scenario.initial_range", "true source range at scan 1, meters", "500",
     +[](RunConfig& c, const std::string& v) { c.scenario.initial_range = num(v); }},
    {"scenario.initial_depth", "true source depth at scan 1, meters", "0",
     +[](RunConfig& c, const std::string& v) { c.scenario.initial_depth = num(v); }},
    {"scenario.initial_speed", "true range rate at scan 1, m/s", "3",
     +[](RunConfig& c, const std::string& v) { c.scenario.initial_speed = num(v); }},
    {"scenario.n_scans", "number of scans to simulate", "100",
     +[](RunConfig& c, const std::string& v) { c.scenario.n_scans = integer(v); }},
    {"scenario.accel_noise_var", "truth range-acceleration variance, (m/s^2)^2", "0",
     +[](RunConfig& c, const std::string& v) { c.scenario.accel_noise_var = num(v); }},
    {"scenario.depth_noise_var", "truth depth-rate variance, (m/s)^2", "0",
     +[](RunConfig& c, const std::string& v) { c.scenario.depth_noise_var = num(v); }},

    {"receiver.profile", "depth profile: constant or sweep", "sweep",
     +[](RunConfig& c, const std::string& v) { c.receiver.kind = profile_kind(v); }},
    {"receiver.depth", "fixed receiver depth for the constant profile, meters", "20",
     +[](RunConfig& c, const std::string& v) { c.receiver.depth = num(v); }},
    {"receiver.depth_min", "shallow end of the sweep, meters", "5",
     +[](RunConfig& c, const std::string& v) { c.receiver.depth_min = num(v); }},
    {"receiver.depth_max", "deep end of the sweep, meters", "40",
     +[](RunConfig& c, const std::string& v) { c.receiver.depth_max = num(v); }},
    {"receiver.sweep_scans", "scans per one-way sweep leg", "50",
     +[](RunConfig& c, const std::string& v) { c.receiver.sweep_scans = integer(v); }},

    {"detection.d1", "detection probability of the (direct, bottom) pair", "0.12",
     +[](RunConfig& c, const std::string& v) { c.detection.d[0] = num(v); }},
    {"detection.d2", "detection probability of the (direct, bottom-surface) pair", "0.08",
     +[](RunConfig& c, const std::string& v) { c.detection.d[1] = num(v); }},
    {"detection.d3", "detection probability of the (bottom, bottom-surface) pair", "0.06",
     +[](RunConfig& c, const std::string& v) { c.detection.d[2] = num(v); }},
    {"detection.position_dependent", "zero the probability for infeasible pairs", "true",
     +[](RunConfig& c, const std::string& v) { c.detection.position_dependent = boolean(v); }},

    {"clutter.mean_count", "expected false alarms per scan", "4",
     +[](RunConfig& c, const std::string& v) { c.clutter.mean_count = num(v); }},
    {"clutter.max_tdoa", "false-alarm TDOAs are uniform on [0, this), seconds", "0.1",
     +[](RunConfig& c, const std::string& v) { c.clutter.max_tdoa = num(v); }},

    {"noise.sigma1", "TDOA noise std of the (direct, bottom) pair, seconds", "0.0005",
     +[](RunConfig& c, const std::string& v) { c.noise.sigma[0] = num(v); }},
    {"noise.sigma2", "TDOA noise std of the (direct, bottom-surface) pair, seconds", "0.0005",
     +[](RunConfig& c, const std::string& v) { c.noise.sigma[1] = num(v); }},
    {"noise.sigma3", "TDOA noise std of the (bottom, bottom-surface) pair, seconds", "0.0005",
     +[](RunConfig& c, const std::string& v) { c.noise.sigma[2] = num(v); }},

    {"motion.scan_time", "seconds between scans", "3",
     +[](RunConfig& c, const std::string& v) { c.motion.scan_time = num(v); }},
    {"motion.accel_noise_var", "filter range-acceleration variance, (m/s^2)^2", "0.05",
     +[](RunConfig& c, const std::string& v) { c.motion.accel_noise_var = num(v); }},
    {"motion.depth_noise_var", "filter depth-rate variance, (m/s)^2", "0",
     +[](RunConfig& c, const std::string& v) { c.motion.depth_noise_var = num(v); }},

    {"prior.range_min", "lower edge of the uniform range prior, meters", "0",
     +[](RunConfig& c, const std::string& v) { c.prior.range_min = num(v); }},
    {"prior.range_max", "upper edge of the uniform range prior, meters", "5000",
     +[](RunConfig& c, const std::string& v) { c.prior.range_max = num(v); }},
    {"prior.depth_min", "lower edge of the uniform depth prior, meters", "0",
     +[](RunConfig& c, const std::string& v) { c.prior.depth_min = num(v); }},
    {"prior.depth_max", "upper edge of the uniform depth prior, meters", "0",
     +[](RunConfig& c, const std::string& v) { c.prior.depth_max = num(v); }},
    {"prior.speed_std", "std of the zero-mean Gaussian speed prior, m/s", "5",
     +[](RunConfig& c, const std::string& v) { c.prior.speed_std = num(v); }},

    {"filter.particles", "particle count J", "10000",
     +[](RunConfig& c, const std::string& v) { c.filter.particle_count = integer(v); }},
    {"filter.ess_threshold", "resample when ESS drops below this fraction of J", "0.5",
     +[](RunConfig& c, const std::string& v) { c.filter.ess_threshold = num(v); }},
    {"filter.jitter_range_std", "post-resampling range roughening std, meters", "0.1",
     +[](RunConfig& c, const std::string& v) { c.filter.jitter_range_std = num(v); }},
    {"filter.max_measurements", "keep at most this many measurements per scan", "20",
     +[](RunConfig& c, const std::string& v) { c.filter.max_scan_measurements = integer(v); }},

    {"run.trials", "independent Monte Carlo trials", "50",
     +[](RunConfig& c, const std::string& v) { c.run.trials = integer(v); }},
    {"run.seed", "master seed; every random draw derives from it", "1",
     +[](RunConfig& c, const std::string& v) { c.run.seed = unsigned64(v); }},
    {"run.divergence_exit_fraction", "diverged-trial fraction that trips exit code 4", "0.2",
     +[](RunConfig& c, const std::string& v) { c.run.divergence_exit_fraction = num(v); }},

    {"waveform.enabled", "also render audio when simulating", "false",
     +[](RunConfig& c, const std::string& v) { c.waveform.enabled = boolean(v); }},
    {"waveform.sample_rate", "samples per second", "8000",
     +[](RunConfig& c, const std::string& v) { c.waveform.sample_rate = num(v); }},
    {"waveform.band_low", "lower edge of the source band, Hz", "100",
     +[](RunConfig& c, const std::string& v) { c.waveform.band_low = num(v); }},
    {"waveform.band_high", "upper edge of the source band, Hz", "2000",
     +[](RunConfig& c, const std::string& v) { c.waveform.band_high = num(v); }},
    {"waveform.snr_db", "signal-to-noise ratio of the rendered audio, dB", "10",
     +[](RunConfig& c, const std::string& v) { c.waveform.snr_db = num(v); }},

    {"cepstrum.window_seconds", "analysis window length, seconds", "1",
     +[](RunConfig& c, const std::string& v) { c.cepstrum.window_seconds = num(v); }},
    {"cepstrum.overlap", "fraction of the window shared by neighbors", "0.5",
     +[](RunConfig& c, const std::string& v) { c.cepstrum.overlap = num(v); }},
    {"cepstrum.floor_db", "per-window magnitude floor below the peak, dB", "-240",
     +[](RunConfig& c, const std::string& v) { c.cepstrum.floor_db = num(v); }},
    {"cepstrum.svd_rank", "singular values kept as the source term; 0 skips the split", "3",
     +[](RunConfig& c, const std::string& v) { c.cepstrum.svd_rank = integer(v); }},
    {"cepstrum.background_time_bins", "median kernel width along time, odd", "21",
     +[](RunConfig& c, const std::string& v) { c.cepstrum.background_time_bins = integer(v); }},
    {"cepstrum.background_quefrency_bins", "median kernel width along quefrency, odd", "21",
     +[](RunConfig& c, const std::string& v) { c.cepstrum.background_quefrency_bins = integer(v); }},
    {"cepstrum.peak_gain", "keep maxima above gain times the background", "5",
     +[](RunConfig& c, const std::string& v) { c.cepstrum.peak_gain = num(v); }},
    {"cepstrum.guard_quefrency", "exclude quefrencies at or below this, seconds", "0.002",
     +[](RunConfig& c, const std::string& v) { c.cepstrum.guard_quefrency = num(v); }},
    {"cepstrum.max_quefrency", "exclude quefrencies above this, seconds", "0.1",
     +[](RunConfig& c, const std::string& v) { c.cepstrum.max_quefrency = num(v); }},
    {"cepstrum.cluster_eps_time", "clustering radius along time, seconds", "3",
     +[](RunConfig& c, const std::string& v) { c.cepstrum.cluster_eps_time = num(v); }},
    {"cepstrum.cluster_eps_quefrency", "clustering radius along quefrency, seconds", "0.001",
     +[](RunConfig& c, const std::string& v) { c.cepstrum.cluster_eps_quefrency = num(v); }},
    {"cepstrum.cluster_min_pts", "neighbors (counting self) for a core point", "5",
     +[](RunConfig& c, const std::string& v) { c.cepstrum.cluster_min_pts = integer(v); }},

    {"data.measurements", "measurement CSV to track instead of simulating", "",
     +[](RunConfig& c, const std::string& v) { c.data.measurements = v; }},
    {"data.receiver", "receiver depth CSV aligned with the measurements", "",
     +[](RunConfig& c, const std::string& v) { c.data.receiver = v; }},
    {"data.truth", "ground-truth CSV for error metrics", "",
     +[](RunConfig& c, const std::string& v) { c.data.truth = v; }},
    {"data.waveform", "raw float32 waveform for the extraction pipeline", "",
     +[](RunConfig& c, const std::string& v) { c.data.waveform = v; }},
};
// clang-format on

std::string env_name(std::string_view key) {
    std::string name = "PFOCAL_";
    for (char ch : key) {
        name += (ch == '.') ? '_' : static_cast<char>(std::toupper(static_cast<unsigned char>(ch)));
    }
    return name;
}

const KeyEntry* find_key(const std::string& key) {
    for (const auto& entry : kKeyTable) {
        if (key == entry.key) return &entry;
    }
    return nullptr;
}

void require(bool ok, const std::string& message) {
    if (!ok) throw ConfigError(message);
}

}  // namespace

std::vector<double> ReceiverProfile::depths(int n_scans) const {
    std::vector<double> out(static_cast<std::size_t>(n_scans));
    if (kind == Kind::kConstant) {
        std::fill(out.begin(), out.end(), depth);
        return out;
    }
    const int leg = sweep_scans;
    const double span = depth_max - depth_min;
    for (int n = 0; n < n_scans; ++n) {
        const int t = n % (2 * leg);
        const double frac = (t <= leg) ? static_cast<double>(t) / leg
                                       : static_cast<double>(2 * leg - t) / leg;
        out[static_cast<std::size_t>(n)] = depth_min + span * frac;
    }
    return out;
}

RunConfig parse_config(std::istream& in, const std::string& origin) {
    RunConfig cfg;
    std::set<std::string> seen;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const std::string stripped = trim(line);
        if (stripped.empty() || stripped.front() == '#') continue;
        const auto where = origin + ":" + std::to_string(line_no);

        const auto eq = stripped.find('=');
        if (eq == std::string::npos) {
            throw ConfigError(where + ": expected 'key = value', got '" + stripped + "'");
        }
        const std::string key = trim(std::string_view(stripped).substr(0, eq));
        const std::string value = trim(std::string_view(stripped).substr(eq + 1));

        const KeyEntry* entry = find_key(key);
        if (entry == nullptr) {
            throw ConfigError(where + ": unknown key '" + key + "'");
        }
        if (!seen.insert(key).second) {
            throw ConfigError(where + ": duplicate key '" + key + "'");
        }
        try {
            entry->apply(cfg, value);
        } catch (const std::invalid_argument& err) {
            throw ConfigError(where + ": key '" + key + "': " + err.what());
        }
    }
    return cfg;
}

void apply_env_overrides(RunConfig& cfg) {
    for (const auto& entry : kKeyTable) {
        const char* value = std::getenv(env_name(entry.key).c_str());
        if (value == nullptr) continue;
        try {
            entry.apply(cfg, value);
        } catch (const std::invalid_argument& err) {
            throw ConfigError("environment override " + env_name(entry.key) + ": " +
                              err.what());
        }
    }
}

void validate_config(const RunConfig& cfg) {
    const double z = cfg.env.seafloor_depth;
    require(z > 0.0, "env.seafloor_depth must be > 0");
    require(cfg.env.sound_speed > 0.0, "env.sound_speed must be > 0");

    require(cfg.scenario.n_scans >= 1, "scenario.n_scans must be >= 1");
    require(cfg.scenario.initial_range > 0.0, "scenario.initial_range must be > 0");
    require(cfg.scenario.initial_depth >= 0.0 && cfg.scenario.initial_depth <= z,
            "scenario.initial_depth must lie within the water column");
    require(cfg.scenario.accel_noise_var >= 0.0 && cfg.scenario.depth_noise_var >= 0.0,
            "scenario noise variances must be >= 0");

    if (cfg.receiver.kind == ReceiverProfile::Kind::kConstant) {
        require(cfg.receiver.depth > 0.0 && cfg.receiver.depth < z,
                "receiver.depth must lie strictly inside the water column");
    } else {
        require(cfg.receiver.depth_min > 0.0 && cfg.receiver.depth_max < z &&
                    cfg.receiver.depth_min <= cfg.receiver.depth_max,
                "receiver sweep depths must satisfy 0 < depth_min <= depth_max < "
                "seafloor depth");
        require(cfg.receiver.sweep_scans >= 1, "receiver.sweep_scans must be >= 1");
    }

    for (int l = 0; l < kNumPairs; ++l) {
        const double d = cfg.detection.d[static_cast<std::size_t>(l)];
        require(d >= 0.0 && d <= 1.0,
                "detection.d" + std::to_string(l + 1) + " must lie in [0, 1]");
        require(cfg.noise.sigma[static_cast<std::size_t>(l)] > 0.0,
                "noise.sigma" + std::to_string(l + 1) + " must be > 0");
    }
    require(cfg.clutter.mean_count >= 0.0, "clutter.mean_count must be >= 0");
    require(cfg.clutter.max_tdoa > 0.0, "clutter.max_tdoa must be > 0");

    require(cfg.motion.scan_time > 0.0, "motion.scan_time must be > 0");
    require(cfg.motion.accel_noise_var >= 0.0 && cfg.motion.depth_noise_var >= 0.0,
            "motion noise variances must be >= 0");

    require(cfg.prior.range_min >= 0.0 && cfg.prior.range_max >= cfg.prior.range_min,
            "prior range interval must satisfy 0 <= min <= max");
    require(cfg.prior.depth_min >= 0.0 && cfg.prior.depth_max >= cfg.prior.depth_min &&
                cfg.prior.depth_max <= z,
            "prior depth interval must lie within the water column");
    require(cfg.prior.speed_std >= 0.0, "prior.speed_std must be >= 0");

    require(cfg.filter.particle_count >= 1, "filter.particles must be >= 1");
    require(cfg.filter.ess_threshold >= 0.0 && cfg.filter.ess_threshold <= 1.0,
            "filter.ess_threshold must lie in [0, 1]");
    require(cfg.filter.jitter_range_std >= 0.0, "filter.jitter_range_std must be >= 0");
    require(cfg.filter.max_scan_measurements >= 1, "filter.max_measurements must be >= 1");

    require(cfg.run.trials >= 1, "run.trials must be >= 1");
    require(cfg.run.divergence_exit_fraction >= 0.0 &&
                cfg.run.divergence_exit_fraction <= 1.0,
            "run.divergence_exit_fraction must lie in [0, 1]");

    require(cfg.waveform.sample_rate > 0.0, "waveform.sample_rate must be > 0");
    require(cfg.waveform.band_low >= 0.0 &&
                cfg.waveform.band_high > cfg.waveform.band_low &&
                cfg.waveform.band_high <= cfg.waveform.sample_rate / 2.0,
            "waveform band must satisfy 0 <= low < high <= Nyquist");

    require(cfg.cepstrum.window_seconds > 0.0, "cepstrum.window_seconds must be > 0");
    require(cfg.cepstrum.overlap >= 0.0 && cfg.cepstrum.overlap < 1.0,
            "cepstrum.overlap must lie in [0, 1)");
    require(cfg.cepstrum.floor_db < 0.0, "cepstrum.floor_db must be < 0");
    require(cfg.cepstrum.svd_rank >= 0, "cepstrum.svd_rank must be >= 0");
    require(cfg.cepstrum.background_time_bins >= 1 &&
                cfg.cepstrum.background_time_bins % 2 == 1 &&
                cfg.cepstrum.background_quefrency_bins >= 1 &&
                cfg.cepstrum.background_quefrency_bins % 2 == 1,
            "background kernel dimensions must be odd and positive");
    require(cfg.cepstrum.peak_gain >= 1.0, "cepstrum.peak_gain must be >= 1");
    require(cfg.cepstrum.guard_quefrency >= 0.0, "cepstrum.guard_quefrency must be >= 0");
    require(cfg.cepstrum.max_quefrency > cfg.cepstrum.guard_quefrency,
            "cepstrum.max_quefrency must exceed the guard band");
    require(cfg.cepstrum.cluster_eps_time > 0.0 &&
                cfg.cepstrum.cluster_eps_quefrency > 0.0,
            "cluster radii must be > 0");
    require(cfg.cepstrum.cluster_min_pts >= 1, "cepstrum.cluster_min_pts must be >= 1");
}

RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    RunConfig cfg = parse_config(in, path);
    apply_env_overrides(cfg);
    validate_config(cfg);
    return cfg;
}

std::vector<ConfigKeyDoc> config_key_docs() {
    std::vector<ConfigKeyDoc> docs;
    docs.reserve(std::size(kKeyTable));
    for (const auto& entry : kKeyTable) {
        docs.push_back({entry.key, entry.doc, entry.preset});
    }
    return docs;
}

Scenario make_scenario(const RunConfig& cfg, std::uint64_t seed) {
    Scenario sc;
    sc.env = cfg.env;
    sc.receiver_depths = cfg.receiver.depths(cfg.scenario.n_scans);
    sc.motion.scan_time = cfg.motion.scan_time;
    sc.motion.accel_noise_var = cfg.scenario.accel_noise_var;
    sc.motion.depth_noise_var = cfg.scenario.depth_noise_var;
    sc.initial_state.range = cfg.scenario.initial_range;
    sc.initial_state.depth = cfg.scenario.initial_depth;
    sc.initial_state.range_speed = cfg.scenario.initial_speed;
    sc.n_scans = cfg.scenario.n_scans;
    sc.detection = cfg.detection;
    sc.clutter = cfg.clutter;
    sc.noise = cfg.noise;
    sc.seed = seed;
    return sc;
}

MeasurementModel make_measurement_model(const RunConfig& cfg) {
    return MeasurementModel{cfg.detection, cfg.clutter, cfg.noise};
}

}  // namespace pfocal
