#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "pfocal/assoc.hpp"
#include "pfocal/cepstrum.hpp"
#include "pfocal/filter.hpp"
#include "pfocal/geometry.hpp"

namespace pfocal {

/// Everything needed to generate one synthetic dataset: environment, per-scan
/// receiver depths, generative source motion, sensor model, and the seed that
/// makes the draw reproducible.
struct Scenario {
    Environment env;
    std::vector<double> receiver_depths;  // meters, one entry per scan
    MotionModel motion;                   // generative driving noise
    SourceState initial_state;
    int n_scans = 1;
    DetectionModel detection;
    ClutterModel clutter;
    NoiseModel noise;
    std::uint64_t seed = 0;
};

/// Sampled source trajectory plus the noise-free TDOA of each path pair at
/// every scan.
struct GroundTruth {
    std::vector<SourceState> states;
    std::vector<std::array<double, kNumPairs>> predicted_tdoas;
};

/// Samples a trajectory from the scenario's motion model, starting at the
/// initial state which becomes scan 1. Throws DataError naming the scan if
/// the source leaves the surveillance area (range <= 0 or depth outside the
/// water column).
GroundTruth simulate_truth(const Scenario& sc);

/// Draws one measurement set per scan: every feasible pair is detected with
/// its configured probability and contributes its TDOA plus Gaussian noise
/// (folded at zero, since a delay magnitude cannot be negative), clutter
/// counts are Poisson and values uniform, and the merged list is shuffled so
/// ordering carries no origin information.
std::vector<TdoaScan> simulate_scans(const GroundTruth& gt, const Scenario& sc);

struct WaveformBand {
    double low = 100.0;   // Hz
    double high = 2000.0; // Hz
};

inline constexpr unsigned kAllPaths = 0b111;  // bit k enables path index k

/// Renders the scenario as audio: band-limited white noise from the source
/// passed through a per-scan three-tap delay line (one tap per enabled path,
/// delay = time of arrival, amplitude = 1/path length for spherical
/// spreading), plus white noise sized to the requested SNR. Throws
/// ConfigError if the band does not fit below Nyquist.
WaveformSegment synthesize_waveform(const GroundTruth& gt, const Scenario& sc,
                                    double sample_rate, WaveformBand band,
                                    double snr_db, unsigned path_mask = kAllPaths);

/// Gaussian white noise shaped to the band with raised-cosine edges (5% of
/// the bandwidth on each side), unit variance in the passband sense.
std::vector<double> bandlimited_noise(std::size_t count, double sample_rate,
                                      WaveformBand band, std::mt19937_64& rng);

}  // namespace pfocal
