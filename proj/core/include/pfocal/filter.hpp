#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "pfocal/assoc.hpp"
#include "pfocal/geometry.hpp"

namespace pfocal {

/// Near-constant-velocity motion in range with a random-walk depth. The
/// driving noise is [range acceleration, depth rate], applied over one scan
/// interval.
struct MotionModel {
    double scan_time = 3.0;        // seconds between scans
    double accel_noise_var = 0.05; // range acceleration variance, (m/s^2)^2
    double depth_noise_var = 0.0;  // depth rate variance, (m/s)^2
};

/// Initial state distribution: range and depth uniform over closed intervals
/// (a degenerate interval pins the component), speed zero-mean Gaussian.
struct Prior {
    double range_min = 0.0;
    double range_max = 5000.0;
    double depth_min = 0.0;
    double depth_max = 0.0;
    double speed_std = 5.0;
};

struct Particle {
    SourceState state;
    double weight = 0.0;
};

/// Weighted particle approximation of the source posterior at scan
/// time_index. Weights are kept normalized to sum to one.
struct ParticleSet {
    std::vector<Particle> particles;
    int time_index = 0;

    std::size_t size() const { return particles.size(); }
};

struct FilterParams {
    int particle_count = 10000;
    double ess_threshold = 0.5;      // resample when ESS < threshold * J
    double jitter_range_std = 0.1;   // post-resample range roughening, meters
    int max_scan_measurements = kMaxScanMeasurements;
};

struct UpdateStats {
    double ess = 0.0;                 // effective sample size, 1 / sum(w^2)
    double max_log_likelihood = 0.0;  // best per-particle scan log likelihood
};

struct StepResult {
    SourceState estimate;
    double ess = 0.0;
    bool resampled = false;
};

/// Draws the initial equal-weight cloud from the prior. The seed selects a
/// dedicated substream, so callers pass the run seed directly. Throws
/// ConfigError on an inverted interval.
ParticleSet init_particles(const Prior& prior, int count, std::uint64_t seed);

/// Propagates every particle one scan interval through the motion model,
/// drawing fresh driving noise, and advances the time index. Weights are
/// untouched.
void predict(ParticleSet& ps, const MotionModel& motion, std::mt19937_64& rng);

/// Reweights by the per-particle scan likelihood (the association sum over
/// all valid detection/clutter assignments) and renormalizes. Throws
/// DivergenceError carrying the scan index when every particle's likelihood
/// underflows to zero.
UpdateStats update(ParticleSet& ps, const TdoaScan& scan, const ReceiverState& receiver,
                   const Environment& env, const MeasurementModel& model);

/// Effective sample size of the current weights.
double effective_sample_size(const ParticleSet& ps);

/// Systematic resampling to equal weights plus range roughening, triggered
/// when the ESS falls below threshold * J. Returns whether resampling
/// happened.
bool resample(ParticleSet& ps, double ess_threshold, double jitter_range_std,
              std::mt19937_64& rng);

/// Posterior-mean estimate of the source state.
SourceState mmse_estimate(const ParticleSet& ps);

/// One complete filter cycle: predict, update, resample, estimate. The scan
/// is gated to the closest max_scan_measurements entries first. Divergence
/// from update propagates to the caller.
StepResult step(ParticleSet& ps, const TdoaScan& scan, const ReceiverState& receiver,
                const Environment& env, const MeasurementModel& model,
                const MotionModel& motion, const FilterParams& params,
                std::mt19937_64& rng);

struct TrackEstimate {
    int scan_index = 0;
    double timestamp = 0.0;
    SourceState state;
    double ess = 0.0;
    bool resampled = false;
    bool reinitialized = false;
};

/// Sequential single-target tracker. Owns the particle set and the per-trial
/// random stream; recovers from divergent updates by re-drawing the particle
/// cloud from the prior and counting the event.
class Tracker {
public:
    Tracker(const Prior& prior, const MotionModel& motion, const MeasurementModel& model,
            const Environment& env, const FilterParams& params, std::uint64_t seed);

    TrackEstimate process(const TdoaScan& scan, const ReceiverState& receiver);

    int divergence_count() const { return divergence_count_; }
    const ParticleSet& particles() const { return particles_; }

private:
    Prior prior_;
    MotionModel motion_;
    MeasurementModel model_;
    Environment env_;
    FilterParams params_;
    std::uint64_t seed_;
    std::mt19937_64 rng_;
    ParticleSet particles_;
    int divergence_count_ = 0;
};

}  // namespace pfocal
