#include "pfocal/filter.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "pfocal/errors.hpp"
#include "pfocal/numeric.hpp"
#include "pfocal/rng.hpp"

namespace pfocal {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

/// Draws a standard normal and scales it by hand. Always sampling, even for a
/// zero std, keeps the engine advancement identical across configurations; a
/// fresh distribution per call keeps its internal spare-value cache from
/// leaking state between substreams.
double gaussian(std::mt19937_64& rng, double mean, double std) {
    std::normal_distribution<double> unit(0.0, 1.0);
    return mean + std * unit(rng);
}

/// Uniform draw over [lo, hi] that collapses exactly to lo when the interval
/// is degenerate, while still consuming one variate.
double uniform(std::mt19937_64& rng, double lo, double hi) {
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    return lo + (hi - lo) * unit(rng);
}

}  // namespace

ParticleSet init_particles(const Prior& prior, int count, std::uint64_t seed) {
    if (count < 1) throw ConfigError("particle count must be >= 1");
    if (prior.range_max < prior.range_min || prior.depth_max < prior.depth_min) {
        throw ConfigError("prior interval is inverted (max < min)");
    }
    auto rng = rng::substream(seed, rng::kInitStream);
    ParticleSet ps;
    ps.particles.resize(static_cast<std::size_t>(count));
    const double w = 1.0 / count;
    for (auto& p : ps.particles) {
        p.state.range = uniform(rng, prior.range_min, prior.range_max);
        p.state.depth = uniform(rng, prior.depth_min, prior.depth_max);
        p.state.range_speed = gaussian(rng, 0.0, prior.speed_std);
        p.weight = w;
    }
    return ps;
}

void predict(ParticleSet& ps, const MotionModel& motion, std::mt19937_64& rng) {
    const double dt = motion.scan_time;
    const double accel_std = std::sqrt(motion.accel_noise_var);
    const double depth_std = std::sqrt(motion.depth_noise_var);
    for (auto& p : ps.particles) {
        const double accel = gaussian(rng, 0.0, accel_std);
        const double depth_rate = gaussian(rng, 0.0, depth_std);
        p.state.range += dt * p.state.range_speed + 0.5 * dt * dt * accel;
        p.state.depth += dt * depth_rate;
        p.state.range_speed += dt * accel;
    }
    ++ps.time_index;
}

UpdateStats update(ParticleSet& ps, const TdoaScan& scan, const ReceiverState& receiver,
                   const Environment& env, const MeasurementModel& model) {
    const std::size_t n = ps.size();
    std::vector<double> log_w(n);
    double max_log_w = kNegInf;
    double max_log_lik = kNegInf;
    for (std::size_t i = 0; i < n; ++i) {
        double ll = scan_log_likelihood(scan, ps.particles[i].state, receiver, env, model);
        if (std::isnan(ll)) ll = kNegInf;
        max_log_lik = std::max(max_log_lik, ll);
        log_w[i] = std::log(ps.particles[i].weight) + ll;
        max_log_w = std::max(max_log_w, log_w[i]);
    }
    if (max_log_w == kNegInf) {
        throw DivergenceError(scan.index,
                              "all particle weights vanished in the measurement update");
    }
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double w = std::exp(log_w[i] - max_log_w);
        ps.particles[i].weight = w;
        total += w;
    }
    for (auto& p : ps.particles) p.weight /= total;

    UpdateStats stats;
    stats.ess = effective_sample_size(ps);
    stats.max_log_likelihood = max_log_lik;
    return stats;
}

double effective_sample_size(const ParticleSet& ps) {
    double sum_sq = 0.0;
    for (const auto& p : ps.particles) sum_sq += p.weight * p.weight;
    return 1.0 / sum_sq;
}

bool resample(ParticleSet& ps, double ess_threshold, double jitter_range_std,
              std::mt19937_64& rng) {
    const std::size_t n = ps.size();
    if (effective_sample_size(ps) >= ess_threshold * static_cast<double>(n)) {
        return false;
    }

    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const double offset = unit(rng);

    std::vector<SourceState> next;
    next.reserve(n);
    double cumulative = ps.particles[0].weight;
    std::size_t j = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const double position = (static_cast<double>(i) + offset) / static_cast<double>(n);
        while (position > cumulative && j + 1 < n) {
            ++j;
            cumulative += ps.particles[j].weight;
        }
        next.push_back(ps.particles[j].state);
    }
    const double w = 1.0 / static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i) {
        ps.particles[i].state = next[i];
        ps.particles[i].state.range += gaussian(rng, 0.0, jitter_range_std);
        ps.particles[i].weight = w;
    }
    return true;
}

SourceState mmse_estimate(const ParticleSet& ps) {
    const std::size_t n = ps.size();
    std::vector<double> range(n), depth(n), speed(n);
    for (std::size_t i = 0; i < n; ++i) {
        const auto& p = ps.particles[i];
        range[i] = p.weight * p.state.range;
        depth[i] = p.weight * p.state.depth;
        speed[i] = p.weight * p.state.range_speed;
    }
    SourceState mean;
    mean.range = pairwise_sum(range);
    mean.depth = pairwise_sum(depth);
    mean.range_speed = pairwise_sum(speed);
    return mean;
}

StepResult step(ParticleSet& ps, const TdoaScan& scan, const ReceiverState& receiver,
                const Environment& env, const MeasurementModel& model,
                const MotionModel& motion, const FilterParams& params,
                std::mt19937_64& rng) {
    predict(ps, motion, rng);
    const TdoaScan gated = gate_scan(scan, mmse_estimate(ps), receiver, env,
                                     params.max_scan_measurements);
    const UpdateStats stats = update(ps, gated, receiver, env, model);
    StepResult result;
    result.resampled = resample(ps, params.ess_threshold, params.jitter_range_std, rng);
    result.estimate = mmse_estimate(ps);
    result.ess = stats.ess;
    return result;
}

Tracker::Tracker(const Prior& prior, const MotionModel& motion,
                 const MeasurementModel& model, const Environment& env,
                 const FilterParams& params, std::uint64_t seed)
    : prior_(prior),
      motion_(motion),
      model_(model),
      env_(env),
      params_(params),
      seed_(seed),
      rng_(rng::substream(seed, rng::kFilterStream)),
      particles_(init_particles(prior, params.particle_count, seed)) {}

TrackEstimate Tracker::process(const TdoaScan& scan, const ReceiverState& receiver) {
    TrackEstimate out;
    out.scan_index = scan.index;
    out.timestamp = scan.timestamp;
    try {
        const StepResult r =
            step(particles_, scan, receiver, env_, model_, motion_, params_, rng_);
        out.state = r.estimate;
        out.ess = r.ess;
        out.resampled = r.resampled;
        return out;
    } catch (const DivergenceError&) {
        ++divergence_count_;
        out.reinitialized = true;
    }

    // The cloud collapsed away from anything that can explain the scan.
    // Restart from the prior and give the same scan one more chance; if it
    // still cannot be explained, carry the fresh prior cloud forward.
    const int saved_time_index = particles_.time_index;
    particles_ = init_particles(
        prior_, params_.particle_count,
        rng::mix(seed_, {rng::kReinitStream, static_cast<std::uint64_t>(divergence_count_),
                    static_cast<std::uint64_t>(scan.index)}));
    particles_.time_index = saved_time_index;
    try {
        const TdoaScan gated = gate_scan(scan, mmse_estimate(particles_), receiver, env_,
                                         params_.max_scan_measurements);
        const UpdateStats stats = update(particles_, gated, receiver, env_, model_);
        out.resampled = resample(particles_, params_.ess_threshold,
                                 params_.jitter_range_std, rng_);
        out.ess = stats.ess;
    } catch (const DivergenceError&) {
        out.ess = static_cast<double>(particles_.size());
    }
    out.state = mmse_estimate(particles_);
    return out;
}

}  // namespace pfocal
