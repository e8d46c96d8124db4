#include "pfocal/sim.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <random>
#include <string>

#include "fft.hpp"
#include "pfocal/errors.hpp"
#include "pfocal/rng.hpp"

namespace pfocal {

namespace {

double gaussian(std::mt19937_64& rng, double mean, double std) {
    std::normal_distribution<double> unit(0.0, 1.0);
    return mean + std * unit(rng);
}

void check_scenario(const Scenario& sc) {
    if (sc.n_scans < 1) throw ConfigError("scenario needs at least one scan");
    if (sc.receiver_depths.size() != static_cast<std::size_t>(sc.n_scans)) {
        throw ConfigError("receiver depth list length must equal the scan count");
    }
}

}  // namespace

GroundTruth simulate_truth(const Scenario& sc) {
    check_scenario(sc);
    auto rng = rng::substream(sc.seed, rng::kTruthStream);
    const double dt = sc.motion.scan_time;
    const double accel_std = std::sqrt(sc.motion.accel_noise_var);
    const double depth_std = std::sqrt(sc.motion.depth_noise_var);

    GroundTruth gt;
    gt.states.reserve(static_cast<std::size_t>(sc.n_scans));
    gt.predicted_tdoas.reserve(static_cast<std::size_t>(sc.n_scans));

    SourceState state = sc.initial_state;
    for (int n = 1; n <= sc.n_scans; ++n) {
        if (n > 1) {
            const double accel = gaussian(rng, 0.0, accel_std);
            const double depth_rate = gaussian(rng, 0.0, depth_std);
            state.range += dt * state.range_speed + 0.5 * dt * dt * accel;
            state.depth += dt * depth_rate;
            state.range_speed += dt * accel;
        }
        if (state.range <= 0.0 || state.depth < 0.0 ||
            state.depth > sc.env.seafloor_depth) {
            throw DataError("source left the surveillance area at scan " +
                            std::to_string(n));
        }
        const ReceiverState receiver{sc.receiver_depths[static_cast<std::size_t>(n - 1)]};
        std::array<double, kNumPairs> g{};
        for (int l = 0; l < kNumPairs; ++l) {
            g[static_cast<std::size_t>(l)] = predict_tdoa(l, state, receiver, sc.env);
        }
        gt.states.push_back(state);
        gt.predicted_tdoas.push_back(g);
    }
    return gt;
}

std::vector<TdoaScan> simulate_scans(const GroundTruth& gt, const Scenario& sc) {
    check_scenario(sc);
    if (gt.states.size() != static_cast<std::size_t>(sc.n_scans)) {
        throw DataError("ground truth scan count does not match the scenario");
    }
    auto rng = rng::substream(sc.seed, rng::kScanStream);
    std::vector<TdoaScan> scans;
    scans.reserve(static_cast<std::size_t>(sc.n_scans));

    for (int n = 1; n <= sc.n_scans; ++n) {
        const auto idx = static_cast<std::size_t>(n - 1);
        const ReceiverState receiver{sc.receiver_depths[idx]};
        TdoaScan scan;
        scan.index = n;
        scan.timestamp = (n - 1) * sc.motion.scan_time;

        std::uniform_real_distribution<double> unit(0.0, 1.0);
        for (int l = 0; l < kNumPairs; ++l) {
            const double d = sc.detection.probability(l, gt.states[idx], receiver, sc.env);
            if (unit(rng) >= d) continue;
            const double g = gt.predicted_tdoas[idx][static_cast<std::size_t>(l)];
            const double noisy =
                gaussian(rng, g, sc.noise.sigma[static_cast<std::size_t>(l)]);
            scan.tdoas.push_back(std::abs(noisy));
        }
        if (sc.clutter.mean_count > 0.0) {
            std::poisson_distribution<int> count(sc.clutter.mean_count);
            const int m_fa = count(rng);
            for (int m = 0; m < m_fa; ++m) {
                scan.tdoas.push_back(sc.clutter.max_tdoa * unit(rng));
            }
        }
        std::shuffle(scan.tdoas.begin(), scan.tdoas.end(), rng);
        scans.push_back(std::move(scan));
    }
    return scans;
}

std::vector<double> bandlimited_noise(std::size_t count, double sample_rate,
                                      WaveformBand band, std::mt19937_64& rng) {
    std::vector<double> white(count);
    for (auto& s : white) s = gaussian(rng, 0.0, 1.0);

    auto spectrum = fft::r2c(white);
    const double bin_hz = sample_rate / static_cast<double>(count);
    const double transition = 0.05 * (band.high - band.low);
    for (std::size_t k = 0; k < spectrum.size(); ++k) {
        const double f = static_cast<double>(k) * bin_hz;
        double g = 0.0;
        if (f >= band.low && f <= band.high) {
            g = 1.0;
            if (f < band.low + transition) {
                const double x = (f - band.low) / transition;
                g = 0.5 - 0.5 * std::cos(std::numbers::pi * x);
            } else if (f > band.high - transition) {
                const double x = (band.high - f) / transition;
                g = 0.5 - 0.5 * std::cos(std::numbers::pi * x);
            }
        }
        spectrum[k] *= g;
    }
    // Pack the shaped half spectrum into a Hermitian full spectrum and invert.
    std::vector<std::complex<double>> full(count);
    for (std::size_t k = 0; k < spectrum.size(); ++k) full[k] = spectrum[k];
    for (std::size_t k = 1; k + spectrum.size() <= count; ++k) {
        full[count - k] = std::conj(spectrum[k]);
    }
    const auto shaped = fft::c2c_backward(full);

    std::vector<double> out(count);
    double power = 0.0;
    for (std::size_t i = 0; i < count; ++i) {
        out[i] = shaped[i].real() / static_cast<double>(count);
        power += out[i] * out[i];
    }
    power /= static_cast<double>(count);
    const double scale = (power > 0.0) ? 1.0 / std::sqrt(power) : 1.0;
    for (auto& s : out) s *= scale;
    return out;
}

WaveformSegment synthesize_waveform(const GroundTruth& gt, const Scenario& sc,
                                    double sample_rate, WaveformBand band,
                                    double snr_db, unsigned path_mask) {
    check_scenario(sc);
    if (gt.states.size() != static_cast<std::size_t>(sc.n_scans)) {
        throw DataError("ground truth scan count does not match the scenario");
    }
    if (band.low < 0.0 || band.high <= band.low || band.high > sample_rate / 2.0) {
        throw ConfigError("waveform band must satisfy 0 <= low < high <= Nyquist");
    }

    const double duration = sc.n_scans * sc.motion.scan_time;
    const auto n_samples = static_cast<std::size_t>(std::llround(duration * sample_rate));

    // Longest arrival over the run decides how much source lead-in we need so
    // every delayed tap reads a real sample.
    double max_toa = 0.0;
    for (int n = 0; n < sc.n_scans; ++n) {
        const ReceiverState receiver{sc.receiver_depths[static_cast<std::size_t>(n)]};
        for (int k = 0; k < kNumPaths; ++k) {
            max_toa = std::max(
                max_toa,
                time_of_arrival(static_cast<Path>(k),
                                gt.states[static_cast<std::size_t>(n)], receiver, sc.env));
        }
    }
    const auto margin = static_cast<std::size_t>(std::ceil(max_toa * sample_rate)) + 1;

    auto rng = rng::substream(sc.seed, rng::kWaveformStream);
    const std::vector<double> source =
        bandlimited_noise(n_samples + margin, sample_rate, band, rng);

    WaveformSegment out;
    out.sample_rate = sample_rate;
    out.start_time = 0.0;
    out.samples.assign(n_samples, 0.0);

    const auto scan_samples = static_cast<std::size_t>(
        std::llround(sc.motion.scan_time * sample_rate));
    for (int n = 0; n < sc.n_scans; ++n) {
        const ReceiverState receiver{sc.receiver_depths[static_cast<std::size_t>(n)]};
        std::array<std::size_t, kNumPaths> delay{};
        std::array<double, kNumPaths> amp{};
        for (int k = 0; k < kNumPaths; ++k) {
            const double q = path_length(static_cast<Path>(k),
                                         gt.states[static_cast<std::size_t>(n)],
                                         receiver, sc.env);
            delay[static_cast<std::size_t>(k)] =
                static_cast<std::size_t>(std::llround(q / sc.env.sound_speed * sample_rate));
            amp[static_cast<std::size_t>(k)] = (q > 0.0) ? 1.0 / q : 0.0;
        }
        const std::size_t begin = static_cast<std::size_t>(n) * scan_samples;
        const std::size_t end = std::min(n_samples, begin + scan_samples);
        for (std::size_t t = begin; t < end; ++t) {
            double acc = 0.0;
            for (int k = 0; k < kNumPaths; ++k) {
                if ((path_mask & (1u << k)) == 0) continue;
                acc += amp[static_cast<std::size_t>(k)] *
                       source[t + margin - delay[static_cast<std::size_t>(k)]];
            }
            out.samples[t] = acc;
        }
    }

    double signal_power = 0.0;
    for (double s : out.samples) signal_power += s * s;
    signal_power /= static_cast<double>(n_samples);
    const double noise_std =
        std::sqrt(signal_power / std::pow(10.0, snr_db / 10.0));
    for (auto& s : out.samples) s += gaussian(rng, 0.0, noise_std);
    return out;
}

}  // namespace pfocal
