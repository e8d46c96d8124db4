#include "pfocal/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <limits>
#include <mutex>
#include <thread>

#include "pfocal/errors.hpp"
#include "pfocal/io.hpp"
#include "pfocal/rng.hpp"

namespace pfocal {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

/// Fixed inputs for ingest mode; synthetic mode leaves scans empty and every
/// trial draws its own.
struct SharedInputs {
    std::vector<TdoaScan> scans;
    std::vector<ReceiverState> receivers;
    std::vector<double> truth_range;  // empty when no truth file
    GroundTruth truth;                // populated when a truth file exists
    bool have_truth = false;
};

TrialRecord run_trial(const RunConfig& cfg, const SharedInputs* shared, int trial) {
    const std::uint64_t trial_seed =
        rng::mix(cfg.run.seed, {rng::kTrialStream, static_cast<std::uint64_t>(trial)});

    std::vector<TdoaScan> scans;
    std::vector<ReceiverState> receivers;
    std::vector<double> truth_range;
    if (shared != nullptr) {
        scans = shared->scans;
        receivers = shared->receivers;
        truth_range = shared->truth_range;
    } else {
        const Scenario sc = make_scenario(cfg, rng::mix(trial_seed, {rng::kScenarioStream}));
        const GroundTruth gt = simulate_truth(sc);
        scans = simulate_scans(gt, sc);
        receivers.reserve(sc.receiver_depths.size());
        for (double depth : sc.receiver_depths) receivers.push_back({depth});
        truth_range.reserve(gt.states.size());
        for (const auto& s : gt.states) truth_range.push_back(s.range);
    }

    Tracker tracker(cfg.prior, cfg.motion, make_measurement_model(cfg), cfg.env,
                    cfg.filter, trial_seed);
    TrialRecord record;
    record.trial = trial;
    record.estimates.reserve(scans.size());
    record.measurement_counts.reserve(scans.size());
    for (std::size_t n = 0; n < scans.size(); ++n) {
        record.estimates.push_back(tracker.process(scans[n], receivers[n]));
        record.measurement_counts.push_back(static_cast<int>(scans[n].tdoas.size()));
    }
    record.truth_range = truth_range.empty()
                             ? std::vector<double>(scans.size(), kNaN)
                             : std::move(truth_range);
    record.divergences = tracker.divergence_count();
    return record;
}

RunMetrics aggregate(const std::vector<TrialRecord>& trials) {
    RunMetrics m;
    if (trials.empty()) return m;
    const std::size_t n_scans = trials.front().estimates.size();
    const auto n_trials = static_cast<double>(trials.size());

    for (std::size_t n = 0; n < n_scans; ++n) {
        double range_sum = 0.0;
        double sq_err_sum = 0.0;
        double ess_sum = 0.0;
        double meas_sum = 0.0;
        int reinits = 0;
        bool have_truth = true;
        for (const auto& t : trials) {
            const auto& est = t.estimates[n];
            range_sum += est.state.range;
            ess_sum += est.ess;
            meas_sum += t.measurement_counts[n];
            reinits += est.reinitialized ? 1 : 0;
            const double err = est.state.range - t.truth_range[n];
            if (std::isnan(err)) {
                have_truth = false;
            } else {
                sq_err_sum += err * err;
            }
        }
        m.scan_index.push_back(trials.front().estimates[n].scan_index);
        m.timestamp.push_back(trials.front().estimates[n].timestamp);
        m.mean_range.push_back(range_sum / n_trials);
        m.range_rmse.push_back(have_truth ? std::sqrt(sq_err_sum / n_trials) : kNaN);
        m.mean_ess.push_back(ess_sum / n_trials);
        m.mean_measurements.push_back(meas_sum / n_trials);
        m.divergence_count.push_back(reinits);
    }
    return m;
}

std::ofstream open_out(const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot open '" + path.string() + "' for writing");
    return out;
}

void write_trial_csv(const std::filesystem::path& path, const TrialRecord& t) {
    std::ofstream out = open_out(path);
    out << "scan_index,timestamp_s,range_m,depth_m,speed_mps,ess,reinitialized,"
           "range_true_m\n";
    for (std::size_t n = 0; n < t.estimates.size(); ++n) {
        const auto& e = t.estimates[n];
        out << e.scan_index << ',' << format_double(e.timestamp) << ','
            << format_double(e.state.range) << ',' << format_double(e.state.depth) << ','
            << format_double(e.state.range_speed) << ',' << format_double(e.ess) << ','
            << (e.reinitialized ? 1 : 0) << ',' << format_double(t.truth_range[n])
            << '\n';
    }
}

void write_metrics_csv(const std::filesystem::path& path, const RunMetrics& m) {
    std::ofstream out = open_out(path);
    out << "scan_index,timestamp_s,mean_range_m,range_rmse_m,mean_ess,"
           "mean_measurements,divergence_count\n";
    for (std::size_t n = 0; n < m.scan_index.size(); ++n) {
        out << m.scan_index[n] << ',' << format_double(m.timestamp[n]) << ','
            << format_double(m.mean_range[n]) << ',' << format_double(m.range_rmse[n])
            << ',' << format_double(m.mean_ess[n]) << ','
            << format_double(m.mean_measurements[n]) << ',' << m.divergence_count[n]
            << '\n';
    }
}

}  // namespace

void emit_plotdata(const RunMetrics& metrics, const GroundTruth* gt,
                   const std::vector<TdoaScan>& scans,
                   const std::filesystem::path& outdir) {
    {
        std::ofstream out = open_out(outdir / "tdoa_overlay.csv");
        out << "scan_index,timestamp_s,series,value_s\n";
        for (std::size_t n = 0; n < scans.size(); ++n) {
            const auto& scan = scans[n];
            if (gt != nullptr && n < gt->predicted_tdoas.size()) {
                for (int l = 0; l < kNumPairs; ++l) {
                    out << scan.index << ',' << format_double(scan.timestamp) << ",g"
                        << (l + 1) << ','
                        << format_double(gt->predicted_tdoas[n][static_cast<std::size_t>(l)])
                        << '\n';
                }
            }
            for (double tdoa : scan.tdoas) {
                out << scan.index << ',' << format_double(scan.timestamp)
                    << ",measurement," << format_double(tdoa) << '\n';
            }
        }
    }
    {
        std::ofstream out = open_out(outdir / "rmse_vs_time.csv");
        out << "scan_index,timestamp_s,range_rmse_m,mean_range_m\n";
        for (std::size_t n = 0; n < metrics.scan_index.size(); ++n) {
            out << metrics.scan_index[n] << ',' << format_double(metrics.timestamp[n])
                << ',' << format_double(metrics.range_rmse[n]) << ','
                << format_double(metrics.mean_range[n]) << '\n';
        }
    }
}

ExperimentResult run_experiment(const RunConfig& cfg,
                                const std::filesystem::path& outdir, int jobs) {
    std::filesystem::create_directories(outdir);

    SharedInputs shared;
    const bool ingest_mode = !cfg.data.measurements.empty();
    if (ingest_mode) {
        if (cfg.data.receiver.empty()) {
            throw ConfigError("data.measurements requires data.receiver");
        }
        auto [scans, receivers] = ingest_scans(cfg.data.measurements, cfg.data.receiver);
        shared.scans = std::move(scans);
        shared.receivers = std::move(receivers);
        if (!cfg.data.truth.empty()) {
            auto states = read_truth_csv(cfg.data.truth);
            if (states.size() != shared.scans.size()) {
                throw DataError("truth file scan count does not match the measurements");
            }
            shared.have_truth = true;
            shared.truth.states = std::move(states);
            for (std::size_t n = 0; n < shared.truth.states.size(); ++n) {
                std::array<double, kNumPairs> g{};
                for (int l = 0; l < kNumPairs; ++l) {
                    g[static_cast<std::size_t>(l)] =
                        predict_tdoa(l, shared.truth.states[n], shared.receivers[n],
                                     cfg.env);
                }
                shared.truth.predicted_tdoas.push_back(g);
                shared.truth_range.push_back(shared.truth.states[n].range);
            }
        }
    }

    const int n_trials = cfg.run.trials;
    std::vector<TrialRecord> trials(static_cast<std::size_t>(n_trials));
    const int workers = std::clamp(jobs, 1, n_trials);

    std::atomic<int> next{0};
    std::mutex error_mutex;
    std::exception_ptr first_error;
    auto work = [&] {
        while (true) {
            const int t = next.fetch_add(1);
            if (t >= n_trials) return;
            try {
                trials[static_cast<std::size_t>(t)] =
                    run_trial(cfg, ingest_mode ? &shared : nullptr, t);
            } catch (...) {
                std::lock_guard lock(error_mutex);
                if (!first_error) first_error = std::current_exception();
                return;
            }
        }
    };
    if (workers == 1) {
        work();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(static_cast<std::size_t>(workers));
        for (int i = 0; i < workers; ++i) pool.emplace_back(work);
        for (auto& th : pool) th.join();
    }
    if (first_error) std::rethrow_exception(first_error);

    ExperimentResult result;
    result.metrics = aggregate(trials);
    for (const auto& t : trials) {
        if (t.divergences > 0) ++result.diverged_trials;
    }

    for (const auto& t : trials) {
        char name[32];
        std::snprintf(name, sizeof(name), "trial_%04d.csv", t.trial + 1);
        write_trial_csv(outdir / name, t);
    }
    write_metrics_csv(outdir / "metrics.csv", result.metrics);

    // Plot data shows one representative realization: the ingested data, or
    // trial 1's draw in synthetic mode.
    if (ingest_mode) {
        emit_plotdata(result.metrics, shared.have_truth ? &shared.truth : nullptr,
                      shared.scans, outdir);
    } else {
        const std::uint64_t trial_seed = rng::mix(cfg.run.seed, {rng::kTrialStream, 0});
        const Scenario sc = make_scenario(cfg, rng::mix(trial_seed, {rng::kScenarioStream}));
        const GroundTruth gt = simulate_truth(sc);
        const auto scans = simulate_scans(gt, sc);
        emit_plotdata(result.metrics, &gt, scans, outdir);
    }

    result.trials = std::move(trials);
    return result;
}

}  // namespace pfocal
