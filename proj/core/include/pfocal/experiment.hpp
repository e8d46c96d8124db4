#pragma once

#include <filesystem>
#include <vector>

#include "pfocal/config.hpp"
#include "pfocal/filter.hpp"
#include "pfocal/sim.hpp"

namespace pfocal {

/// One tracked trial: per-scan estimates plus the truth range (NaN when no
/// truth is available) and the raw measurement count per scan.
struct TrialRecord {
    int trial = 0;
    std::vector<TrackEstimate> estimates;
    std::vector<double> truth_range;
    std::vector<int> measurement_counts;
    int divergences = 0;
};

/// Per-scan aggregates across trials. range_rmse is NaN when no truth was
/// available.
struct RunMetrics {
    std::vector<int> scan_index;
    std::vector<double> timestamp;
    std::vector<double> mean_range;
    std::vector<double> range_rmse;
    std::vector<double> mean_ess;
    std::vector<double> mean_measurements;
    std::vector<int> divergence_count;
};

struct ExperimentResult {
    RunMetrics metrics;
    std::vector<TrialRecord> trials;
    int diverged_trials = 0;  // trials with at least one divergence
};

/// Runs the configured Monte Carlo experiment and writes metrics.csv,
/// trial_NNNN.csv per trial, and the plot-data files into outdir. Synthetic
/// mode (no data.measurements) draws fresh truth and scans per trial; ingest
/// mode tracks the supplied files with only filter randomness varying. Trials
/// run on up to `jobs` threads; outputs and results are byte-identical for
/// any jobs value.
ExperimentResult run_experiment(const RunConfig& cfg,
                                const std::filesystem::path& outdir, int jobs = 1);

/// Writes the two plot-data files: tdoa_overlay.csv (per scan, the three
/// modeled TDOA curves as series g1,g2,g3 when truth is available, then each
/// measurement) and rmse_vs_time.csv (per-scan RMSE and mean range).
void emit_plotdata(const RunMetrics& metrics, const GroundTruth* gt,
                   const std::vector<TdoaScan>& scans,
                   const std::filesystem::path& outdir);

}  // namespace pfocal
