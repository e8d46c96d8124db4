#pragma once

#include <Eigen/Core>
#include <limits>
#include <utility>
#include <vector>

#include "pfocal/assoc.hpp"

namespace pfocal {

/// Mono waveform slice with its own time origin, so scans cut from a longer
/// recording keep absolute timestamps.
struct WaveformSegment {
    std::vector<double> samples;
    double sample_rate = 8000.0;
    double start_time = 0.0;
};

enum class Taper {
    kHann,
    kRect,
};

/// Magnitude short-time Fourier transform. Rows are frequency bins (0 to
/// Nyquist), columns are analysis windows; time_axis holds window centers.
struct Spectrogram {
    Eigen::MatrixXd values;
    std::vector<double> freq_axis;
    std::vector<double> time_axis;
    int window_len = 0;
    int hop = 0;
    double sample_rate = 0.0;
};

/// Real cepstrum per analysis window. Rows are quefrency bins spaced at
/// 1 / sample_rate, columns share the spectrogram's window times.
struct Cepstrogram {
    Eigen::MatrixXd values;
    std::vector<double> quefrency_axis;
    std::vector<double> time_axis;
};

struct Peak {
    double time = 0.0;       // window center, seconds
    double quefrency = 0.0;  // seconds
    double amplitude = 0.0;  // |C| at the maximum
};

struct PeakList {
    std::vector<Peak> peaks;
    std::vector<int> cluster_labels;  // -1 marks noise; empty before clustering
};

/// Windowed magnitude STFT. Throws DataError when the segment is shorter than
/// one window.
Spectrogram spectrogram(const WaveformSegment& w, int window_len, int hop,
                        Taper window_fn = Taper::kHann);

/// Per-window real cepstrum: inverse transform of the log squared magnitude
/// along frequency. Magnitudes are clamped at 10^(floor_db/20) of the
/// per-window maximum before the log; an all-zero window yields a zero column.
Cepstrogram cepstrogram(const Spectrogram& s, double floor_db = -240.0);

/// Splits the cepstrogram into a rank-keep_source_rank reconstruction (the
/// slowly varying source term) and the residual (the propagation term). The
/// two outputs sum back to the input. Throws ConfigError unless
/// 1 <= keep_source_rank < min(rows, cols).
std::pair<Cepstrogram, Cepstrogram> svd_filter(const Cepstrogram& c,
                                               int keep_source_rank);

/// Moving 2D median of the modulus with an odd (time_bins x quefrency_bins)
/// kernel; the neighborhood shrinks to the valid region at the edges. Throws
/// ConfigError on even kernel dimensions.
Cepstrogram estimate_background(const Cepstrogram& c, int time_bins, int quefrency_bins);

/// Strict 8-neighbor local maxima of |C| above gain * background. Quefrencies
/// at or below guard_quefrency (the ridge next to zero quefrency) and above
/// max_quefrency are excluded.
PeakList extract_peaks(const Cepstrogram& c, const Cepstrogram& background, double gain,
                       double guard_quefrency = 0.002,
                       double max_quefrency = std::numeric_limits<double>::infinity());

/// DBSCAN over (time/eps_time, quefrency/eps_quefrency) with unit radius.
/// min_pts counts the point itself. Labels are assigned in order of first
/// discovery so results are deterministic.
PeakList cluster_peaks(const PeakList& p, double eps_time, double eps_quefrency,
                       int min_pts);

/// Bins the retained (non-noise) peaks into consecutive scans of length
/// scan_time starting at start_time. Scan k covers [start_time + k*scan_time,
/// start_time + (k+1)*scan_time) and is emitted with 1-based index k+1 even
/// when empty; peaks outside [0, num_scans) are discarded.
std::vector<TdoaScan> scans_from_peaks(const PeakList& p, double scan_time,
                                       double start_time, int num_scans);

}  // namespace pfocal
