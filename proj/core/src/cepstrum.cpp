#include "pfocal/cepstrum.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <queue>

#include <Eigen/SVD>

#include "fft.hpp"
#include "pfocal/errors.hpp"

namespace pfocal {

namespace {

std::vector<double> make_taper(int window_len, Taper taper) {
    std::vector<double> w(static_cast<std::size_t>(window_len), 1.0);
    if (taper == Taper::kHann) {
        for (int i = 0; i < window_len; ++i) {
            w[static_cast<std::size_t>(i)] =
                0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * i / window_len);
        }
    }
    return w;
}

}  // namespace

Spectrogram spectrogram(const WaveformSegment& w, int window_len, int hop,
                        Taper window_fn) {
    if (window_len < 2 || hop < 1) {
        throw ConfigError("spectrogram window_len must be >= 2 and hop >= 1");
    }
    const auto total = static_cast<long>(w.samples.size());
    if (total < window_len) {
        throw DataError("waveform segment shorter than one analysis window");
    }

    const int num_windows = 1 + static_cast<int>((total - window_len) / hop);
    const int num_bins = window_len / 2 + 1;
    const std::vector<double> taper = make_taper(window_len, window_fn);

    Spectrogram out;
    out.window_len = window_len;
    out.hop = hop;
    out.sample_rate = w.sample_rate;
    out.values.resize(num_bins, num_windows);
    out.freq_axis.resize(static_cast<std::size_t>(num_bins));
    for (int k = 0; k < num_bins; ++k) {
        out.freq_axis[static_cast<std::size_t>(k)] = k * w.sample_rate / window_len;
    }
    out.time_axis.resize(static_cast<std::size_t>(num_windows));

    std::vector<double> frame(static_cast<std::size_t>(window_len));
    for (int j = 0; j < num_windows; ++j) {
        const long start = static_cast<long>(j) * hop;
        for (int i = 0; i < window_len; ++i) {
            frame[static_cast<std::size_t>(i)] =
                w.samples[static_cast<std::size_t>(start + i)] *
                taper[static_cast<std::size_t>(i)];
        }
        const auto spectrum = fft::r2c(frame);
        for (int k = 0; k < num_bins; ++k) {
            out.values(k, j) = std::abs(spectrum[static_cast<std::size_t>(k)]);
        }
        out.time_axis[static_cast<std::size_t>(j)] =
            w.start_time + (start + 0.5 * window_len) / w.sample_rate;
    }
    return out;
}

Cepstrogram cepstrogram(const Spectrogram& s, double floor_db) {
    const int num_bins = static_cast<int>(s.values.rows());
    const int num_windows = static_cast<int>(s.values.cols());
    const int n = s.window_len;
    const double rel_floor = std::pow(10.0, floor_db / 20.0);

    Cepstrogram out;
    out.time_axis = s.time_axis;
    out.values.setZero(num_bins, num_windows);
    out.quefrency_axis.resize(static_cast<std::size_t>(num_bins));
    for (int k = 0; k < num_bins; ++k) {
        out.quefrency_axis[static_cast<std::size_t>(k)] = k / s.sample_rate;
    }

    std::vector<std::complex<double>> extended(static_cast<std::size_t>(n));
    for (int j = 0; j < num_windows; ++j) {
        const double peak = s.values.col(j).maxCoeff();
        if (peak <= 0.0) continue;  // silent window, leave the column at zero
        const double floor = peak * rel_floor;
        // Log power mirrored into an even sequence so the inverse transform
        // is real; index n - k folds back onto k.
        for (int k = 0; k < n; ++k) {
            const int folded = std::min(k, n - k);
            const double mag = std::max(s.values(folded, j), floor);
            extended[static_cast<std::size_t>(k)] = 2.0 * std::log(mag);
        }
        const auto cepstrum = fft::c2c_backward(extended);
        for (int k = 0; k < num_bins; ++k) {
            out.values(k, j) = cepstrum[static_cast<std::size_t>(k)].real() / n;
        }
    }
    return out;
}

std::pair<Cepstrogram, Cepstrogram> svd_filter(const Cepstrogram& c,
                                               int keep_source_rank) {
    const auto min_dim = std::min(c.values.rows(), c.values.cols());
    if (keep_source_rank < 1 || keep_source_rank >= min_dim) {
        throw ConfigError("svd rank must satisfy 1 <= rank < min(matrix dimensions)");
    }
    Eigen::BDCSVD<Eigen::MatrixXd> svd(c.values,
                                       Eigen::ComputeThinU | Eigen::ComputeThinV);
    const auto& u = svd.matrixU();
    const auto& v = svd.matrixV();
    const auto& sv = svd.singularValues();

    Cepstrogram source;
    source.quefrency_axis = c.quefrency_axis;
    source.time_axis = c.time_axis;
    source.values = u.leftCols(keep_source_rank) *
                    sv.head(keep_source_rank).asDiagonal() *
                    v.leftCols(keep_source_rank).transpose();

    Cepstrogram propagation;
    propagation.quefrency_axis = c.quefrency_axis;
    propagation.time_axis = c.time_axis;
    propagation.values = c.values - source.values;
    return {std::move(source), std::move(propagation)};
}

Cepstrogram estimate_background(const Cepstrogram& c, int time_bins, int quefrency_bins) {
    if (time_bins < 1 || quefrency_bins < 1 || time_bins % 2 == 0 ||
        quefrency_bins % 2 == 0) {
        throw ConfigError("background kernel dimensions must be odd and positive");
    }
    const int rows = static_cast<int>(c.values.rows());
    const int cols = static_cast<int>(c.values.cols());
    const int half_q = quefrency_bins / 2;
    const int half_t = time_bins / 2;

    Cepstrogram out;
    out.quefrency_axis = c.quefrency_axis;
    out.time_axis = c.time_axis;
    out.values.resize(rows, cols);

    std::vector<double> window;
    window.reserve(static_cast<std::size_t>(time_bins) * quefrency_bins);
    for (int j = 0; j < cols; ++j) {
        const int t0 = std::max(0, j - half_t);
        const int t1 = std::min(cols - 1, j + half_t);
        for (int i = 0; i < rows; ++i) {
            const int q0 = std::max(0, i - half_q);
            const int q1 = std::min(rows - 1, i + half_q);
            window.clear();
            for (int jj = t0; jj <= t1; ++jj) {
                for (int ii = q0; ii <= q1; ++ii) {
                    window.push_back(std::abs(c.values(ii, jj)));
                }
            }
            auto mid = window.begin() + static_cast<long>(window.size() / 2);
            std::nth_element(window.begin(), mid, window.end());
            double median = *mid;
            if (window.size() % 2 == 0) {
                // Even count: average the two central order statistics.
                median = 0.5 * (median + *std::max_element(window.begin(), mid));
            }
            out.values(i, j) = median;
        }
    }
    return out;
}

PeakList extract_peaks(const Cepstrogram& c, const Cepstrogram& background, double gain,
                       double guard_quefrency, double max_quefrency) {
    if (gain < 1.0) throw ConfigError("peak gain must be >= 1");
    if (c.values.rows() != background.values.rows() ||
        c.values.cols() != background.values.cols()) {
        throw ConfigError("cepstrogram and background dimensions differ");
    }
    const int rows = static_cast<int>(c.values.rows());
    const int cols = static_cast<int>(c.values.cols());

    PeakList out;
    for (int j = 0; j < cols; ++j) {
        for (int i = 0; i < rows; ++i) {
            const double q = c.quefrency_axis[static_cast<std::size_t>(i)];
            if (q <= guard_quefrency || q > max_quefrency) continue;
            const double value = std::abs(c.values(i, j));
            if (value <= gain * background.values(i, j)) continue;
            bool is_max = true;
            for (int dj = -1; dj <= 1 && is_max; ++dj) {
                for (int di = -1; di <= 1; ++di) {
                    if (di == 0 && dj == 0) continue;
                    const int ii = i + di;
                    const int jj = j + dj;
                    if (ii < 0 || ii >= rows || jj < 0 || jj >= cols) continue;
                    if (std::abs(c.values(ii, jj)) >= value) {
                        is_max = false;
                        break;
                    }
                }
            }
            if (!is_max) continue;
            out.peaks.push_back({c.time_axis[static_cast<std::size_t>(j)], q, value});
        }
    }
    return out;
}

PeakList cluster_peaks(const PeakList& p, double eps_time, double eps_quefrency,
                       int min_pts) {
    if (eps_time <= 0.0 || eps_quefrency <= 0.0 || min_pts < 1) {
        throw ConfigError("cluster parameters require eps > 0 and min_pts >= 1");
    }
    const std::size_t n = p.peaks.size();
    PeakList out;
    out.peaks = p.peaks;
    out.cluster_labels.assign(n, -1);

    const auto neighbors_of = [&](std::size_t i) {
        std::vector<std::size_t> nb;
        const double ti = p.peaks[i].time / eps_time;
        const double qi = p.peaks[i].quefrency / eps_quefrency;
        for (std::size_t j = 0; j < n; ++j) {
            const double dt = p.peaks[j].time / eps_time - ti;
            const double dq = p.peaks[j].quefrency / eps_quefrency - qi;
            if (dt * dt + dq * dq <= 1.0) nb.push_back(j);
        }
        return nb;
    };

    std::vector<char> visited(n, 0);
    int next_label = 0;
    for (std::size_t i = 0; i < n; ++i) {
        if (visited[i]) continue;
        visited[i] = 1;
        auto seeds = neighbors_of(i);
        if (static_cast<int>(seeds.size()) < min_pts) continue;  // noise for now

        const int label = next_label++;
        out.cluster_labels[i] = label;
        std::queue<std::size_t> frontier;
        for (std::size_t s : seeds) frontier.push(s);
        while (!frontier.empty()) {
            const std::size_t j = frontier.front();
            frontier.pop();
            if (out.cluster_labels[j] < 0) out.cluster_labels[j] = label;
            if (visited[j]) continue;
            visited[j] = 1;
            auto nb = neighbors_of(j);
            if (static_cast<int>(nb.size()) >= min_pts) {
                for (std::size_t s : nb) frontier.push(s);
            }
        }
    }
    return out;
}

std::vector<TdoaScan> scans_from_peaks(const PeakList& p, double scan_time,
                                       double start_time, int num_scans) {
    if (scan_time <= 0.0) throw ConfigError("scan_time must be > 0");
    std::vector<TdoaScan> scans(static_cast<std::size_t>(std::max(0, num_scans)));
    for (int k = 0; k < num_scans; ++k) {
        scans[static_cast<std::size_t>(k)].index = k + 1;
        scans[static_cast<std::size_t>(k)].timestamp = start_time + k * scan_time;
    }
    for (std::size_t i = 0; i < p.peaks.size(); ++i) {
        if (i < p.cluster_labels.size() && p.cluster_labels[i] < 0) continue;
        const double bin = std::floor((p.peaks[i].time - start_time) / scan_time);
        if (bin < 0.0 || bin >= static_cast<double>(num_scans)) continue;
        scans[static_cast<std::size_t>(bin)].tdoas.push_back(p.peaks[i].quefrency);
    }
    return scans;
}

}  // namespace pfocal
