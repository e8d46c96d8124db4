#include "pfocal/assoc.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

#include "pfocal/errors.hpp"

namespace pfocal {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double log_gaussian(double x, double mean, double sigma) {
    const double z = (x - mean) / sigma;
    return -0.5 * z * z - std::log(sigma) - 0.5 * std::log(2.0 * std::numbers::pi);
}

/// Depth-first walk over all psi-valid association vectors, carrying the
/// accumulated log term. miss[l] is the log missed-detection factor, det is
/// the row-major [L x M] table of log detected factors. Subtrees that are
/// already at -inf cannot contribute and are pruned.
template <typename Leaf>
void walk_terms(int num_pairs, int num_meas, int level, std::uint64_t used,
                double acc, int detections, const double* miss, const double* det,
                Leaf&& leaf) {
    if (level == num_pairs) {
        leaf(acc, detections);
        return;
    }
    if (miss[level] != kNegInf) {
        walk_terms(num_pairs, num_meas, level + 1, used, acc + miss[level],
                   detections, miss, det, leaf);
    }
    const double* row = det + static_cast<std::size_t>(level) * num_meas;
    for (int m = 1; m <= num_meas; ++m) {
        if (used & (1ULL << m)) continue;
        const double term = row[m - 1];
        if (term == kNegInf) continue;
        walk_terms(num_pairs, num_meas, level + 1, used | (1ULL << m), acc + term,
                   detections + 1, miss, det, leaf);
    }
}

/// Same walk but recording the full entry vector; used by the enumeration and
/// marginal operations where the assignments themselves matter.
template <typename Leaf>
void walk_vectors(int num_pairs, int num_meas, int level, std::uint64_t used,
                  int* entries, Leaf&& leaf) {
    if (level == num_pairs) {
        leaf(std::span<const int>(entries, static_cast<std::size_t>(num_pairs)));
        return;
    }
    entries[level] = 0;
    walk_vectors(num_pairs, num_meas, level + 1, used, entries, leaf);
    for (int m = 1; m <= num_meas; ++m) {
        if (used & (1ULL << m)) continue;
        entries[level] = m;
        walk_vectors(num_pairs, num_meas, level + 1, used | (1ULL << m), entries, leaf);
    }
}

struct LogTermTable {
    int num_meas = 0;
    bool require_full_coverage = false;
    std::array<double, kNumPairs> miss{};
    // Row-major [kNumPairs x M]; fits on the stack for gated scans.
    double det_stack[kNumPairs * kMaxScanMeasurements];
    std::vector<double> det_heap;
    double* det = nullptr;
};

/// Fills the per-(pair, measurement) log factor table. In the clutter-relative
/// normalization each detected factor is divided by mu_FA * f_FA; the raw form
/// keeps d_l * f_l and is what makes mu_FA = 0 well defined.
void fill_table(LogTermTable& table, const TdoaScan& scan, const SourceState& src,
                const ReceiverState& receiver, const Environment& env,
                const MeasurementModel& model, bool clutter_relative) {
    const int m_count = static_cast<int>(scan.tdoas.size());
    table.num_meas = m_count;
    if (m_count <= kMaxScanMeasurements) {
        table.det = table.det_stack;
    } else {
        table.det_heap.assign(static_cast<std::size_t>(kNumPairs) * m_count, kNegInf);
        table.det = table.det_heap.data();
    }

    // Nominal clutter density: the ratio always uses 1/a_FA so that the
    // factor stays finite even for a measurement outside the clutter support.
    const double log_clutter = clutter_relative
        ? std::log(model.clutter.mean_count) - std::log(model.clutter.max_tdoa)
        : 0.0;

    for (int l = 0; l < kNumPairs; ++l) {
        const double d = model.detection.probability(l, src, receiver, env);
        table.miss[l] = (d < 1.0) ? std::log1p(-d) : kNegInf;
        double* row = table.det + static_cast<std::size_t>(l) * m_count;
        if (d <= 0.0) {
            std::fill(row, row + m_count, kNegInf);
            continue;
        }
        const double predicted = predict_tdoa(l, src, receiver, env);
        const double sigma = model.noise.sigma[static_cast<std::size_t>(l)];
        const double log_d = std::log(d);
        for (int m = 0; m < m_count; ++m) {
            row[m] = log_d + log_gaussian(scan.tdoas[static_cast<std::size_t>(m)],
                                          predicted, sigma) - log_clutter;
        }
    }
}

/// Two-pass log-sum-exp over all valid vectors of the table's terms.
double log_sum_over_valid(const LogTermTable& table) {
    const int m_count = table.num_meas;
    double max_term = kNegInf;
    walk_terms(kNumPairs, m_count, 0, 0, 0.0, 0, table.miss.data(), table.det,
               [&](double term, int detections) {
                   if (table.require_full_coverage && detections != m_count) return;
                   if (term > max_term) max_term = term;
               });
    if (max_term == kNegInf) return kNegInf;
    double acc = 0.0;
    walk_terms(kNumPairs, m_count, 0, 0, 0.0, 0, table.miss.data(), table.det,
               [&](double term, int detections) {
                   if (table.require_full_coverage && detections != m_count) return;
                   // Terms 50+ nats below the max change nothing at double
                   // precision; skip the exp.
                   if (term > max_term - 50.0) acc += std::exp(term - max_term);
               });
    return max_term + std::log(acc);
}

void check_clutter_config(const TdoaScan& scan, const MeasurementModel& model) {
    if (model.clutter.mean_count <= 0.0 && !scan.tdoas.empty()) {
        throw ConfigError(
            "clutter.mean_count is 0 but the scan has measurements; the "
            "detected-branch factor divides by mu_FA * f_FA");
    }
}

}  // namespace

double DetectionModel::probability(int pair_index, const SourceState& src,
                                   const ReceiverState& receiver,
                                   const Environment& env) const {
    const double base = d[static_cast<std::size_t>(pair_index)];
    if (!position_dependent) return base;
    return feasible(pair_index, src, receiver, env) ? base : 0.0;
}

double likelihood(int pair_index, double tdoa, const SourceState& src,
                  const ReceiverState& receiver, const Environment& env,
                  const NoiseModel& noise) {
    const double predicted = predict_tdoa(pair_index, src, receiver, env);
    const double sigma = noise.sigma[static_cast<std::size_t>(pair_index)];
    return std::exp(log_gaussian(tdoa, predicted, sigma));
}

int psi(std::span<const int> assoc) {
    for (std::size_t i = 0; i < assoc.size(); ++i) {
        if (assoc[i] == 0) continue;
        for (std::size_t j = i + 1; j < assoc.size(); ++j) {
            if (assoc[i] == assoc[j]) return 0;
        }
    }
    return 1;
}

double r_factor(int pair_index, int entry, const TdoaScan& scan, const SourceState& src,
                const ReceiverState& receiver, const Environment& env,
                const MeasurementModel& model) {
    const int m_count = static_cast<int>(scan.tdoas.size());
    if (entry < 0 || entry > m_count) {
        throw std::out_of_range("association entry outside {0..M}");
    }
    const double d = model.detection.probability(pair_index, src, receiver, env);
    if (entry == 0) return 1.0 - d;
    if (model.clutter.mean_count <= 0.0) {
        throw ConfigError(
            "clutter.mean_count is 0 but association entry is a detection; "
            "inconsistent clutter configuration");
    }
    if (d <= 0.0) return 0.0;

    const double predicted = predict_tdoa(pair_index, src, receiver, env);
    const double sigma = model.noise.sigma[static_cast<std::size_t>(pair_index)];
    const double log_value =
        std::log(d) +
        log_gaussian(scan.tdoas[static_cast<std::size_t>(entry - 1)], predicted, sigma) -
        std::log(model.clutter.mean_count) + std::log(model.clutter.max_tdoa);
    const double value = std::exp(log_value);
    return (value > 0.0) ? value : kRFactorFloor;
}

std::vector<AssociationVector> enumerate_valid(int num_pairs, int num_measurements) {
    if (num_pairs < 1 || num_pairs > 12) {
        throw std::invalid_argument("enumerate_valid: num_pairs must be in [1, 12]");
    }
    if (num_measurements < 0 || num_measurements > 62) {
        throw std::invalid_argument("enumerate_valid: num_measurements must be in [0, 62]");
    }
    std::vector<AssociationVector> out;
    std::vector<int> entries(static_cast<std::size_t>(num_pairs), 0);
    walk_vectors(num_pairs, num_measurements, 0, 0, entries.data(),
                 [&](std::span<const int> a) {
                     out.emplace_back(a.begin(), a.end());
                 });
    return out;
}

double count_valid(int num_pairs, int num_measurements) {
    double total = 0.0;
    double choose = 1.0;  // C(L, j)
    double perm = 1.0;    // M! / (M - j)!
    for (int j = 0; j <= std::min(num_pairs, num_measurements); ++j) {
        if (j > 0) {
            choose *= static_cast<double>(num_pairs - j + 1) / j;
            perm *= static_cast<double>(num_measurements - j + 1);
        }
        total += choose * perm;
    }
    return total;
}

double association_log_sum(const TdoaScan& scan, const SourceState& src,
                           const ReceiverState& receiver, const Environment& env,
                           const MeasurementModel& model) {
    check_clutter_config(scan, model);
    LogTermTable table;
    fill_table(table, scan, src, receiver, env, model, /*clutter_relative=*/true);
    return log_sum_over_valid(table);
}

double association_sum(const TdoaScan& scan, const SourceState& src,
                       const ReceiverState& receiver, const Environment& env,
                       const MeasurementModel& model) {
    const double log_sum = association_log_sum(scan, src, receiver, env, model);
    return (log_sum == kNegInf) ? 0.0 : std::exp(log_sum);
}

Eigen::MatrixXd association_marginals(const TdoaScan& scan, const SourceState& src,
                                      const ReceiverState& receiver,
                                      const Environment& env,
                                      const MeasurementModel& model) {
    check_clutter_config(scan, model);
    const int m_count = static_cast<int>(scan.tdoas.size());

    LogTermTable table;
    fill_table(table, scan, src, receiver, env, model, /*clutter_relative=*/true);

    // Global shift so the per-entry accumulators share one scale.
    double max_term = kNegInf;
    std::vector<int> entries(kNumPairs, 0);
    walk_vectors(kNumPairs, m_count, 0, 0, entries.data(),
                 [&](std::span<const int> a) {
                     double term = 0.0;
                     for (int l = 0; l < kNumPairs; ++l) {
                         term += (a[static_cast<std::size_t>(l)] == 0)
                             ? table.miss[static_cast<std::size_t>(l)]
                             : table.det[static_cast<std::size_t>(l) * m_count +
                                         a[static_cast<std::size_t>(l)] - 1];
                     }
                     if (term > max_term) max_term = term;
                 });
    if (max_term == kNegInf) {
        throw ConfigError("association sum is zero; degenerate configuration");
    }

    Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(kNumPairs, m_count + 1);
    walk_vectors(kNumPairs, m_count, 0, 0, entries.data(),
                 [&](std::span<const int> a) {
                     double term = 0.0;
                     for (int l = 0; l < kNumPairs; ++l) {
                         term += (a[static_cast<std::size_t>(l)] == 0)
                             ? table.miss[static_cast<std::size_t>(l)]
                             : table.det[static_cast<std::size_t>(l) * m_count +
                                         a[static_cast<std::size_t>(l)] - 1];
                     }
                     if (term == kNegInf) return;
                     const double weight = std::exp(term - max_term);
                     for (int l = 0; l < kNumPairs; ++l) {
                         acc(l, a[static_cast<std::size_t>(l)]) += weight;
                     }
                 });
    for (int l = 0; l < kNumPairs; ++l) {
        const double row_sum = acc.row(l).sum();
        acc.row(l) /= row_sum;
    }
    return acc;
}

double scan_log_likelihood(const TdoaScan& scan, const SourceState& src,
                           const ReceiverState& receiver, const Environment& env,
                           const MeasurementModel& model) {
    LogTermTable table;
    const bool has_clutter = model.clutter.mean_count > 0.0;
    fill_table(table, scan, src, receiver, env, model,
               /*clutter_relative=*/has_clutter);
    table.require_full_coverage = !has_clutter && !scan.tdoas.empty();
    return log_sum_over_valid(table);
}

TdoaScan gate_scan(const TdoaScan& scan, const SourceState& reference,
                   const ReceiverState& receiver, const Environment& env,
                   int max_measurements) {
    const int m_count = static_cast<int>(scan.tdoas.size());
    if (m_count <= max_measurements) return scan;

    std::array<double, kNumPairs> predicted{};
    for (int l = 0; l < kNumPairs; ++l) {
        predicted[static_cast<std::size_t>(l)] = predict_tdoa(l, reference, receiver, env);
    }
    std::vector<std::pair<double, int>> ranked;
    ranked.reserve(static_cast<std::size_t>(m_count));
    for (int m = 0; m < m_count; ++m) {
        double dist = std::numeric_limits<double>::infinity();
        for (double g : predicted) {
            dist = std::min(dist, std::abs(scan.tdoas[static_cast<std::size_t>(m)] - g));
        }
        ranked.emplace_back(dist, m);
    }
    std::sort(ranked.begin(), ranked.end());
    ranked.resize(static_cast<std::size_t>(max_measurements));
    std::sort(ranked.begin(), ranked.end(),
              [](const auto& a, const auto& b) { return a.second < b.second; });

    TdoaScan gated;
    gated.index = scan.index;
    gated.timestamp = scan.timestamp;
    gated.tdoas.reserve(ranked.size());
    for (const auto& [dist, m] : ranked) {
        gated.tdoas.push_back(scan.tdoas[static_cast<std::size_t>(m)]);
    }
    return gated;
}

}  // namespace pfocal
