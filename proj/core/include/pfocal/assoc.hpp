#pragma once

#include <array>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "pfocal/geometry.hpp"

namespace pfocal {

/// One scan's worth of TDOA measurements, order-scrambled and clutter-laden.
struct TdoaScan {
    int index = 1;          ///< time index n, 1-based
    double timestamp = 0.0; ///< seconds
    std::vector<double> tdoas;
};

/// Per-pair detection probabilities d_1..d_3. When position_dependent is set,
/// d_l is additionally masked by geometric feasibility at the evaluated state.
struct DetectionModel {
    std::array<double, kNumPairs> d{};
    bool position_dependent = true;

    /// Effective d_l(p): the configured probability, zeroed for infeasible
    /// pairs when the feasibility mask is enabled.
    [[nodiscard]] double probability(int pair_index, const SourceState& src,
                                     const ReceiverState& receiver,
                                     const Environment& env) const;
};

/// Poisson-count, uniform-value false-alarm model on [0, max_tdoa).
struct ClutterModel {
    double mean_count = 0.0;  ///< mu_FA >= 0
    double max_tdoa = 0.1;    ///< a_FA > 0, seconds

    [[nodiscard]] double pdf(double tdoa) const {
        return (tdoa >= 0.0 && tdoa < max_tdoa) ? 1.0 / max_tdoa : 0.0;
    }
};

/// Per-pair Gaussian measurement noise standard deviations, seconds.
struct NoiseModel {
    std::array<double, kNumPairs> sigma{};
};

/// The full measurement model with origin uncertainty.
struct MeasurementModel {
    DetectionModel detection;
    ClutterModel clutter;
    NoiseModel noise;
};

/// Association vector: entry l is the 1-based measurement index generated by
/// pair l, or 0 for a missed detection.
using AssociationVector = std::vector<int>;

/// Linear r-factors below this are reported as the floor instead of a flushed
/// zero, so that downstream products keep their ordering. Mathematically zero
/// factors (d_l = 0 on a detected branch) still return exactly 0.
inline constexpr double kRFactorFloor = 1e-300;

/// Scans larger than this are gated down before association enumeration.
inline constexpr int kMaxScanMeasurements = 20;

/// Gaussian single-measurement likelihood N(tdoa; g_l(p), sigma_l^2).
[[nodiscard]] double likelihood(int pair_index, double tdoa, const SourceState& src,
                                const ReceiverState& receiver, const Environment& env,
                                const NoiseModel& noise);

/// Validity indicator: 0 iff two distinct entries share a nonzero value.
[[nodiscard]] int psi(std::span<const int> assoc);

/// One factor of the association likelihood:
///   entry = 0:  1 - d_l(p)
///   entry = m:  d_l(p) * f_l(z_m | x) / (mu_FA * f_FA(z_m))
/// Throws ConfigError when a detected entry is evaluated with mu_FA = 0.
[[nodiscard]] double r_factor(int pair_index, int entry, const TdoaScan& scan,
                              const SourceState& src, const ReceiverState& receiver,
                              const Environment& env, const MeasurementModel& model);

/// All association vectors in {0..num_measurements}^num_pairs with psi = 1,
/// in lexicographic order.
[[nodiscard]] std::vector<AssociationVector> enumerate_valid(int num_pairs,
                                                             int num_measurements);

/// Closed-form count of valid vectors: sum_j C(L,j) * M!/(M-j)!.
[[nodiscard]] double count_valid(int num_pairs, int num_measurements);

/// Sum over all valid association vectors of the product of r-factors: the
/// per-state unnormalized scan likelihood with every detected factor taken
/// relative to the clutter density. Computed in the log domain internally.
/// Throws ConfigError when mu_FA = 0 and the scan is nonempty.
[[nodiscard]] double association_sum(const TdoaScan& scan, const SourceState& src,
                                     const ReceiverState& receiver, const Environment& env,
                                     const MeasurementModel& model);

/// log of association_sum; -inf when the sum is exactly zero.
[[nodiscard]] double association_log_sum(const TdoaScan& scan, const SourceState& src,
                                         const ReceiverState& receiver,
                                         const Environment& env,
                                         const MeasurementModel& model);

/// Exact association posterior: row l gives P(a_l = m | x, z) for
/// m = 0..M (column 0 is "missed"). Rows sum to 1. Throws ConfigError when
/// the association sum is zero.
[[nodiscard]] Eigen::MatrixXd association_marginals(const TdoaScan& scan,
                                                    const SourceState& src,
                                                    const ReceiverState& receiver,
                                                    const Environment& env,
                                                    const MeasurementModel& model);

/// Unnormalized log scan likelihood used for particle weighting. Differs from
/// log(association_sum) only by a state-independent constant when mu_FA > 0,
/// and remains well defined at mu_FA = 0, where association vectors must
/// account for every measurement (clutter cannot absorb leftovers).
[[nodiscard]] double scan_log_likelihood(const TdoaScan& scan, const SourceState& src,
                                         const ReceiverState& receiver,
                                         const Environment& env,
                                         const MeasurementModel& model);

/// Keeps the max_measurements entries closest to any TDOA predicted at the
/// reference state (ties broken by index), preserving original order.
/// Identity when the scan is already small enough.
[[nodiscard]] TdoaScan gate_scan(const TdoaScan& scan, const SourceState& reference,
                                 const ReceiverState& receiver, const Environment& env,
                                 int max_measurements = kMaxScanMeasurements);

}  // namespace pfocal
