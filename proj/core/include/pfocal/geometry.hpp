#pragma once

#include <array>
#include <string_view>

namespace pfocal {

/// Isovelocity shallow-water environment: flat seafloor, constant sound speed.
struct Environment {
    double seafloor_depth = 0.0;  ///< meters, > 0
    double sound_speed = 0.0;     ///< m/s, > 0
};

/// Mobile receiver at one scan. The receiver's horizontal position is the
/// coordinate origin, so source range is always relative to the receiver.
struct ReceiverState {
    double depth = 0.0;  ///< meters, within [0, seafloor_depth]
};

/// Source state at one scan: horizontal range, depth, and range speed.
struct SourceState {
    double range = 0.0;        ///< meters, >= 0
    double depth = 0.0;        ///< meters, within [0, seafloor_depth]
    double range_speed = 0.0;  ///< m/s
};

/// The three modeled propagation paths.
enum class Path : int {
    DirectPath = 0,
    BottomBounce = 1,
    BottomSurfaceBounce = 2,
};

inline constexpr int kNumPaths = 3;

/// Ordered pair of distinct paths that can generate a TDOA measurement.
struct PathPair {
    Path first;
    Path second;
};

/// Number of path pairs, K choose 2 with K = 3.
inline constexpr int kNumPairs = 3;

/// The fixed global pair ordering. Index 0: (DP,BB), 1: (DP,BSB), 2: (BB,BSB).
/// Config keys d1/d2/d3 and sigma1/2/3 refer to this order.
[[nodiscard]] constexpr PathPair pair_at(int pair_index) {
    constexpr std::array<PathPair, kNumPairs> pairs{{
        {Path::DirectPath, Path::BottomBounce},
        {Path::DirectPath, Path::BottomSurfaceBounce},
        {Path::BottomBounce, Path::BottomSurfaceBounce},
    }};
    return pairs[static_cast<std::size_t>(pair_index)];
}

[[nodiscard]] std::string_view path_name(Path path);
[[nodiscard]] std::string_view pair_name(int pair_index);

/// Imaged receiver depth of a path: DP -> h, BB -> 2z - h, BSB -> 2z + h.
[[nodiscard]] double image_depth(Path path, const ReceiverState& receiver,
                                 const Environment& env);

/// Straight-ray length to the imaged receiver depth,
/// q_k = sqrt((p2 - i_k(h))^2 + p1^2).
[[nodiscard]] double path_length(Path path, const SourceState& src,
                                 const ReceiverState& receiver,
                                 const Environment& env);

/// One-way travel time q_k / c.
[[nodiscard]] double time_of_arrival(Path path, const SourceState& src,
                                     const ReceiverState& receiver,
                                     const Environment& env);

/// Modeled TDOA of a pair: |t_first - t_second|, always >= 0.
[[nodiscard]] double predict_tdoa(const PathPair& pair, const SourceState& src,
                                  const ReceiverState& receiver,
                                  const Environment& env);
[[nodiscard]] double predict_tdoa(int pair_index, const SourceState& src,
                                  const ReceiverState& receiver,
                                  const Environment& env);

/// Whether both paths of the pair are geometrically realizable. Reflected
/// paths require the receiver strictly inside the water column; the source may
/// sit on either boundary. Pairs whose imaged depths coincide (e.g. DP/BB with
/// the receiver on the bottom) are degenerate: their TDOA is identically zero
/// at every range and indistinguishable from a single path, so they are
/// declared infeasible.
[[nodiscard]] bool feasible(const PathPair& pair, const SourceState& src,
                            const ReceiverState& receiver, const Environment& env);
[[nodiscard]] bool feasible(int pair_index, const SourceState& src,
                            const ReceiverState& receiver, const Environment& env);

}  // namespace pfocal
