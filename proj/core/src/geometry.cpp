#include "pfocal/geometry.hpp"

#include <cmath>

namespace pfocal {

std::string_view path_name(Path path) {
    switch (path) {
        case Path::DirectPath: return "DP";
        case Path::BottomBounce: return "BB";
        case Path::BottomSurfaceBounce: return "BSB";
    }
    return "?";
}

std::string_view pair_name(int pair_index) {
    switch (pair_index) {
        case 0: return "DP-BB";
        case 1: return "DP-BSB";
        case 2: return "BB-BSB";
    }
    return "?";
}

double image_depth(Path path, const ReceiverState& receiver, const Environment& env) {
    const double h = receiver.depth;
    const double z = env.seafloor_depth;
    switch (path) {
        case Path::DirectPath: return h;
        case Path::BottomBounce: return 2.0 * z - h;
        case Path::BottomSurfaceBounce: return 2.0 * z + h;
    }
    return h;
}

double path_length(Path path, const SourceState& src, const ReceiverState& receiver,
                   const Environment& env) {
    const double dz = src.depth - image_depth(path, receiver, env);
    return std::hypot(dz, src.range);
}

double time_of_arrival(Path path, const SourceState& src, const ReceiverState& receiver,
                       const Environment& env) {
    return path_length(path, src, receiver, env) / env.sound_speed;
}

double predict_tdoa(const PathPair& pair, const SourceState& src,
                    const ReceiverState& receiver, const Environment& env) {
    const double t1 = time_of_arrival(pair.first, src, receiver, env);
    const double t2 = time_of_arrival(pair.second, src, receiver, env);
    return std::abs(t1 - t2);
}

double predict_tdoa(int pair_index, const SourceState& src,
                    const ReceiverState& receiver, const Environment& env) {
    return predict_tdoa(pair_at(pair_index), src, receiver, env);
}

namespace {

bool path_realizable(Path path, const SourceState& src, const ReceiverState& receiver,
                     const Environment& env) {
    const double z = env.seafloor_depth;
    const double h = receiver.depth;
    if (src.depth < 0.0 || src.depth > z) return false;
    if (h < 0.0 || h > z) return false;
    if (path != Path::DirectPath) {
        // Reflected paths need the receiver strictly inside the water column;
        // on a boundary the reflected ray folds onto another path.
        if (h <= 0.0 || h >= z) return false;
    }
    return true;
}

}  // namespace

bool feasible(const PathPair& pair, const SourceState& src,
              const ReceiverState& receiver, const Environment& env) {
    if (!path_realizable(pair.first, src, receiver, env)) return false;
    if (!path_realizable(pair.second, src, receiver, env)) return false;
    // Coinciding imaged depths make g_l identically zero at every range.
    const double ia = image_depth(pair.first, receiver, env);
    const double ib = image_depth(pair.second, receiver, env);
    return ia != ib;
}

bool feasible(int pair_index, const SourceState& src, const ReceiverState& receiver,
              const Environment& env) {
    return feasible(pair_at(pair_index), src, receiver, env);
}

}  // namespace pfocal
