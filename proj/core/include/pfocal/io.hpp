#pragma once

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "pfocal/assoc.hpp"
#include "pfocal/cepstrum.hpp"
#include "pfocal/geometry.hpp"
#include "pfocal/sim.hpp"

namespace pfocal {

// CSV schemas, one header row each:
//   measurements: scan_index,timestamp_s,tdoa_s         (one row per measurement)
//   receiver:     scan_index,timestamp_s,depth_m        (one row per scan)
//   truth:        scan_index,range_m,depth_m,speed_mps  (one row per scan)
// The receiver file defines the scan set; scans without measurements simply
// have no measurement rows. Waveforms are raw little-endian float32 mono.

/// Round-trip-safe decimal rendering used by every CSV writer, so emitted
/// files re-ingest to bit-identical doubles.
std::string format_double(double value);

void write_measurements_csv(const std::filesystem::path& path,
                            const std::vector<TdoaScan>& scans);

void write_receiver_csv(const std::filesystem::path& path,
                        const std::vector<double>& depths, double scan_time);

void write_truth_csv(const std::filesystem::path& path, const GroundTruth& gt);

/// Reads a truth file back as per-scan states; indices must run 1..N.
std::vector<SourceState> read_truth_csv(const std::filesystem::path& path);

void write_waveform_f32(const std::filesystem::path& path, const WaveformSegment& w);

/// Raw samples carry no metadata, so the sample rate comes from the caller.
WaveformSegment read_waveform_f32(const std::filesystem::path& path, double sample_rate);

/// Parses and cross-checks a measurement/receiver file pair. The receiver
/// file defines scans 1..N; measurement rows attach by scan index and must
/// agree with the scan timestamp. Malformed rows, unknown scan indices,
/// mismatched timestamps, and negative TDOAs throw DataError naming the file
/// and row.
std::pair<std::vector<TdoaScan>, std::vector<ReceiverState>> ingest_scans(
    const std::filesystem::path& measurements_path,
    const std::filesystem::path& receiver_path);

}  // namespace pfocal
