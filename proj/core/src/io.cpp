#include "pfocal/io.hpp"

#include <bit>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "pfocal/errors.hpp"

namespace pfocal {

namespace {

static_assert(std::endian::native == std::endian::little,
              "waveform files are little-endian float32; big-endian hosts need a swap");

std::ofstream open_out(const std::filesystem::path& path, std::ios::openmode mode) {
    std::ofstream out(path, mode);
    if (!out) throw DataError("cannot open '" + path.string() + "' for writing");
    return out;
}

std::ifstream open_in(const std::filesystem::path& path, std::ios::openmode mode) {
    std::ifstream in(path, mode);
    if (!in) throw DataError("cannot open '" + path.string() + "'");
    return in;
}

std::vector<std::string> split_fields(const std::string& line) {
    std::vector<std::string> fields;
    std::size_t begin = 0;
    while (true) {
        const std::size_t comma = line.find(',', begin);
        if (comma == std::string::npos) {
            fields.push_back(line.substr(begin));
            return fields;
        }
        fields.push_back(line.substr(begin, comma - begin));
        begin = comma + 1;
    }
}

double parse_double(const std::string& field, const std::string& where) {
    char* end = nullptr;
    const double x = std::strtod(field.c_str(), &end);
    if (field.empty() || end != field.c_str() + field.size()) {
        throw DataError(where + ": expected a number, got '" + field + "'");
    }
    return x;
}

int parse_index(const std::string& field, const std::string& where) {
    int x = 0;
    const auto [p, ec] = std::from_chars(field.data(), field.data() + field.size(), x);
    if (ec != std::errc() || p != field.data() + field.size()) {
        throw DataError(where + ": expected a scan index, got '" + field + "'");
    }
    return x;
}

/// Iterates data rows of a CSV, enforcing the header and column count and
/// reporting 1-based row numbers.
template <typename RowFn>
void for_each_row(const std::filesystem::path& path, const std::string& header,
                  std::size_t columns, RowFn&& fn) {
    std::ifstream in = open_in(path, std::ios::in);
    std::string line;
    if (!std::getline(in, line) || line != header) {
        throw DataError(path.string() + ": expected header '" + header + "'");
    }
    int row = 1;
    while (std::getline(in, line)) {
        ++row;
        if (line.empty()) continue;
        const std::string where = path.string() + ":" + std::to_string(row);
        const auto fields = split_fields(line);
        if (fields.size() != columns) {
            throw DataError(where + ": expected " + std::to_string(columns) +
                            " columns, got " + std::to_string(fields.size()));
        }
        fn(fields, where);
    }
}

bool timestamps_agree(double a, double b) {
    return std::abs(a - b) <= 1e-9 * std::max(1.0, std::max(std::abs(a), std::abs(b)));
}

}  // namespace

std::string format_double(double value) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", value);
    return buf;
}

void write_measurements_csv(const std::filesystem::path& path,
                            const std::vector<TdoaScan>& scans) {
    std::ofstream out = open_out(path, std::ios::out);
    out << "scan_index,timestamp_s,tdoa_s\n";
    for (const auto& scan : scans) {
        for (double tdoa : scan.tdoas) {
            out << scan.index << ',' << format_double(scan.timestamp) << ','
                << format_double(tdoa) << '\n';
        }
    }
}

void write_receiver_csv(const std::filesystem::path& path,
                        const std::vector<double>& depths, double scan_time) {
    std::ofstream out = open_out(path, std::ios::out);
    out << "scan_index,timestamp_s,depth_m\n";
    for (std::size_t n = 0; n < depths.size(); ++n) {
        out << (n + 1) << ',' << format_double(static_cast<double>(n) * scan_time) << ','
            << format_double(depths[n]) << '\n';
    }
}

void write_truth_csv(const std::filesystem::path& path, const GroundTruth& gt) {
    std::ofstream out = open_out(path, std::ios::out);
    out << "scan_index,range_m,depth_m,speed_mps\n";
    for (std::size_t n = 0; n < gt.states.size(); ++n) {
        const auto& s = gt.states[n];
        out << (n + 1) << ',' << format_double(s.range) << ',' << format_double(s.depth)
            << ',' << format_double(s.range_speed) << '\n';
    }
}

std::vector<SourceState> read_truth_csv(const std::filesystem::path& path) {
    std::vector<SourceState> states;
    for_each_row(path, "scan_index,range_m,depth_m,speed_mps", 4,
                 [&](const std::vector<std::string>& f, const std::string& where) {
                     const int index = parse_index(f[0], where);
                     if (index != static_cast<int>(states.size()) + 1) {
                         throw DataError(where + ": scan indices must run 1..N, got " +
                                         std::to_string(index));
                     }
                     states.push_back({parse_double(f[1], where),
                                       parse_double(f[2], where),
                                       parse_double(f[3], where)});
                 });
    return states;
}

void write_waveform_f32(const std::filesystem::path& path, const WaveformSegment& w) {
    std::ofstream out = open_out(path, std::ios::out | std::ios::binary);
    for (double sample : w.samples) {
        const auto s = static_cast<float>(sample);
        out.write(reinterpret_cast<const char*>(&s), sizeof(s));
    }
}

WaveformSegment read_waveform_f32(const std::filesystem::path& path, double sample_rate) {
    std::ifstream in = open_in(path, std::ios::in | std::ios::binary);
    in.seekg(0, std::ios::end);
    const auto bytes = static_cast<std::uint64_t>(in.tellg());
    in.seekg(0, std::ios::beg);
    if (bytes % sizeof(float) != 0) {
        throw DataError("'" + path.string() + "' is not a whole number of float32 samples");
    }
    std::vector<float> raw(bytes / sizeof(float));
    in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(bytes));
    if (!in) throw DataError("short read from '" + path.string() + "'");

    WaveformSegment w;
    w.sample_rate = sample_rate;
    w.start_time = 0.0;
    w.samples.assign(raw.begin(), raw.end());
    return w;
}

std::pair<std::vector<TdoaScan>, std::vector<ReceiverState>> ingest_scans(
    const std::filesystem::path& measurements_path,
    const std::filesystem::path& receiver_path) {
    std::vector<TdoaScan> scans;
    std::vector<ReceiverState> receivers;
    for_each_row(receiver_path, "scan_index,timestamp_s,depth_m", 3,
                 [&](const std::vector<std::string>& f, const std::string& where) {
                     const int index = parse_index(f[0], where);
                     if (index != static_cast<int>(scans.size()) + 1) {
                         throw DataError(where + ": scan indices must run 1..N, got " +
                                         std::to_string(index));
                     }
                     TdoaScan scan;
                     scan.index = index;
                     scan.timestamp = parse_double(f[1], where);
                     scans.push_back(std::move(scan));
                     receivers.push_back({parse_double(f[2], where)});
                 });
    if (scans.empty()) {
        throw DataError(receiver_path.string() + ": no scans defined");
    }

    for_each_row(
        measurements_path, "scan_index,timestamp_s,tdoa_s", 3,
        [&](const std::vector<std::string>& f, const std::string& where) {
            const int index = parse_index(f[0], where);
            if (index < 1 || index > static_cast<int>(scans.size())) {
                throw DataError(where + ": scan index " + std::to_string(index) +
                                " has no receiver row");
            }
            auto& scan = scans[static_cast<std::size_t>(index - 1)];
            const double timestamp = parse_double(f[1], where);
            if (!timestamps_agree(timestamp, scan.timestamp)) {
                throw DataError(where + ": timestamp " + format_double(timestamp) +
                                " disagrees with the receiver file's " +
                                format_double(scan.timestamp));
            }
            const double tdoa = parse_double(f[2], where);
            if (tdoa < 0.0) {
                throw DataError(where + ": negative TDOA " + format_double(tdoa));
            }
            scan.tdoas.push_back(tdoa);
        });
    return {std::move(scans), std::move(receivers)};
}

}  // namespace pfocal
