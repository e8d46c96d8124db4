#include <doctest.h>

#include <unistd.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "pfocal/errors.hpp"
#include "pfocal/io.hpp"

namespace {

using namespace pfocal;
namespace fs = std::filesystem;

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() /
               ("pfocal_io_test_" + std::to_string(::getpid()) + "_" +
                std::to_string(counter()++));
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    static int& counter() {
        static int n = 0;
        return n;
    }
    fs::path operator/(const std::string& name) const { return path / name; }
};

void write_text(const fs::path& p, const std::string& text) {
    std::ofstream out(p);
    out << text;
}

std::string expect_data_error(const fs::path& meas, const fs::path& rx) {
    try {
        ingest_scans(meas, rx);
    } catch (const DataError& e) {
        return e.what();
    }
    return "";
}

}  // namespace

TEST_SUITE("io") {

TEST_CASE("decimal rendering survives a round trip unchanged") {
    // strtod matches the reader's parser; stod would throw on the subnormal
    for (double v : {0.1, 1.0 / 3.0, 0.017793729660508642, -5e-324, 1e308, 0.0, -17.25}) {
        CHECK(std::strtod(format_double(v).c_str(), nullptr) == v);
    }
}

TEST_CASE("emitted measurement and receiver files re-ingest bit for bit") {
    TempDir dir;
    std::vector<TdoaScan> scans(3);
    scans[0] = {1, 0.0, {0.0177936, 0.059368390643547805}};
    scans[1] = {2, 3.0, {}};
    scans[2] = {3, 6.0, {1.0 / 3.0}};
    const std::vector<double> depths = {5.0, 5.7, 6.4};

    write_measurements_csv(dir / "m.csv", scans);
    write_receiver_csv(dir / "r.csv", depths, 3.0);

    const auto [in_scans, in_rx] = ingest_scans(dir / "m.csv", dir / "r.csv");
    REQUIRE(in_scans.size() == 3);
    REQUIRE(in_rx.size() == 3);
    for (std::size_t n = 0; n < 3; ++n) {
        CHECK(in_scans[n].index == scans[n].index);
        CHECK(in_scans[n].timestamp == scans[n].timestamp);
        CHECK(in_scans[n].tdoas == scans[n].tdoas);
        CHECK(in_rx[n].depth == depths[n]);
    }
}

TEST_CASE("truth files round-trip and enforce consecutive indices") {
    TempDir dir;
    GroundTruth gt;
    gt.states = {{500.0, 0.0, 3.0}, {509.0, 0.25, 3.0}};
    write_truth_csv(dir / "t.csv", gt);

    const auto states = read_truth_csv(dir / "t.csv");
    REQUIRE(states.size() == 2);
    CHECK(states[1].range == 509.0);
    CHECK(states[1].depth == 0.25);
    CHECK(states[1].range_speed == 3.0);

    write_text(dir / "bad.csv",
               "scan_index,range_m,depth_m,speed_mps\n1,500,0,3\n3,509,0,3\n");
    try {
        read_truth_csv(dir / "bad.csv");
        FAIL("expected DataError");
    } catch (const DataError& e) {
        CHECK(std::string(e.what()).find(":3") != std::string::npos);
        CHECK(std::string(e.what()).find("must run 1..N") != std::string::npos);
    }
}

TEST_CASE("waveform samples round-trip at float precision") {
    TempDir dir;
    WaveformSegment w;
    w.sample_rate = 8000.0;
    for (int i = 0; i < 1000; ++i) w.samples.push_back(std::sin(0.01 * i));
    write_waveform_f32(dir / "w.f32", w);

    const WaveformSegment back = read_waveform_f32(dir / "w.f32", 8000.0);
    REQUIRE(back.samples.size() == w.samples.size());
    CHECK(back.sample_rate == 8000.0);
    for (std::size_t i = 0; i < w.samples.size(); ++i) {
        CHECK(back.samples[i] == static_cast<double>(static_cast<float>(w.samples[i])));
    }

    write_text(dir / "ragged.f32", "12345");  // 5 bytes, not a float boundary
    CHECK_THROWS_AS(read_waveform_f32(dir / "ragged.f32", 8000.0), DataError);
    CHECK_THROWS_AS(read_waveform_f32(dir / "missing.f32", 8000.0), DataError);
}

TEST_CASE("ingest rejects malformed inputs with file and row") {
    TempDir dir;
    write_text(dir / "r.csv", "scan_index,timestamp_s,depth_m\n1,0,20\n2,3,20\n");

    write_text(dir / "wrong_header.csv", "scan,time,tdoa\n");
    CHECK(expect_data_error(dir / "wrong_header.csv", dir / "r.csv")
              .find("expected header") != std::string::npos);

    write_text(dir / "short_row.csv", "scan_index,timestamp_s,tdoa_s\n1,0\n");
    const std::string short_row = expect_data_error(dir / "short_row.csv", dir / "r.csv");
    CHECK(short_row.find(":2") != std::string::npos);
    CHECK(short_row.find("expected 3 columns, got 2") != std::string::npos);

    write_text(dir / "bad_value.csv", "scan_index,timestamp_s,tdoa_s\n1,0,soon\n");
    CHECK(expect_data_error(dir / "bad_value.csv", dir / "r.csv")
              .find("expected a number, got 'soon'") != std::string::npos);

    write_text(dir / "orphan.csv", "scan_index,timestamp_s,tdoa_s\n9,24,0.01\n");
    CHECK(expect_data_error(dir / "orphan.csv", dir / "r.csv")
              .find("scan index 9 has no receiver row") != std::string::npos);

    write_text(dir / "late.csv", "scan_index,timestamp_s,tdoa_s\n2,3.5,0.01\n");
    CHECK(expect_data_error(dir / "late.csv", dir / "r.csv").find("disagrees") !=
          std::string::npos);

    write_text(dir / "negative.csv", "scan_index,timestamp_s,tdoa_s\n1,0,-0.01\n");
    CHECK(expect_data_error(dir / "negative.csv", dir / "r.csv").find("negative TDOA") !=
          std::string::npos);

    write_text(dir / "empty_rx.csv", "scan_index,timestamp_s,depth_m\n");
    write_text(dir / "empty_m.csv", "scan_index,timestamp_s,tdoa_s\n");
    CHECK(expect_data_error(dir / "empty_m.csv", dir / "empty_rx.csv")
              .find("no scans defined") != std::string::npos);
}

TEST_CASE("scans without measurements stay present after ingest") {
    TempDir dir;
    write_text(dir / "r.csv",
               "scan_index,timestamp_s,depth_m\n1,0,20\n2,3,21\n3,6,22\n");
    write_text(dir / "m.csv", "scan_index,timestamp_s,tdoa_s\n2,3,0.044\n");

    const auto [scans, rx] = ingest_scans(dir / "m.csv", dir / "r.csv");
    REQUIRE(scans.size() == 3);
    CHECK(scans[0].tdoas.empty());
    CHECK(scans[1].tdoas == std::vector<double>{0.044});
    CHECK(scans[2].tdoas.empty());
    CHECK(rx[2].depth == 22.0);
}

}  // TEST_SUITE
