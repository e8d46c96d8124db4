#include <doctest.h>

#include <unistd.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "pfocal/errors.hpp"
#include "pfocal/experiment.hpp"
#include "pfocal/io.hpp"

namespace {

using namespace pfocal;
namespace fs = std::filesystem;

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() /
               ("pfocal_exp_test_" + std::to_string(::getpid()) + "_" +
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

RunConfig small_config() {
    std::istringstream in(
        "scenario.n_scans = 8\n"
        "scenario.initial_range = 700\n"
        "run.trials = 2\n"
        "run.seed = 5\n"
        "filter.particles = 200\n"
        "detection.d1 = 0.9\n"
        "detection.d2 = 0.8\n"
        "detection.d3 = 0.7\n"
        "clutter.mean_count = 1\n"
        "prior.range_max = 2000\n");
    RunConfig cfg = parse_config(in, "inline");
    validate_config(cfg);
    return cfg;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

std::string first_line(const fs::path& p) {
    std::ifstream in(p);
    std::string line;
    std::getline(in, line);
    return line;
}

}  // namespace

TEST_SUITE("experiment") {

TEST_CASE("a synthetic run writes the full output set with finite metrics") {
    TempDir dir;
    const RunConfig cfg = small_config();
    const ExperimentResult result = run_experiment(cfg, dir.path);

    REQUIRE(result.trials.size() == 2);
    REQUIRE(result.metrics.scan_index.size() == 8);
    for (int n = 0; n < 8; ++n) {
        CHECK(result.metrics.scan_index[static_cast<std::size_t>(n)] == n + 1);
        CHECK(result.metrics.timestamp[static_cast<std::size_t>(n)] == 3.0 * n);
        CHECK(std::isfinite(result.metrics.mean_range[static_cast<std::size_t>(n)]));
        CHECK(std::isfinite(result.metrics.range_rmse[static_cast<std::size_t>(n)]));
        CHECK(result.metrics.mean_ess[static_cast<std::size_t>(n)] > 0.0);
    }
    for (const auto& trial : result.trials) {
        REQUIRE(trial.estimates.size() == 8);
        REQUIRE(trial.truth_range.size() == 8);
        for (double r : trial.truth_range) CHECK(std::isfinite(r));
    }

    CHECK(fs::exists(dir / "metrics.csv"));
    CHECK(fs::exists(dir / "trial_0001.csv"));
    CHECK(fs::exists(dir / "trial_0002.csv"));
    CHECK(fs::exists(dir / "tdoa_overlay.csv"));
    CHECK(fs::exists(dir / "rmse_vs_time.csv"));
    CHECK_FALSE(fs::exists(dir / "trial_0003.csv"));

    CHECK(first_line(dir / "metrics.csv") ==
          "scan_index,timestamp_s,mean_range_m,range_rmse_m,mean_ess,"
          "mean_measurements,divergence_count");
    CHECK(first_line(dir / "trial_0001.csv") ==
          "scan_index,timestamp_s,range_m,depth_m,speed_mps,ess,reinitialized,"
          "range_true_m");
    CHECK(first_line(dir / "tdoa_overlay.csv") == "scan_index,timestamp_s,series,value_s");
    CHECK(first_line(dir / "rmse_vs_time.csv") ==
          "scan_index,timestamp_s,range_rmse_m,mean_range_m");
}

TEST_CASE("identical configurations produce byte-identical outputs") {
    TempDir a, b, c;
    const RunConfig cfg = small_config();
    run_experiment(cfg, a.path, 1);
    run_experiment(cfg, b.path, 1);
    run_experiment(cfg, c.path, 2);

    for (const char* name :
         {"metrics.csv", "trial_0001.csv", "trial_0002.csv", "tdoa_overlay.csv",
          "rmse_vs_time.csv"}) {
        const std::string reference = slurp(a / name);
        CHECK_FALSE(reference.empty());
        CHECK(slurp(b / name) == reference);
        // Thread count must not leak into any output.
        CHECK(slurp(c / name) == reference);
    }

    RunConfig reseeded = small_config();
    reseeded.run.seed = 6;
    TempDir d;
    run_experiment(reseeded, d.path, 1);
    CHECK(slurp(d / "trial_0001.csv") != slurp(a / "trial_0001.csv"));
}

TEST_CASE("with a single trial the RMSE reduces to the absolute error") {
    TempDir dir;
    RunConfig cfg = small_config();
    cfg.run.trials = 1;
    const ExperimentResult result = run_experiment(cfg, dir.path);

    const auto& trial = result.trials[0];
    for (std::size_t n = 0; n < 8; ++n) {
        const double err = std::abs(trial.estimates[n].state.range - trial.truth_range[n]);
        CHECK(result.metrics.range_rmse[n] == doctest::Approx(err).epsilon(1e-12));
    }
}

TEST_CASE("ingest mode tracks recorded files and varies only filter noise") {
    TempDir data_dir;

    // Produce a recorded dataset from the simulator.
    const RunConfig sim_cfg = small_config();
    const Scenario sc = make_scenario(sim_cfg, 123);
    const GroundTruth gt = simulate_truth(sc);
    const auto scans = simulate_scans(gt, sc);
    write_measurements_csv(data_dir / "m.csv", scans);
    write_receiver_csv(data_dir / "r.csv", sc.receiver_depths, sc.motion.scan_time);
    write_truth_csv(data_dir / "t.csv", gt);

    RunConfig cfg = small_config();
    cfg.data.measurements = (data_dir / "m.csv").string();
    cfg.data.receiver = (data_dir / "r.csv").string();
    cfg.data.truth = (data_dir / "t.csv").string();

    TempDir out;
    const ExperimentResult result = run_experiment(cfg, out.path);
    REQUIRE(result.trials.size() == 2);
    for (const auto& trial : result.trials) {
        // Every trial sees the same recorded measurements.
        for (std::size_t n = 0; n < 8; ++n) {
            CHECK(trial.measurement_counts[n] == static_cast<int>(scans[n].tdoas.size()));
            CHECK(trial.truth_range[n] == gt.states[n].range);
        }
    }
    // Different filter seeds still give different estimates.
    CHECK(result.trials[0].estimates[7].state.range !=
          result.trials[1].estimates[7].state.range);

    // Without truth the error metrics are undefined but the run succeeds.
    RunConfig no_truth = cfg;
    no_truth.data.truth.clear();
    TempDir out2;
    const ExperimentResult blind = run_experiment(no_truth, out2.path);
    for (double rmse : blind.metrics.range_rmse) CHECK(std::isnan(rmse));

    // Ingest mode requires the receiver geometry.
    RunConfig broken = cfg;
    broken.data.receiver.clear();
    TempDir out3;
    CHECK_THROWS_AS(run_experiment(broken, out3.path), ConfigError);
}

}  // TEST_SUITE
