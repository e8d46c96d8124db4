// Command-line front end: simulate synthetic datasets, extract TDOA
// measurements from waveforms, run Monte Carlo tracking experiments, and
// summarize finished runs.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "pfocal/config.hpp"
#include "pfocal/errors.hpp"
#include "pfocal/experiment.hpp"
#include "pfocal/io.hpp"
#include "pfocal/rng.hpp"

namespace fs = std::filesystem;

namespace {

struct CommonArgs {
    std::string config;
    std::string out;
    std::optional<std::uint64_t> seed;
};

void add_common(CLI::App* cmd, CommonArgs& args, bool out_required = true) {
    cmd->add_option("--config", args.config, "run configuration file")
        ->required();
    auto* out = cmd->add_option("--out", args.out, "output directory");
    if (out_required) out->required();
    cmd->add_option("--seed", args.seed, "override run.seed from the config");
}

pfocal::RunConfig load(const CommonArgs& args) {
    pfocal::RunConfig cfg = pfocal::load_config(args.config);
    if (args.seed) {
        cfg.run.seed = *args.seed;
    }
    return cfg;
}

int count_measurements(const std::vector<pfocal::TdoaScan>& scans) {
    int total = 0;
    for (const auto& s : scans) total += static_cast<int>(s.tdoas.size());
    return total;
}

int cmd_simulate(const CommonArgs& args) {
    const pfocal::RunConfig cfg = load(args);
    fs::create_directories(args.out);

    const pfocal::Scenario sc = pfocal::make_scenario(
        cfg, pfocal::rng::mix(cfg.run.seed, {pfocal::rng::kScenarioStream}));
    const pfocal::GroundTruth gt = pfocal::simulate_truth(sc);
    const auto scans = pfocal::simulate_scans(gt, sc);

    const fs::path out(args.out);
    pfocal::write_receiver_csv(out / "receiver.csv", sc.receiver_depths,
                               cfg.motion.scan_time);
    pfocal::write_truth_csv(out / "truth.csv", gt);
    pfocal::write_measurements_csv(out / "measurements.csv", scans);
    if (cfg.waveform.enabled) {
        const pfocal::WaveformSegment w = pfocal::synthesize_waveform(
            gt, sc, cfg.waveform.sample_rate,
            {cfg.waveform.band_low, cfg.waveform.band_high}, cfg.waveform.snr_db);
        pfocal::write_waveform_f32(out / "waveform.f32", w);
    }
    std::cout << "simulate: " << scans.size() << " scans, " << count_measurements(scans)
              << " measurements -> " << args.out << '\n';
    return 0;
}

int cmd_extract(const CommonArgs& args, const std::string& waveform_flag) {
    const pfocal::RunConfig cfg = load(args);
    const std::string waveform_path =
        waveform_flag.empty() ? cfg.data.waveform : waveform_flag;
    if (waveform_path.empty()) {
        throw pfocal::ConfigError("extract needs data.waveform or --waveform");
    }
    fs::create_directories(args.out);

    const auto& cep = cfg.cepstrum;
    const pfocal::WaveformSegment w =
        pfocal::read_waveform_f32(waveform_path, cfg.waveform.sample_rate);
    int window = static_cast<int>(std::llround(cep.window_seconds * w.sample_rate));
    window -= window % 2;  // even length keeps the mirrored spectrum exact
    const int hop = std::max(
        1, static_cast<int>(std::llround(window * (1.0 - cep.overlap))));

    const pfocal::Spectrogram spec = pfocal::spectrogram(w, window, hop);
    pfocal::Cepstrogram ceps = pfocal::cepstrogram(spec, cep.floor_db);
    if (cep.svd_rank > 0) {
        // The low-rank source term holds what is common to all windows; the
        // residual carries the path-delay tracks we are after.
        ceps = pfocal::svd_filter(ceps, cep.svd_rank).second;
    }
    const pfocal::Cepstrogram background = pfocal::estimate_background(
        ceps, cep.background_time_bins, cep.background_quefrency_bins);
    const pfocal::PeakList raw = pfocal::extract_peaks(
        ceps, background, cep.peak_gain, cep.guard_quefrency, cep.max_quefrency);
    const pfocal::PeakList labeled = pfocal::cluster_peaks(
        raw, cep.cluster_eps_time, cep.cluster_eps_quefrency, cep.cluster_min_pts);

    const double duration =
        static_cast<double>(w.samples.size()) / w.sample_rate;
    const int n_scans = std::max(
        1, static_cast<int>(std::ceil(duration / cfg.motion.scan_time - 1e-9)));
    const auto scans = pfocal::scans_from_peaks(labeled, cfg.motion.scan_time,
                                                w.start_time, n_scans);

    const fs::path out(args.out);
    pfocal::write_measurements_csv(out / "measurements.csv", scans);
    {
        std::ofstream peaks_csv(out / "peaks.csv");
        peaks_csv << "time_s,quefrency_s,amplitude,cluster\n";
        for (std::size_t i = 0; i < labeled.peaks.size(); ++i) {
            const auto& p = labeled.peaks[i];
            peaks_csv << pfocal::format_double(p.time) << ','
                      << pfocal::format_double(p.quefrency) << ','
                      << pfocal::format_double(p.amplitude) << ','
                      << labeled.cluster_labels[i] << '\n';
        }
    }
    std::cout << "extract: " << labeled.peaks.size() << " peaks, "
              << count_measurements(scans) << " retained measurements over "
              << n_scans << " scans -> " << args.out << '\n';
    return 0;
}

int cmd_track(const CommonArgs& args, int jobs) {
    const pfocal::RunConfig cfg = load(args);
    const pfocal::ExperimentResult result =
        pfocal::run_experiment(cfg, args.out, jobs);

    const double fraction = static_cast<double>(result.diverged_trials) /
                            static_cast<double>(cfg.run.trials);
    std::cout << "track: " << cfg.run.trials << " trials, " << result.diverged_trials
              << " diverged (" << fraction * 100.0 << "%) -> " << args.out << '\n';
    return fraction > cfg.run.divergence_exit_fraction ? 4 : 0;
}

std::vector<std::vector<std::string>> read_csv_rows(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw pfocal::DataError("cannot open '" + path.string() + "'");
    std::vector<std::vector<std::string>> rows;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<std::string> fields;
        std::size_t begin = 0;
        while (true) {
            const std::size_t comma = line.find(',', begin);
            if (comma == std::string::npos) {
                fields.push_back(line.substr(begin));
                break;
            }
            fields.push_back(line.substr(begin, comma - begin));
            begin = comma + 1;
        }
        rows.push_back(std::move(fields));
    }
    return rows;
}

int cmd_report(const CommonArgs& args, const std::string& run_dir) {
    const pfocal::RunConfig cfg = load(args);
    const fs::path dir(run_dir);
    const auto rows = read_csv_rows(dir / "metrics.csv");
    if (rows.size() < 2) throw pfocal::DataError("metrics.csv has no data rows");

    double rmse_sum = 0.0;
    int rmse_count = 0;
    double final_rmse = std::numeric_limits<double>::quiet_NaN();
    double ess_sum = 0.0;
    int divergence_events = 0;
    for (std::size_t i = 1; i < rows.size(); ++i) {
        const double rmse = std::strtod(rows[i][3].c_str(), nullptr);
        if (!std::isnan(rmse)) {
            rmse_sum += rmse;
            ++rmse_count;
            final_rmse = rmse;
        }
        ess_sum += std::strtod(rows[i][4].c_str(), nullptr);
        divergence_events += std::atoi(rows[i][6].c_str());
    }

    int diverged_trials = 0;
    int trial_files = 0;
    std::vector<fs::path> trial_paths;
    for (const auto& entry : fs::directory_iterator(dir)) {
        const std::string name = entry.path().filename().string();
        if (name.rfind("trial_", 0) == 0 && entry.path().extension() == ".csv") {
            trial_paths.push_back(entry.path());
        }
    }
    std::sort(trial_paths.begin(), trial_paths.end());
    for (const auto& path : trial_paths) {
        ++trial_files;
        bool diverged = false;
        for (const auto& row : read_csv_rows(path)) {
            if (row.size() >= 7 && row[6] == "1") diverged = true;
        }
        if (diverged) ++diverged_trials;
    }

    std::ostringstream summary;
    const auto n_scans = rows.size() - 1;
    summary << "scans=" << n_scans << '\n'
            << "trials=" << trial_files << '\n'
            << "mean_range_rmse_m="
            << (rmse_count > 0 ? rmse_sum / rmse_count
                               : std::numeric_limits<double>::quiet_NaN())
            << '\n'
            << "final_range_rmse_m=" << final_rmse << '\n'
            << "mean_ess=" << ess_sum / static_cast<double>(n_scans) << '\n'
            << "divergence_events=" << divergence_events << '\n'
            << "diverged_trials=" << diverged_trials << '\n'
            << "divergence_exit_fraction=" << cfg.run.divergence_exit_fraction << '\n';
    std::cout << summary.str();
    if (!args.out.empty()) {
        fs::create_directories(args.out);
        std::ofstream out(fs::path(args.out) / "summary.txt");
        out << summary.str();
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"single-receiver underwater acoustic localization toolkit"};
    app.require_subcommand(1);

    CommonArgs sim_args;
    auto* simulate = app.add_subcommand(
        "simulate", "generate a synthetic dataset (scans, truth, optional audio)");
    add_common(simulate, sim_args);

    CommonArgs extract_args;
    std::string waveform_flag;
    auto* extract = app.add_subcommand(
        "extract", "run the cepstrum pipeline on a waveform and emit measurements");
    add_common(extract, extract_args);
    extract->add_option("--waveform", waveform_flag,
                        "waveform file (overrides data.waveform)");

    CommonArgs track_args;
    int jobs = 1;
    auto* track = app.add_subcommand(
        "track", "run the Monte Carlo tracking experiment and write metrics");
    add_common(track, track_args);
    track->add_option("--jobs", jobs, "worker threads for trials")
        ->check(CLI::PositiveNumber);

    CommonArgs report_args;
    std::string run_dir;
    auto* report = app.add_subcommand(
        "report", "summarize a finished tracking run directory");
    add_common(report, report_args, /*out_required=*/false);
    report->add_option("--run", run_dir, "directory written by the track verb")
        ->required();

    try {
        app.parse(argc, argv);
        if (simulate->parsed()) return cmd_simulate(sim_args);
        if (extract->parsed()) return cmd_extract(extract_args, waveform_flag);
        if (track->parsed()) return cmd_track(track_args, jobs);
        if (report->parsed()) return cmd_report(report_args, run_dir);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    } catch (const pfocal::ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 2;
    } catch (const pfocal::DataError& e) {
        std::cerr << "data error: " << e.what() << '\n';
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
