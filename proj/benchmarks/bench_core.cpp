// Microbenchmarks for the compute-heavy paths: exact association enumeration,
// one full particle filter cycle, and the cepstral transform chain. Run the
// pfocal_bench binary directly; these are not wired into ctest.

#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "pfocal/assoc.hpp"
#include "pfocal/cepstrum.hpp"
#include "pfocal/filter.hpp"
#include "pfocal/geometry.hpp"

namespace {

using namespace pfocal;

const Environment kEnv{65.0, 1508.0};
const ReceiverState kReceiver{20.0};
const SourceState kSource{500.0, 0.0, 1.0};

MeasurementModel nominal_model() {
    MeasurementModel model;
    model.detection.d = {0.5, 0.5, 0.5};
    model.clutter.mean_count = 4.0;
    model.clutter.max_tdoa = 0.1;
    model.noise.sigma = {1e-3, 1e-3, 1e-3};
    return model;
}

// A scan with the three true TDOAs followed by uniform clutter, padded or
// truncated to exactly num_measurements entries. Content barely affects cost;
// the enumeration over valid association vectors dominates.
TdoaScan make_scan(int num_measurements, std::mt19937_64& rng) {
    TdoaScan scan;
    scan.index = 1;
    std::uniform_real_distribution<double> clutter(0.0, 0.1);
    for (int l = 0; l < kNumPairs && l < num_measurements; ++l) {
        scan.tdoas.push_back(predict_tdoa(l, kSource, kReceiver, kEnv));
    }
    while (static_cast<int>(scan.tdoas.size()) < num_measurements) {
        scan.tdoas.push_back(clutter(rng));
    }
    return scan;
}

void AssociationSum(benchmark::State& state) {
    const int m = static_cast<int>(state.range(0));
    std::mt19937_64 rng(12345);
    const TdoaScan scan = make_scan(m, rng);
    const MeasurementModel model = nominal_model();
    for (auto _ : state) {
        benchmark::DoNotOptimize(association_sum(scan, kSource, kReceiver, kEnv, model));
    }
    state.counters["valid_vectors"] = count_valid(kNumPairs, m);
}
BENCHMARK(AssociationSum)->Arg(1)->Arg(2)->Arg(5)->Arg(10)->Arg(15)->Arg(20);

// One predict/update/resample/estimate cycle from a pristine prior cloud. The
// copy back to the prior cloud is excluded from the timed region.
void FilterStep(benchmark::State& state) {
    const int particles = static_cast<int>(state.range(0));
    std::mt19937_64 rng(999);
    const TdoaScan scan = make_scan(5, rng);
    const MeasurementModel model = nominal_model();
    const MotionModel motion;
    const FilterParams params;
    const Prior prior;
    const ParticleSet pristine = init_particles(prior, particles, 7);
    for (auto _ : state) {
        state.PauseTiming();
        ParticleSet ps = pristine;
        state.ResumeTiming();
        StepResult res = step(ps, scan, kReceiver, kEnv, model, motion, params, rng);
        benchmark::DoNotOptimize(res);
    }
    state.SetItemsProcessed(state.iterations() * particles);
}
BENCHMARK(FilterStep)->Arg(1000)->Arg(10000)->Arg(100000)->Unit(benchmark::kMillisecond);

// STFT plus per-window real cepstrum over white noise, the fixed per-segment
// cost of the front end before any peak work.
void CepstralTransform(benchmark::State& state) {
    const double seconds = static_cast<double>(state.range(0));
    WaveformSegment w;
    w.sample_rate = 8000.0;
    w.samples.resize(static_cast<std::size_t>(seconds * w.sample_rate));
    std::mt19937_64 rng(4242);
    std::normal_distribution<double> noise(0.0, 1.0);
    for (double& s : w.samples) s = noise(rng);
    for (auto _ : state) {
        Spectrogram spec = spectrogram(w, 8000, 4000);
        Cepstrogram ceps = cepstrogram(spec);
        benchmark::DoNotOptimize(ceps.values.data());
    }
    state.SetItemsProcessed(state.iterations() *
                            static_cast<std::int64_t>(w.samples.size()));
}
BENCHMARK(CepstralTransform)->Arg(6)->Arg(30)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
