#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <set>
#include <vector>

#include "pfocal/assoc.hpp"
#include "pfocal/errors.hpp"
#include "pfocal/geometry.hpp"

namespace {

using namespace pfocal;

double gauss(double x, double mean, double sigma) {
    const double t = (x - mean) / sigma;
    return std::exp(-0.5 * t * t) / (std::sqrt(2.0 * std::numbers::pi) * sigma);
}

// Direct evaluation of the association likelihood: enumerate every valid
// assignment vector and accumulate the product of factors in extended
// precision. Written from the model definition, not from the library's
// log-domain machinery, so the two can disagree if either is wrong.
long double naive_association_sum(const TdoaScan& scan, const SourceState& src,
                                  const ReceiverState& rx, const Environment& env,
                                  const MeasurementModel& model) {
    const auto vectors = enumerate_valid(kNumPairs, static_cast<int>(scan.tdoas.size()));
    long double total = 0.0L;
    for (const auto& a : vectors) {
        long double term = 1.0L;
        for (int l = 0; l < kNumPairs; ++l) {
            const double d = model.detection.probability(l, src, rx, env);
            if (a[static_cast<std::size_t>(l)] == 0) {
                term *= static_cast<long double>(1.0 - d);
            } else {
                const double z = scan.tdoas[static_cast<std::size_t>(a[static_cast<std::size_t>(l)] - 1)];
                const double g = predict_tdoa(l, src, rx, env);
                const double f = gauss(z, g, model.noise.sigma[static_cast<std::size_t>(l)]);
                term *= static_cast<long double>(
                    d * f / (model.clutter.mean_count * (1.0 / model.clutter.max_tdoa)));
            }
        }
        total += term;
    }
    return total;
}

MeasurementModel default_model() {
    MeasurementModel m;
    m.detection = DetectionModel{{0.12, 0.08, 0.06}, true};
    m.clutter = ClutterModel{4.0, 0.1};
    m.noise = NoiseModel{{5e-4, 5e-4, 5e-4}};
    return m;
}

}  // namespace

TEST_SUITE("association") {

TEST_CASE("validity indicator rejects shared measurement indices") {
    CHECK(psi(std::vector<int>{0, 0, 0}) == 1);
    CHECK(psi(std::vector<int>{1, 0, 2}) == 1);
    CHECK(psi(std::vector<int>{3, 2, 1}) == 1);
    CHECK(psi(std::vector<int>{1, 1, 0}) == 0);
    CHECK(psi(std::vector<int>{2, 2, 2}) == 0);
    CHECK(psi(std::vector<int>{0, 3, 3}) == 0);
}

TEST_CASE("valid vector enumeration is exact, ordered, and counted") {
    const std::vector<int> expected_l3 = {1, 4, 13, 34, 73, 136, 229, 358, 529};
    for (int m = 0; m <= 8; ++m) {
        const auto vecs = enumerate_valid(3, m);
        CHECK(static_cast<int>(vecs.size()) == expected_l3[static_cast<std::size_t>(m)]);
        CHECK(count_valid(3, m) == static_cast<double>(vecs.size()));

        std::set<AssociationVector> unique(vecs.begin(), vecs.end());
        CHECK(unique.size() == vecs.size());
        CHECK(std::is_sorted(vecs.begin(), vecs.end()));
        for (const auto& a : vecs) CHECK(psi(a) == 1);
    }
    CHECK(enumerate_valid(2, 1).size() == 3);
    CHECK(enumerate_valid(4, 6).size() == 1045);
    CHECK(count_valid(4, 6) == 1045.0);

    CHECK_THROWS_AS((void)enumerate_valid(0, 3), std::invalid_argument);
    CHECK_THROWS_AS((void)enumerate_valid(13, 3), std::invalid_argument);
    CHECK_THROWS_AS((void)enumerate_valid(3, -1), std::invalid_argument);
    CHECK_THROWS_AS((void)enumerate_valid(3, 63), std::invalid_argument);
}

TEST_CASE("single-measurement likelihood peaks at the predicted TDOA") {
    const Environment env{65.0, 1508.0};
    const ReceiverState rx{40.0};
    const SourceState src{100.0, 0.0, 0.0};
    NoiseModel noise{{5e-4, 5e-4, 5e-4}};

    const double g1 = predict_tdoa(0, src, rx, env);
    CHECK(likelihood(0, g1, src, rx, env, noise) ==
          doctest::Approx(797.8845608028655).epsilon(1e-14));
    CHECK(likelihood(0, g1 + 3e-4, src, rx, env, noise) ==
          doctest::Approx(likelihood(0, g1 - 3e-4, src, rx, env, noise)).epsilon(1e-14));
    CHECK(likelihood(0, g1 + 5e-4, src, rx, env, noise) <
          likelihood(0, g1, src, rx, env, noise));
}

TEST_CASE("detection probability honors the feasibility mask") {
    const Environment env{65.0, 1508.0};
    const SourceState src{500.0, 10.0, 0.0};
    DetectionModel det{{0.3, 0.2, 0.1}, true};

    CHECK(det.probability(0, src, ReceiverState{20.0}, env) == 0.3);
    CHECK(det.probability(0, src, ReceiverState{0.0}, env) == 0.0);

    det.position_dependent = false;
    CHECK(det.probability(0, src, ReceiverState{0.0}, env) == 0.3);
}

TEST_CASE("association factor: worked values, bounds, and the underflow floor") {
    const Environment env{65.0, 1508.0};
    const ReceiverState rx{40.0};
    const SourceState src{100.0, 0.0, 0.0};
    MeasurementModel model = default_model();

    TdoaScan scan;
    scan.tdoas = {0.0178};

    CHECK(r_factor(0, 0, scan, src, rx, env, model) == doctest::Approx(0.88).epsilon(1e-15));
    CHECK(r_factor(0, 1, scan, src, rx, env, model) ==
          doctest::Approx(2.393465466491926).epsilon(1e-12));

    CHECK_THROWS_AS((void)r_factor(0, 2, scan, src, rx, env, model), std::out_of_range);
    CHECK_THROWS_AS((void)r_factor(0, -1, scan, src, rx, env, model), std::out_of_range);

    MeasurementModel no_clutter = model;
    no_clutter.clutter.mean_count = 0.0;
    CHECK_THROWS_AS((void)r_factor(0, 1, scan, src, rx, env, no_clutter), ConfigError);

    // A measurement many noise widths from the prediction underflows in
    // linear arithmetic; the factor reports the floor instead of zero.
    TdoaScan far_scan;
    far_scan.tdoas = {0.09};
    CHECK(r_factor(0, 1, far_scan, src, rx, env, model) == kRFactorFloor);

    // A structurally impossible detection (d = 0) is exactly zero, not floored.
    MeasurementModel dead = model;
    dead.detection.d[0] = 0.0;
    CHECK(r_factor(0, 1, scan, src, rx, env, dead) == 0.0);
}

TEST_CASE("association sum matches brute-force enumeration") {
    const Environment env{65.0, 1508.0};
    std::mt19937_64 rng(42);
    std::uniform_real_distribution<double> u(0.0, 1.0);

    for (int trial = 0; trial < 200; ++trial) {
        const SourceState src{100.0 + 2900.0 * u(rng), 65.0 * u(rng), 0.0};
        const ReceiverState rx{1.0 + 63.0 * u(rng)};

        MeasurementModel model;
        for (int l = 0; l < kNumPairs; ++l) {
            model.detection.d[static_cast<std::size_t>(l)] = 0.05 + 0.9 * u(rng);
            model.noise.sigma[static_cast<std::size_t>(l)] = 1e-4 + 9e-4 * u(rng);
        }
        model.detection.position_dependent = (trial % 2 == 0);
        model.clutter = ClutterModel{0.5 + 5.5 * u(rng), 0.1};

        TdoaScan scan;
        scan.index = trial + 1;
        const int m_count = trial % 7;
        for (int m = 0; m < m_count; ++m) {
            if (u(rng) < 0.5) {
                const int l = static_cast<int>(3.0 * u(rng)) % 3;
                const double g = predict_tdoa(l, src, rx, env);
                scan.tdoas.push_back(std::abs(
                    g + model.noise.sigma[static_cast<std::size_t>(l)] * (2.0 * u(rng) - 1.0)));
            } else {
                scan.tdoas.push_back(0.1 * u(rng));
            }
        }

        const long double expected = naive_association_sum(scan, src, rx, env, model);
        const double got = association_sum(scan, src, rx, env, model);
        CHECK(got == doctest::Approx(static_cast<double>(expected)).epsilon(1e-12));
        if (expected > 0.0L) {
            CHECK(association_log_sum(scan, src, rx, env, model) ==
                  doctest::Approx(static_cast<double>(std::log(expected))).epsilon(1e-12));
        }
    }
}

TEST_CASE("association marginals match the brute-force posterior") {
    const Environment env{65.0, 1508.0};
    const ReceiverState rx{25.0};
    const SourceState src{800.0, 5.0, 0.0};
    MeasurementModel model = default_model();
    model.detection.d = {0.6, 0.5, 0.4};

    TdoaScan scan;
    scan.tdoas = {predict_tdoa(0, src, rx, env) + 2e-4, 0.03,
                  predict_tdoa(2, src, rx, env) - 1e-4};
    const int m_count = static_cast<int>(scan.tdoas.size());

    const Eigen::MatrixXd marg = association_marginals(scan, src, rx, env, model);
    REQUIRE(marg.rows() == kNumPairs);
    REQUIRE(marg.cols() == m_count + 1);

    const auto vectors = enumerate_valid(kNumPairs, m_count);
    for (int l = 0; l < kNumPairs; ++l) {
        for (int m = 0; m <= m_count; ++m) {
            long double num = 0.0L, den = 0.0L;
            for (const auto& a : vectors) {
                long double term = 1.0L;
                for (int k = 0; k < kNumPairs; ++k)
                    term *= static_cast<long double>(
                        r_factor(k, a[static_cast<std::size_t>(k)], scan, src, rx, env, model));
                den += term;
                if (a[static_cast<std::size_t>(l)] == m) num += term;
            }
            CHECK(marg(l, m) == doctest::Approx(static_cast<double>(num / den)).epsilon(1e-10));
        }
        CHECK(marg.row(l).sum() == doctest::Approx(1.0).epsilon(1e-12));
    }
}

TEST_CASE("zero clutter rate: association sum refuses, raw likelihood covers") {
    const Environment env{65.0, 1508.0};
    const ReceiverState rx{20.0};
    const SourceState src{600.0, 0.0, 0.0};
    MeasurementModel model = default_model();
    model.clutter.mean_count = 0.0;
    model.detection.d = {0.9, 0.9, 0.9};

    TdoaScan empty;
    empty.index = 1;
    // No measurements: nothing needs a clutter explanation.
    CHECK(association_sum(empty, src, rx, env, model) ==
          doctest::Approx(0.1 * 0.1 * 0.1).epsilon(1e-12));
    CHECK(scan_log_likelihood(empty, src, rx, env, model) ==
          doctest::Approx(3.0 * std::log(0.1)).epsilon(1e-12));

    TdoaScan full;
    full.index = 2;
    for (int l = 0; l < kNumPairs; ++l)
        full.tdoas.push_back(predict_tdoa(l, src, rx, env));
    CHECK_THROWS_AS((void)association_sum(full, src, rx, env, model), ConfigError);
    CHECK(std::isfinite(scan_log_likelihood(full, src, rx, env, model)));

    // Four measurements cannot all be explained by three pairs without
    // clutter, so the raw likelihood vanishes.
    TdoaScan overfull = full;
    overfull.tdoas.push_back(0.05);
    CHECK(scan_log_likelihood(overfull, src, rx, env, model) ==
          -std::numeric_limits<double>::infinity());
}

TEST_CASE("scan log likelihood differs from the normalized sum by a constant") {
    const Environment env{65.0, 1508.0};
    const ReceiverState rx{30.0};
    MeasurementModel model = default_model();

    TdoaScan scan;
    scan.tdoas = {0.012, 0.031, 0.044};

    const SourceState a{400.0, 10.0, 0.0};
    const SourceState b{1800.0, 40.0, 0.0};
    const double offset_a =
        scan_log_likelihood(scan, a, rx, env, model) - association_log_sum(scan, a, rx, env, model);
    const double offset_b =
        scan_log_likelihood(scan, b, rx, env, model) - association_log_sum(scan, b, rx, env, model);
    CHECK(offset_a == doctest::Approx(offset_b).epsilon(1e-9));
}

TEST_CASE("gating keeps the closest measurements in original order") {
    const Environment env{65.0, 1508.0};
    const ReceiverState rx{20.0};
    const SourceState src{500.0, 0.0, 0.0};

    TdoaScan scan;
    scan.index = 7;
    scan.timestamp = 18.0;
    const double g1 = predict_tdoa(0, src, rx, env);
    // Three on-track values buried among eight far-away ones.
    scan.tdoas = {0.09, g1 + 1e-4, 0.081, 0.082, g1 - 2e-4, 0.083, 0.084,
                  g1,   0.085,     0.086, 0.087};

    const TdoaScan gated = gate_scan(scan, src, rx, env, 3);
    CHECK(gated.index == 7);
    CHECK(gated.timestamp == 18.0);
    REQUIRE(gated.tdoas.size() == 3);
    CHECK(gated.tdoas[0] == g1 + 1e-4);
    CHECK(gated.tdoas[1] == g1 - 2e-4);
    CHECK(gated.tdoas[2] == g1);

    // Already small enough: identity.
    const TdoaScan same = gate_scan(gated, src, rx, env, 5);
    CHECK(same.tdoas == gated.tdoas);
}

}  // TEST_SUITE
