#include <cmath>
#include <numeric>
#include <random>

#include "doctest.h"
#include "kpm/immpf.hpp"
#include "kpm/rng.hpp"

using namespace kpm;

namespace {

const RelativeState kTruth{15000.0, kPi / 2, -kPi / 2, 0.0};
const OwnState kOwn{kPi / 2, 0.0};

ParticleCloud small_cloud(int per_mode, std::uint64_t seed, FilterConfig cfg = {}) {
    cfg.particles_per_mode = per_mode;
    std::mt19937_64 rng(seed);
    return init_cloud(kTruth, cfg, 2, rng);
}

}  // namespace

TEST_SUITE("immpf") {

TEST_CASE("tpm") {
    const Tpm t = Tpm::two_mode(0.999);
    CHECK(t(0, 0) == 0.999);
    CHECK(t(0, 1) == doctest::Approx(0.001).epsilon(1e-12));
    CHECK(t.modes() == 2);
    CHECK_THROWS_AS(Tpm(2, {0.5, 0.6, 0.5, 0.5}), std::invalid_argument);
    CHECK_THROWS_AS(Tpm(2, {1.2, -0.2, 0.5, 0.5}), std::invalid_argument);
    CHECK_THROWS_AS(Tpm(2, {1.0, 0.0}), std::invalid_argument);
}

TEST_CASE("init cloud") {
    FilterConfig cfg;
    cfg.particles_per_mode = 2000;
    std::mt19937_64 rng(1);
    const ParticleCloud c = init_cloud(kTruth, cfg, 2, rng);
    CHECK(c.size() == 4000);
    CHECK(c.count_in_mode(0) == 2000);
    CHECK(c.count_in_mode(1) == 2000);
    CHECK(c.weight_sum() == doctest::Approx(1.0).epsilon(1e-12));
    const RelativeState m = c.weighted_mean();
    CHECK(std::abs(m.rho - kTruth.rho) < 3.0 * 50.0 / std::sqrt(4000.0));
    const auto pm = c.mode_probabilities();
    CHECK(pm[0] == doctest::Approx(0.5));

    cfg.prior_sd = {0, 0, 0, 0};
    const ParticleCloud z = init_cloud(kTruth, cfg, 2, rng);
    for (std::size_t i = 0; i < z.size(); ++i) {
        CHECK(z.rho[i] == kTruth.rho);
        CHECK(z.gamma_t[i] == kTruth.gamma_t);
    }
    cfg.prior_sd = {-1, 0, 0, 0};
    CHECK_THROWS_AS(init_cloud(kTruth, cfg, 2, rng), std::invalid_argument);
}

TEST_CASE("identity TPM keeps modes and per-mode counts") {
    FilterConfig cfg;
    cfg.jitter = JitterScheme::Off;
    ParticleCloud c = small_cloud(100, 2, cfg);
    std::mt19937_64 rng(3);
    for (auto scheme : {MixingScheme::Interaction, MixingScheme::MarkovJump}) {
        cfg.mixing = scheme;
        const ParticleCloud p = predict(c, kOwn, 0.0, 0.01, Tpm::identity(2), LagModel{},
                                        bang_bang_mode_commands(196.133), cfg, rng);
        CHECK(p.count_in_mode(0) == 100);
        CHECK(p.count_in_mode(1) == 100);
        CHECK(p.weight_sum() == doctest::Approx(1.0).epsilon(1e-12));
    }
}

TEST_CASE("interaction keeps S particles per mode and moves mass by the TPM") {
    FilterConfig cfg;
    cfg.jitter = JitterScheme::Off;
    ParticleCloud c = small_cloud(500, 4, cfg);
    // Put all posterior mass on mode 0.
    for (std::size_t i = 0; i < c.size(); ++i) c.weight[i] = c.mode[i] == 0 ? 1.0 / 500 : 0.0;
    std::mt19937_64 rng(5);
    const ParticleCloud p = predict(c, kOwn, 0.0, 0.01, Tpm::two_mode(0.9), LagModel{},
                                    bang_bang_mode_commands(196.133), cfg, rng);
    CHECK(p.count_in_mode(0) == 500);
    CHECK(p.count_in_mode(1) == 500);
    const auto pm = p.mode_probabilities();
    CHECK(pm[0] == doctest::Approx(0.9).epsilon(1e-12));
    CHECK(pm[1] == doctest::Approx(0.1).epsilon(1e-12));
}

TEST_CASE("Markov-jump switch fraction follows the TPM row") {
    FilterConfig cfg;
    cfg.jitter = JitterScheme::Off;
    cfg.mixing = MixingScheme::MarkovJump;
    ParticleCloud c = small_cloud(5000, 6, cfg);
    std::mt19937_64 rng(7);
    long switches = 0, total = 0;
    for (int k = 0; k < 10; ++k) {
        const ParticleCloud p = predict(c, kOwn, 0.0, 0.0, Tpm::two_mode(0.999), LagModel{},
                                        bang_bang_mode_commands(196.133), cfg, rng);
        for (std::size_t i = 0; i < c.size(); ++i) switches += p.mode[i] != c.mode[i];
        total += static_cast<long>(c.size());
    }
    const double frac = static_cast<double>(switches) / total;
    const double sd = std::sqrt(0.001 * 0.999 / total);
    CHECK(std::abs(frac - 0.001) < 3.0 * sd);
}

TEST_CASE("zero step without jitter leaves states unchanged") {
    FilterConfig cfg;
    cfg.jitter = JitterScheme::Off;
    cfg.mixing = MixingScheme::MarkovJump;
    ParticleCloud c = small_cloud(50, 8, cfg);
    std::mt19937_64 rng(9);
    const ParticleCloud p = predict(c, kOwn, 0.0, 0.0, Tpm::two_mode(0.5), LagModel{}, bang_bang_mode_commands(196.133),
                                    cfg, rng);
    for (std::size_t i = 0; i < c.size(); ++i) {
        CHECK(p.rho[i] == c.rho[i]);
        CHECK(p.lambda[i] == c.lambda[i]);
        CHECK(p.a_t[i] == c.a_t[i]);
    }
}

TEST_CASE("particles that cross zero range are replaced by valid ones") {
    FilterConfig cfg;
    cfg.jitter = JitterScheme::Off;
    cfg.mixing = MixingScheme::MarkovJump;
    ParticleCloud c = small_cloud(20, 10, cfg);
    c.rho[3] = 1.0;  // reaches zero range within one step
    std::mt19937_64 rng(11);
    const ParticleCloud p = predict(c, kOwn, 0.0, 0.01, Tpm::identity(2), LagModel{}, bang_bang_mode_commands(196.133),
                                    cfg, rng);
    for (std::size_t i = 0; i < p.size(); ++i) CHECK(p.rho[i] > 100.0);
    CHECK(p.weight_sum() == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("update") {
    ParticleCloud c;
    c.modes = 1;
    c.push_back({{1000.0, 0.5, 0.0, 0.0}, 0, 0.5});
    c.push_back({{1000.0, 0.5, 0.0, 0.0}, 0, 0.5});
    CHECK(update(c, 0.1, 0.6, 1e-3));
    CHECK(c.weight[0] == doctest::Approx(0.5).epsilon(1e-15));

    ParticleCloud d;
    d.modes = 1;
    d.push_back({{1000.0, 0.5, 0.0, 0.0}, 0, 0.5});
    d.push_back({{1000.0, 0.5 + 2e-3, 0.0, 0.0}, 0, 0.5});
    const double sigma = 1e-3, y = 0.6 - 0.5;
    CHECK(update(d, y, 0.6, sigma));
    const double ratio = std::exp(-0.5 * (2e-3 / sigma) * (2e-3 / sigma));
    CHECK(d.weight[1] / d.weight[0] == doctest::Approx(ratio).epsilon(1e-12));
    CHECK(d.weight[0] + d.weight[1] == doctest::Approx(1.0).epsilon(1e-15));

    ParticleCloud e;
    e.modes = 1;
    e.push_back({{1000.0, 0.5, 0.0, 0.0}, 0, 0.5});
    e.push_back({{1000.0, 0.5 + 1.0, 0.0, 0.0}, 0, 0.5});
    CHECK(update(e, 0.1, 0.6, 1e-6));
    CHECK(e.weight[0] == 1.0);
}

TEST_CASE("update falls back to uniform weights when every likelihood vanishes") {
    ParticleCloud c;
    c.modes = 1;
    c.push_back({{1000.0, 0.5, 0.0, 0.0}, 0, 0.0});
    c.push_back({{1000.0, 0.7, 0.0, 0.0}, 0, 0.0});
    CHECK_FALSE(update(c, 0.1, 0.6, 1e-3));
    CHECK(c.weight[0] == 0.5);
}

TEST_CASE("effective sample size and systematic resampling") {
    ParticleCloud c;
    c.modes = 2;
    for (int i = 0; i < 4; ++i) c.push_back({{1000.0 + i, 0.0, 0.0, 0.0}, i % 2, 0.25});
    CHECK(effective_sample_size(c) == doctest::Approx(4.0));
    std::mt19937_64 rng(1);
    CHECK_FALSE(resample_if_needed(c, 0.5, rng));

    c.weight = {0.5, 0.5, 0.0, 0.0};
    CHECK(effective_sample_size(c) == doctest::Approx(2.0));

    c.weight = {0.0, 0.0, 1.0, 0.0};
    CHECK(effective_sample_size(c) == doctest::Approx(1.0));
    CHECK(resample_if_needed(c, 0.5, rng));
    for (std::size_t i = 0; i < 4; ++i) {
        CHECK(c.rho[i] == 1002.0);
        CHECK(c.mode[i] == 0);
        CHECK(c.weight[i] == 0.25);
    }
}

TEST_CASE("systematic resampling keeps offspring counts within one of N*w") {
    ParticleCloud c;
    c.modes = 1;
    std::mt19937_64 rng(13);
    std::vector<double> w(50);
    for (double& x : w) x = uniform01(rng);
    const double s = std::accumulate(w.begin(), w.end(), 0.0);
    for (std::size_t i = 0; i < w.size(); ++i) c.push_back({{static_cast<double>(i + 1), 0, 0, 0}, 0, w[i] / s});
    const std::vector<double> before = c.weight;
    systematic_resample(c, rng);
    std::vector<int> count(50, 0);
    for (std::size_t i = 0; i < c.size(); ++i) ++count[static_cast<std::size_t>(c.rho[i]) - 1];
    for (std::size_t i = 0; i < 50; ++i) CHECK(std::abs(count[i] - 50.0 * before[i]) < 1.0 + 1e-9);
}

TEST_CASE("filter determinism") {
    auto run = [] {
        FilterConfig cfg;
        cfg.particles_per_mode = 200;
        std::mt19937_64 rng(77);
        ParticleCloud c = init_cloud(kTruth, cfg, 2, rng);
        for (int k = 0; k < 5; ++k) {
            c = predict(c, kOwn, 10.0, 0.01, Tpm::two_mode(0.999), LagModel{}, bang_bang_mode_commands(196.133), cfg, rng);
            update(c, 1e-4 * k, kOwn.gamma_m, cfg.sigma_nu);
        }
        return c;
    };
    const ParticleCloud a = run(), b = run();
    CHECK(a.rho == b.rho);
    CHECK(a.weight == b.weight);
    CHECK(a.mode == b.mode);
}

TEST_CASE("noise-free bearing residual shrinks over the first steps") {
    FilterConfig cfg;
    cfg.particles_per_mode = 1000;
    cfg.sigma_nu = 0.5e-3;
    std::mt19937_64 rng(15);
    ParticleCloud c = init_cloud(kTruth, cfg, 1, rng);
    c.modes = 1;
    const LagModel lm;
    PolarState truth{kTruth, kOwn};
    double prev = 1e9;
    int decreasing = 0;
    for (int k = 0; k < 20; ++k) {
        const double y = kOwn.gamma_m - truth.rel.lambda;
        update(c, y, kOwn.gamma_m, cfg.sigma_nu);
        double ms = 0.0;
        for (std::size_t i = 0; i < c.size(); ++i) ms += c.weight[i] * std::pow(c.lambda[i] - truth.rel.lambda, 2);
        const double rms = std::sqrt(ms);
        if (rms < prev) ++decreasing;
        prev = rms;
        c = predict(c, kOwn, 0.0, 0.01, Tpm::identity(1), lm, {0.0}, cfg, rng);
        truth = step(truth, 0.0, 0.0, 0.01, lm);
    }
    CHECK(prev < 0.5e-3);
    CHECK(decreasing >= 15);
}

}
