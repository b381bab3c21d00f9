#include <cmath>
#include <random>

#include "doctest.h"
#include "kpm/guidance.hpp"
#include "kpm/rng.hpp"
#include "kpm/zem_bridge.hpp"

using namespace kpm;

namespace {

GuidanceVariant variant(GuidanceVariant::Kind k) {
    GuidanceVariant v;
    v.kind = k;
    return v;
}

const GuidanceVariant::Kind kAll[] = {GuidanceVariant::Kind::Regular, GuidanceVariant::Kind::EA,
                                      GuidanceVariant::Kind::KPM};

}  // namespace

TEST_SUITE("guidance") {

TEST_CASE("cloud collapsed into the upper regular region") {
    const GameSpace game{GameParams{}};
    GameCloud c;
    c.points = {{3.0 * game.singular_boundary(2.0), 2.0}};
    c.mode = {0};
    c.weight = {1.0};
    const std::vector<double> pri{1.0, 0.0, 0.0, 0.0};
    for (auto k : kAll) CHECK(guide_game_cloud(variant(k), c, pri, game).u_m == game.params().a_m_max());
}

TEST_CASE("symmetric cloud gives a zero Regular command") {
    const GameSpace game{GameParams{}};
    std::mt19937_64 rng(4);
    GameCloud c;
    for (int k = 0; k < 50; ++k) {
        const double z = 2.0 * uniform01(rng), tau = 0.5 + 3.0 * uniform01(rng);
        for (double s : {1.0, -1.0}) {
            c.points.push_back({s * z, tau});
            c.mode.push_back(s > 0 ? 0 : 1);
            c.weight.push_back(0.01);
        }
    }
    CHECK(guide_game_cloud(variant(GuidanceVariant::Kind::Regular), c, {}, game).u_m == 0.0);
}

TEST_CASE("commands stay within the acceleration limit") {
    const GameSpace game{GameParams{}};
    std::mt19937_64 rng(8);
    for (int k = 0; k < 60; ++k) {
        GameCloud c;
        for (int i = 0; i < 12; ++i) {
            c.points.push_back({4.0 * (uniform01(rng) - 0.5), 0.05 + 4.0 * uniform01(rng)});
            c.mode.push_back(static_cast<int>(rng() % 2));
            c.weight.push_back(1.0 / 12);
        }
        const std::vector<double> pri(4, 0.25);
        for (auto kind : kAll) {
            GuidanceVariant v = variant(kind);
            v.regular_point = k % 2 ? GuidanceVariant::RegularPoint::Map : GuidanceVariant::RegularPoint::Mean;
            const double u = guide_game_cloud(v, c, pri, game).u_m;
            CHECK(std::abs(u) <= game.params().a_m_max());
        }
    }
}

TEST_CASE("EA and KPM disagree on the flip cloud") {
    const GameSpace game{GameParams{}};
    const GameCloud c = example_cloud(game);
    const auto pri = likelihoods(partition(c, game), c.weight);
    GuidanceVariant ea = variant(GuidanceVariant::Kind::EA);
    GuidanceVariant kpm = variant(GuidanceVariant::Kind::KPM);
    ea.horizon_s = kpm.horizon_s = 0.01;
    const double a = guide_game_cloud(ea, c, pri, game).u_m;
    const double b = guide_game_cloud(kpm, c, pri, game).u_m;
    CHECK(a != b);
    CHECK(a < 0.0);
    CHECK(b > 0.0);
}

TEST_CASE("perfect information: EA and KPM agree in sign with Regular in regular regions") {
    const GameSpace game{GameParams{}};
    std::mt19937_64 rng(12);
    for (int k = 0; k < 200; ++k) {
        const double tau = 0.1 + 4.0 * uniform01(rng);
        const double zs = game.singular_boundary(tau);
        const double z = (uniform01(rng) < 0.5 ? 1 : -1) * zs * (1.05 + 2.0 * uniform01(rng));
        GameCloud c;
        c.points = {{z, tau}};
        c.mode = {static_cast<int>(rng() % 2)};
        c.weight = {1.0};
        const auto pri = likelihoods(partition(c, game), c.weight);
        const double reg = guide_game_cloud(variant(GuidanceVariant::Kind::Regular), c, {}, game).u_bar;
        for (auto kind : {GuidanceVariant::Kind::EA, GuidanceVariant::Kind::KPM}) {
            const double u = guide_game_cloud(variant(kind), c, pri, game).u_bar;
            CHECK(u == reg);
        }
        // Inside the band every variant stays within the saturation bounds.
        c.points = {{z * 0.3 / std::abs(z) * zs, tau}};
        const auto pri_s = likelihoods(partition(c, game), c.weight);
        for (auto kind : kAll) CHECK(std::abs(guide_game_cloud(variant(kind), c, pri_s, game).u_bar) <= 1.0);
    }
}

TEST_CASE("non-closing estimate ends guidance") {
    FilterConfig fc;
    fc.particles_per_mode = 5;
    fc.prior_sd = {0, 0, 0, 0};
    std::mt19937_64 rng(1);
    const ParticleCloud c = init_cloud({100.0, kPi / 2, kPi / 2, 0.0}, fc, 2, rng);
    GuidanceInputs in;
    in.cloud = &c;
    in.own = {-kPi / 2, 0.0};
    const GameSpace game{GameParams{}};
    const GuidanceOutput out = guide(variant(GuidanceVariant::Kind::KPM), in, game, Tpm::two_mode(0.999), Speeds{});
    CHECK(out.terminal);
    CHECK(out.u_m == 0.0);
}

TEST_CASE("variant parsing and validation") {
    CHECK(GuidanceVariant::parse_kind("kpm") == GuidanceVariant::Kind::KPM);
    CHECK_THROWS_AS(GuidanceVariant::parse_kind("pn"), std::invalid_argument);
    GuidanceVariant v;
    v.horizon_s = 0.0;
    CHECK_THROWS_AS(v.validate(), std::invalid_argument);
    v = GuidanceVariant{};
    v.k_lin = 1.5;
    CHECK_THROWS_AS(v.validate(), std::invalid_argument);
    CHECK(variant(GuidanceVariant::Kind::EA).cost().kind == CostKind::MissDistance);
    CHECK(variant(GuidanceVariant::Kind::KPM).cost().kind == CostKind::MissProbability);
}

}
