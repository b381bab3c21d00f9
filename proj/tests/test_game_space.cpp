#include <cmath>
#include <random>

#include "doctest.h"
#include "kpm/dynamics.hpp"
#include "kpm/game_space.hpp"
#include "oracles.hpp"

using namespace kpm;

TEST_SUITE("game_space") {

TEST_CASE("psi values") {
    CHECK(psi(0.0) == 0.0);
    CHECK(psi(1.0) == doctest::Approx(std::exp(-1.0)).epsilon(1e-15));
    CHECK(std::abs(psi(50.0) - 49.0) < 1e-9);
    CHECK_THROWS_AS(psi(-1e-9), std::domain_error);
}

TEST_CASE("psi is the unit lag response to a step") {
    // x' = (1 - x), x(0) = 0 integrated twice gives psi.
    for (double th : {0.1, 0.5, 1.0, 3.0}) {
        const double twice = oracle::integrate([](double s) { return 1.0 - std::exp(-s); }, 0.0, th);
        CHECK(psi(th) == doctest::Approx(twice).epsilon(1e-10));
    }
}

TEST_CASE("psi is nondecreasing and convex on a grid") {
    double prev = psi(0.0), prev_slope = 0.0;
    for (double t = 0.01; t < 20.0; t += 0.01) {
        const double v = psi(t);
        CHECK(v >= prev);
        const double slope = (v - prev) / 0.01;
        CHECK(slope >= prev_slope - 1e-9);
        prev = v;
        prev_slope = slope;
    }
}

TEST_CASE("psi_integral matches quadrature including the small-argument branch") {
    for (double t : {1e-6, 5e-4, 9.99e-4, 1e-3, 0.01, 0.5, 2.0, 10.0, 40.0}) {
        const double ref = oracle::integrate(oracle::lag_kernel, 0.0, t, 1e-16);
        CHECK(std::abs(psi_integral(t) - ref) <= 1e-12 * std::max(1.0, std::abs(ref)));
    }
}

TEST_CASE("gamma examples") {
    GameParams p;
    CHECK(gamma(0.0, p) == 0.0);
    CHECK(gamma(1.0, p) == doctest::Approx(1.25 * std::exp(-1.0)).epsilon(1e-14));
    for (double t = 0.01; t <= 20.0; t += 0.01) CHECK(gamma(t, p) > 0.0);
}

TEST_CASE("gamma is the ZEM rate along optimal play of the linear system") {
    // Start with the lags at rest and both players at full command; the
    // finite-difference slope of the normalized ZEM in tau equals Gamma.
    GameParams p;
    const oracle::LinearModel lm{p.tau_m, p.tau_t()};
    const double scale = p.zem_scale();
    for (double tau0 : {0.5, 1.0, 3.0}) {
        const double tgo = tau0 * p.tau_m;
        std::array<double, 4> x{0.0, 0.0, p.a_t_max, p.a_m_max()};  // steady state under u=v=+1
        const double dt = 1e-4;
        auto zem = [&](const std::array<double, 4>& s, double tg) {
            return zem_dimensional(s[0], s[1], s[3], s[2], tg, p) / scale;
        };
        const double z0 = zem(x, tgo);
        const auto x1 = oracle::linear_propagate(x, p.a_m_max(), p.a_t_max, dt, 10, lm);
        const double z1 = zem(x1, tgo - dt);
        const double dz_dtau = (z0 - z1) / (dt / p.tau_m);
        // dz/dtau = mu psi u - eps psi(tau/eps) v with u = v = 1
        CHECK(dz_dtau == doctest::Approx(gamma(tau0 - 0.5 * dt / p.tau_m, p)).epsilon(1e-6));
    }
}

TEST_CASE("tau_s") {
    CHECK(tau_s(GameParams{}) == 0.0);
    GameParams p;
    p.mu = 1.2;
    p.eps = 0.5;
    const double ts = tau_s(p);
    CHECK(ts > 0.0);
    CHECK(std::abs(gamma(ts, p)) < 1e-10);
    CHECK(gamma(ts - 1e-3, p) < 0.0);
    CHECK(gamma(ts + 1e-6, p) > 0.0);
    CHECK(ts == doctest::Approx(oracle::apex(1.2, 0.5)).epsilon(1e-9));
}

TEST_CASE("tau_s over random parameters agrees with the scan oracle") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> mu_d(1.1, 4.0), eps_d(0.2, 5.0);
    for (int k = 0; k < 20; ++k) {
        GameParams p;
        p.mu = mu_d(rng);
        p.eps = eps_d(rng);
        const double ts = tau_s(p);
        CHECK(ts == doctest::Approx(oracle::apex(p.mu, p.eps)).epsilon(1e-8));
        CHECK(gamma(ts + 1e-6, p) > 0.0);
    }
}

TEST_CASE("singular boundary") {
    GameParams p;
    GameSpace g(p);
    CHECK(g.singular_boundary(g.tau_s()) == 0.0);
    const double ref = oracle::integrate([&](double t) { return oracle::big_gamma(t, p.mu, p.eps); }, 0.0, 2.0, 1e-14);
    CHECK(g.singular_boundary(2.0) == doctest::Approx(ref).epsilon(1e-12));
    CHECK(g.singular_boundary(2.0) == doctest::Approx(1.0808309).epsilon(1e-7));
    double prev = 0.0;
    for (double t = 0.0; t <= 10.0; t += 0.01) {
        const double b = g.singular_boundary(t);
        CHECK(b >= prev);
        prev = b;
    }
    GameParams q;
    q.mu = 1.2;
    q.eps = 0.5;
    GameSpace gq(q);
    CHECK_THROWS_AS(gq.singular_boundary(0.5 * gq.tau_s()), std::domain_error);
}

TEST_CASE("classify") {
    GameParams q;
    q.mu = 1.2;
    q.eps = 0.5;
    GameSpace g(q);
    const double ts = g.tau_s();
    CHECK(g.classify({0.0, 0.5 * ts}) == Region::UpperRegular);
    const double tau = ts + 2.0;
    const double zs = g.singular_boundary(tau);
    CHECK(g.classify({0.5 * zs, tau}) == Region::Singular);
    CHECK(g.classify({-2.0 * zs, tau}) == Region::LowerRegular);
    CHECK(g.classify({2.0 * zs, tau}) == Region::UpperRegular);
    CHECK(g.classify({zs, tau}) == Region::UpperRegular);  // boundary belongs to the regular region
    GameSpace d{GameParams{}};
    CHECK(d.classify({0.0, 0.0}) == Region::UpperRegular);
}

TEST_CASE("miss value") {
    GameParams p;
    GameSpace g(p);
    CHECK(g.singular_miss() == 0.0);
    CHECK(g.miss_value({0.1, 3.0}) == 0.0);
    CHECK(g.miss_value({2.0, 1.0}) == doctest::Approx(14.39498).epsilon(1e-6));
    CHECK(g.miss_value({2.0, 1.0}) / p.zem_scale() == doctest::Approx(1.8348493).epsilon(1e-7));

    GameParams q;
    q.mu = 1.2;
    q.eps = 0.5;
    GameSpace gq(q);
    const double tau = gq.tau_s() + 1.5;
    CHECK(gq.singular_miss() > 0.0);
    CHECK(gq.miss_value({0.1 * gq.singular_boundary(tau), tau}) == gq.miss_value({-0.3 * gq.singular_boundary(tau + 1), tau + 1}));
    // continuity at the boundary, monotone in |z|
    const double zs = gq.singular_boundary(tau);
    CHECK(gq.miss_value({zs, tau}) == doctest::Approx(gq.singular_miss()).epsilon(1e-12));
    double prev = 0.0;
    for (double z = 0.0; z < 5.0; z += 0.01) {
        const double v = gq.miss_value({z, tau});
        CHECK(v >= prev - 1e-12);
        CHECK(gq.miss_value({-z, tau}) == v);
        prev = v;
    }
}

TEST_CASE("miss value equals the terminal miss of bang-bang play") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> mu_d(1.1, 4.0), eps_d(0.2, 5.0), u01(0.0, 1.0);
    int checked = 0;
    while (checked < 60) {
        GameParams p;
        p.mu = mu_d(rng);
        p.eps = eps_d(rng);
        GameSpace g(p);
        const double tau = 0.2 + 12.0 * u01(rng);
        const double zs = tau >= g.tau_s() ? g.singular_boundary(tau) : 0.0;
        const double z = (u01(rng) < 0.5 ? -1.0 : 1.0) * (zs + 0.05 + 3.0 * u01(rng));
        // Linear state with that ZEM: only xi nonzero, lags at rest.
        const double tgo = tau * p.tau_m;
        std::array<double, 4> x{z * p.zem_scale(), 0.0, 0.0, 0.0};
        const double s = z > 0 ? 1.0 : -1.0;
        const auto xf = oracle::linear_propagate(x, s * p.a_m_max(), s * p.a_t_max, tgo, 20000,
                                                 {p.tau_m, p.tau_t()});
        CHECK(std::abs(std::abs(xf[0]) - g.miss_value({z, tau})) < 1e-4);
        ++checked;
    }
}

TEST_CASE("zem_dimensional") {
    GameParams p;
    CHECK(zem_dimensional(0, 0, 0, 0, 2.0, p) == 0.0);
    CHECK(zem_dimensional(10, 0, 0, 0, 1.7, p) == 10.0);
    CHECK_THROWS_AS(zem_dimensional(0, 0, 0, 0, -1e-3, p), std::domain_error);
}

TEST_CASE("command") {
    GameParams p;
    GameSpace g(p);
    const double tau = 3.0, zs = g.singular_boundary(tau);
    CHECK(g.command({2.0 * zs, tau}) == 1.0);
    CHECK(g.command({0.0, tau}) == 0.0);
    CHECK(g.command({0.5 * p.k_lin * zs, tau}) == doctest::Approx(0.5).epsilon(1e-14));
    CHECK(g.command({0.0, 0.0}) == 0.0);
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> zd(-20.0, 20.0), td(0.0, 15.0);
    for (int k = 0; k < 1000; ++k) {
        const GamePoint pt{zd(rng), td(rng)};
        const double c = g.command(pt);
        CHECK(c >= -1.0);
        CHECK(c <= 1.0);
        CHECK(g.command({-pt.z_bar, pt.tau}) == -c);
    }
}

TEST_CASE("propagate_zem matches integration of the ZEM dynamics") {
    GameParams p;
    p.mu = 2.7;
    p.eps = 0.6;
    for (double tau : {0.03, 0.5, 4.0}) {
        for (double u : {-1.0, 0.3, 1.0}) {
            const double v = -0.7;
            const double h = 0.05;
            const GamePoint q = propagate_zem({0.4, tau}, u, v, h, p);
            const double t1 = std::max(0.0, tau - h);
            const double dz = oracle::integrate(
                [&](double t) { return p.mu * oracle::lag_kernel(t) * u - p.eps * oracle::lag_kernel(t / p.eps) * v; }, t1,
                tau, 1e-16);
            CHECK(q.tau == t1);
            CHECK(q.z_bar == doctest::Approx(0.4 - dz).epsilon(1e-12));
        }
    }
}

TEST_CASE("invalid parameters are rejected") {
    GameParams p;
    p.mu = 1.0;
    CHECK_THROWS_AS(GameSpace{p}, std::invalid_argument);
    p = GameParams{};
    p.k_lin = 0.0;
    CHECK_THROWS_AS(GameSpace{p}, std::invalid_argument);
    p = GameParams{};
    p.eps = -1.0;
    CHECK_THROWS_AS(GameSpace{p}, std::invalid_argument);
}

}
