#include "kpm/game_space.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace kpm {

void GameParams::validate() const {
    if (!(mu > 1.0)) throw std::invalid_argument("game: mu must exceed 1, got " + std::to_string(mu));
    if (!(eps > 0.0)) throw std::invalid_argument("game: eps must be positive");
    if (!(tau_m > 0.0)) throw std::invalid_argument("game: tau_m must be positive");
    if (!(a_t_max > 0.0)) throw std::invalid_argument("game: a_t_max must be positive");
    if (!(k_lin > 0.0 && k_lin <= 1.0)) throw std::invalid_argument("game: k_lin must lie in (0, 1]");
}

const char* to_string(Region r) {
    switch (r) {
        case Region::UpperRegular: return "D1+";
        case Region::Singular: return "D0";
        case Region::LowerRegular: return "D1-";
    }
    return "?";
}

double psi(double theta) {
    if (theta < 0.0) throw std::domain_error("psi: negative argument");
    return std::expm1(-theta) + theta;
}

double psi_integral(double theta) {
    if (theta < 0.0) throw std::domain_error("psi_integral: negative argument");
    if (theta < 1e-3) {
        // theta^3/6 - theta^4/24 + theta^5/120; avoids cancellation
        const double t2 = theta * theta;
        return t2 * theta * (1.0 / 6.0 - theta / 24.0 + t2 / 120.0);
    }
    return 0.5 * theta * theta - psi(theta);
}

double gamma(double tau, const GameParams& p) {
    return p.mu * psi(tau) - p.eps * psi(tau / p.eps);
}

double gamma_integral(double tau, const GameParams& p) {
    return p.mu * psi_integral(tau) - p.eps * p.eps * psi_integral(tau / p.eps);
}

double tau_s(const GameParams& p) {
    p.validate();
    double hi = 1.0;
    while (gamma(hi, p) <= 0.0) {
        hi *= 2.0;
        if (hi > 1e6) throw std::runtime_error("tau_s: Gamma never turns positive");
    }
    // Last grid point with Gamma <= 0 brackets the apex from below.
    constexpr int kGrid = 4096;
    double lo_bracket = 0.0;
    bool found = false;
    for (int i = 1; i <= kGrid; ++i) {
        const double t = hi * i / kGrid;
        if (gamma(t, p) <= 0.0) {
            lo_bracket = t;
            found = true;
        }
    }
    if (!found) {
        // Gamma may still dip below zero between 0 and the first grid point.
        const double t1 = hi / kGrid;
        for (int i = 1; i < 64; ++i) {
            if (gamma(t1 * i / 64.0, p) < 0.0) {
                lo_bracket = t1 * i / 64.0;
                found = true;
            }
        }
        if (!found) return 0.0;
    }
    double a = lo_bracket;
    double b = std::min(hi, lo_bracket + hi / kGrid);
    for (int it = 0; it < 200; ++it) {
        const double m = 0.5 * (a + b);
        const double g = gamma(m, p);
        if (g <= 0.0) a = m; else b = m;
        if (std::abs(g) <= 1e-12 && b - a < 1e-12) break;
        if (b - a <= 4.0 * std::numeric_limits<double>::epsilon() * b) break;
    }
    return b;
}

double zem_dimensional(double xi, double xi_dot, double a_m_perp, double a_t_perp,
                       double t_go, const GameParams& p) {
    if (t_go < 0.0) throw std::domain_error("zem: negative time-to-go");
    const double tm = p.tau_m;
    const double tt = p.tau_t();
    return xi + xi_dot * t_go - a_m_perp * tm * tm * psi(t_go / tm) + a_t_perp * tt * tt * psi(t_go / tt);
}

GamePoint propagate_zem(const GamePoint& p, double u, double v, double h, const GameParams& params) {
    const double tau_end = std::max(0.0, p.tau - h);
    const double e = params.eps;
    const double d_pursuer = psi_integral(p.tau) - psi_integral(tau_end);
    const double d_evader = psi_integral(p.tau / e) - psi_integral(tau_end / e);
    return {p.z_bar - params.mu * u * d_pursuer + e * e * v * d_evader, tau_end};
}

GameSpace::GameSpace(const GameParams& params) : params_(params) {
    params_.validate();
    tau_s_ = kpm::tau_s(params_);
    g_at_apex_ = gamma_integral(tau_s_, params_);
    singular_miss_ = std::max(0.0, -params_.zem_scale() * g_at_apex_);
}

double GameSpace::singular_boundary(double tau) const {
    if (tau < tau_s_) throw std::domain_error("singular_boundary: tau below the apex");
    return std::max(0.0, gamma_integral(tau, params_) - g_at_apex_);
}

Region GameSpace::classify(const GamePoint& pt) const {
    if (pt.tau >= tau_s_ && std::abs(pt.z_bar) < singular_boundary(pt.tau)) return Region::Singular;
    return pt.z_bar >= 0.0 ? Region::UpperRegular : Region::LowerRegular;
}

double GameSpace::miss_value(const GamePoint& pt) const { return miss_value(pt, classify(pt)); }

double GameSpace::miss_value(const GamePoint& pt, Region r) const {
    if (r == Region::Singular) return singular_miss_;
    const double v = params_.zem_scale() * (std::abs(pt.z_bar) - gamma_integral(pt.tau, params_));
    return std::max(0.0, v);
}

double GameSpace::command(const GamePoint& pt) const { return command(pt, classify(pt)); }

double GameSpace::command(const GamePoint& pt, Region r) const {
    if (r != Region::Singular) return sign0(pt.z_bar);
    const double zs = singular_boundary(pt.tau);
    if (zs <= 0.0) return sign0(pt.z_bar);
    return sat(pt.z_bar / (params_.k_lin * zs));
}

}  // namespace kpm
