#pragma once

#include <stdexcept>

namespace kpm {

// Normalized parameters of the linear pursuit-evasion game with first-order lags.
struct GameParams {
    double mu = 2.25;      // a_M^max / a_T^max
    double eps = 1.0;      // tau_T / tau_M
    double tau_m = 0.2;    // interceptor time constant [s]
    double a_t_max = 20.0 * 9.80665;  // [m/s^2]
    double k_lin = 0.5;    // linear fraction of the singular region

    void validate() const;

    double tau_t() const { return eps * tau_m; }
    double a_m_max() const { return mu * a_t_max; }
    // Length scale that turns a dimensional ZEM into z_bar.
    double zem_scale() const { return a_t_max * tau_m * tau_m; }
};

struct GamePoint {
    double z_bar = 0.0;
    double tau = 0.0;
};

enum class Region { UpperRegular, Singular, LowerRegular };

const char* to_string(Region r);

// Thrown when the geometry no longer defines a time-to-go (range rate >= 0).
class EngagementOver : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// psi(theta) = exp(-theta) + theta - 1, the unit first-order-lag response kernel.
double psi(double theta);

// Antiderivative of psi from 0: theta^2/2 - psi(theta).
double psi_integral(double theta);

// Gamma(tau) = mu psi(tau) - eps psi(tau/eps).
double gamma(double tau, const GameParams& params);

// int_0^tau Gamma.
double gamma_integral(double tau, const GameParams& params);

// Apex of the singular region: largest root of Gamma, 0 when Gamma > 0 on (0, inf).
double tau_s(const GameParams& params);

/// Dimensional zero-effort miss of the linear model.
///
/// Z = xi + xi_dot t_go - a_M tau_M^2 psi(t_go/tau_M) + a_T tau_T^2 psi(t_go/tau_T)
double zem_dimensional(double xi, double xi_dot, double a_m_perp, double a_t_perp,
                       double t_go, const GameParams& params);

/// Game-space decomposition for one parameter set. Construction finds the apex
/// once; every query afterwards is closed form and thread-safe.
class GameSpace {
public:
    explicit GameSpace(const GameParams& params);

    const GameParams& params() const { return params_; }
    double tau_s() const { return tau_s_; }

    // z_bar*(tau) = int_{tau_s}^{tau} Gamma. Throws std::domain_error below the apex.
    double singular_boundary(double tau) const;

    Region classify(const GamePoint& p) const;

    // Value of the game in meters (optimal-play terminal miss).
    double miss_value(const GamePoint& p) const;
    double miss_value(const GamePoint& p, Region r) const;

    // Deterministic DGL1 command with linear chattering prevention, in [-1, 1].
    double command(const GamePoint& p) const;
    double command(const GamePoint& p, Region r) const;

    // Constant miss over the singular region [m].
    double singular_miss() const { return singular_miss_; }

private:
    GameParams params_;
    double tau_s_ = 0.0;
    double g_at_apex_ = 0.0;
    double singular_miss_ = 0.0;
};

/// ZEM after holding normalized commands (u pursuer, v evader) from tau down to
/// max(0, tau - h): dz/dtau = mu psi(tau) u - eps psi(tau/eps) v.
GamePoint propagate_zem(const GamePoint& p, double u, double v, double h, const GameParams& params);

inline double sign0(double x) { return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0); }
inline double sat(double x) { return x > 1.0 ? 1.0 : (x < -1.0 ? -1.0 : x); }

}  // namespace kpm
