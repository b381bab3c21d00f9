#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include "kpm/game_space.hpp"

namespace kpm {

inline constexpr double kGravity = 9.80665;  // [m/s^2]
inline constexpr double kPi = 3.14159265358979323846;

struct Speeds {
    double v_m = 2500.0;
    double v_t = 2500.0;
};

// Target-relative state estimated by the filter: (rho, lambda, gamma_T, a_T).
struct RelativeState {
    double rho = 0.0;
    double lambda = 0.0;
    double gamma_t = 0.0;
    double a_t = 0.0;
};

// Interceptor own state, known from its navigation system.
struct OwnState {
    double gamma_m = 0.0;
    double a_m = 0.0;
};

// Full polar state of the planar engagement.
struct PolarState {
    RelativeState rel;
    OwnState own;
};

struct LagModel {
    Speeds speeds;
    double tau_m = 0.2;
    double tau_t = 0.2;
};

enum class SwitchLaw { Nominal, Smart };

struct ScenarioConfig {
    double v_m = 2500.0;
    double v_t = 2500.0;
    double tau_m = 0.2;
    double tau_t = 0.2;
    double a_m_max = 45.0 * kGravity;
    double a_t_max = 20.0 * kGravity;
    double sigma_nu = 0.5e-3;   // bearing noise [rad]
    double f_hz = 100.0;
    double rho0 = 15000.0;
    double gamma_t0 = -kPi / 2.0;
    double heading_error = 0.0;  // interceptor heading off the initial LOS [rad]
    double a_t0 = 0.0;
    int substeps = 4;
    double t_cap = 6.0;
    SwitchLaw switch_law = SwitchLaw::Nominal;
    double nominal_switch_lo = 0.0;
    double nominal_switch_hi = 3.0;
    double smart_switch_lo = 1.5;
    double smart_switch_hi = 2.5;

    void validate() const;

    double dt() const { return 1.0 / f_hz; }
    Speeds speeds() const { return {v_m, v_t}; }
    LagModel lag_model() const { return {speeds(), tau_m, tau_t}; }
    GameParams game_params(double k_lin) const;
};

// Single-switch bang-bang evasion.
struct TargetProfile {
    int initial_sign = 1;
    double t_switch = 0.0;
    double a_t_max = 20.0 * kGravity;
};

// Command flips at t >= t_switch.
double target_command(const TargetProfile& profile, double t);

// Range rate and LOS-normal relative velocity.
struct ClosingRates {
    double v_rho = 0.0;
    double v_lambda = 0.0;
    double delta_m = 0.0;
    double delta_t = 0.0;
};

ClosingRates closing_rates(const RelativeState& rel, const OwnState& own, const Speeds& speeds);

/// Polar equations of motion for both players.
///
/// Throws EngagementOver when rho <= 0.
PolarState derivatives(const PolarState& s, double u_m, double u_t, const LagModel& model);

/// One fixed RK4 step with commands held over the step.
PolarState step(const PolarState& s, double u_m, double u_t, double dt, const LagModel& model);

/// Bearing of the LOS relative to the interceptor velocity, y = gamma_M - lambda + noise.
double measure(const OwnState& own, const RelativeState& rel, double sigma_nu, std::mt19937_64& rng);

// Full truth state, including inertial positions for miss bookkeeping.
struct EngagementState {
    double rho = 0.0;
    double lambda = 0.0;
    double gamma_t = 0.0;
    double a_t = 0.0;
    double gamma_m = 0.0;
    double a_m = 0.0;
    double t = 0.0;
    double x_m = 0.0, y_m = 0.0;
    double x_t = 0.0, y_t = 0.0;

    RelativeState relative() const { return {rho, lambda, gamma_t, a_t}; }
    OwnState own() const { return {gamma_m, a_m}; }
};

struct RangeSample {
    double t = 0.0;
    double rho = 0.0;
};

/// Truth propagator. Integrates the Cartesian form of the same kinematics so that
/// the closest approach is resolved without the 1/rho singularity of the LOS rate.
class TruthSim {
public:
    TruthSim(const ScenarioConfig& config, const TargetProfile& profile);

    static EngagementState initial_state(const ScenarioConfig& config);

    const EngagementState& state() const { return state_; }
    const std::vector<RangeSample>& range_history() const { return ranges_; }

    double target_command_now() const { return target_command(profile_, state_.t); }
    bool closing() const;

    // Advance one sensor interval with the interceptor command held.
    void advance(double u_m);

private:
    void refresh_polar();

    ScenarioConfig config_;
    TargetProfile profile_;
    EngagementState state_;
    std::vector<RangeSample> ranges_;
};

/// Closest-approach separation from sampled range, refined by a parabola through
/// rho^2 at the three samples around the discrete minimum.
///
/// Throws std::runtime_error if the minimum is the last sample.
double miss_distance(std::span<const RangeSample> trajectory);

}  // namespace kpm
