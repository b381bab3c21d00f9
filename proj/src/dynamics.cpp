#include "kpm/dynamics.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>
#include <string>

namespace kpm {

void ScenarioConfig::validate() const {
    auto positive = [](double v, const char* name) {
        if (!(v > 0.0)) throw std::invalid_argument(std::string("scenario: ") + name + " must be positive");
    };
    positive(v_m, "v_m");
    positive(v_t, "v_t");
    positive(tau_m, "tau_m");
    positive(tau_t, "tau_t");
    positive(a_m_max, "a_m_max");
    positive(a_t_max, "a_t_max");
    positive(f_hz, "f_hz");
    positive(rho0, "rho0");
    positive(t_cap, "t_cap");
    if (sigma_nu < 0.0) throw std::invalid_argument("scenario: sigma_nu must be nonnegative");
    if (substeps < 1) throw std::invalid_argument("scenario: substeps must be >= 1");
    if (nominal_switch_lo < 0.0 || nominal_switch_hi < nominal_switch_lo)
        throw std::invalid_argument("scenario: bad nominal switch interval");
    if (smart_switch_lo < 0.0 || smart_switch_hi < smart_switch_lo)
        throw std::invalid_argument("scenario: bad smart switch interval");
}

GameParams ScenarioConfig::game_params(double k_lin) const {
    GameParams p;
    p.mu = a_m_max / a_t_max;
    p.eps = tau_t / tau_m;
    p.tau_m = tau_m;
    p.a_t_max = a_t_max;
    p.k_lin = k_lin;
    return p;
}

double target_command(const TargetProfile& profile, double t) {
    const double s = profile.initial_sign >= 0 ? 1.0 : -1.0;
    return t < profile.t_switch ? s * profile.a_t_max : -s * profile.a_t_max;
}

ClosingRates closing_rates(const RelativeState& rel, const OwnState& own, const Speeds& sp) {
    ClosingRates c;
    c.delta_m = own.gamma_m - rel.lambda;
    c.delta_t = rel.gamma_t + rel.lambda;
    c.v_rho = -(sp.v_m * std::cos(c.delta_m) + sp.v_t * std::cos(c.delta_t));
    c.v_lambda = -sp.v_m * std::sin(c.delta_m) + sp.v_t * std::sin(c.delta_t);
    return c;
}

PolarState derivatives(const PolarState& s, double u_m, double u_t, const LagModel& m) {
    if (!(s.rel.rho > 0.0)) throw EngagementOver("derivatives: range is not positive");
    const ClosingRates c = closing_rates(s.rel, s.own, m.speeds);
    PolarState d;
    d.rel.rho = c.v_rho;
    d.rel.lambda = c.v_lambda / s.rel.rho;
    d.rel.gamma_t = s.rel.a_t / m.speeds.v_t;
    d.rel.a_t = (u_t - s.rel.a_t) / m.tau_t;
    d.own.gamma_m = s.own.a_m / m.speeds.v_m;
    d.own.a_m = (u_m - s.own.a_m) / m.tau_m;
    return d;
}

namespace {

PolarState axpy(const PolarState& s, double h, const PolarState& d) {
    return {{s.rel.rho + h * d.rel.rho, s.rel.lambda + h * d.rel.lambda,
             s.rel.gamma_t + h * d.rel.gamma_t, s.rel.a_t + h * d.rel.a_t},
            {s.own.gamma_m + h * d.own.gamma_m, s.own.a_m + h * d.own.a_m}};
}

}  // namespace

PolarState step(const PolarState& s, double u_m, double u_t, double dt, const LagModel& m) {
    const PolarState k1 = derivatives(s, u_m, u_t, m);
    const PolarState k2 = derivatives(axpy(s, 0.5 * dt, k1), u_m, u_t, m);
    const PolarState k3 = derivatives(axpy(s, 0.5 * dt, k2), u_m, u_t, m);
    const PolarState k4 = derivatives(axpy(s, dt, k3), u_m, u_t, m);
    const double w = dt / 6.0;
    PolarState out = s;
    out.rel.rho += w * (k1.rel.rho + 2.0 * k2.rel.rho + 2.0 * k3.rel.rho + k4.rel.rho);
    out.rel.lambda += w * (k1.rel.lambda + 2.0 * k2.rel.lambda + 2.0 * k3.rel.lambda + k4.rel.lambda);
    out.rel.gamma_t += w * (k1.rel.gamma_t + 2.0 * k2.rel.gamma_t + 2.0 * k3.rel.gamma_t + k4.rel.gamma_t);
    out.rel.a_t += w * (k1.rel.a_t + 2.0 * k2.rel.a_t + 2.0 * k3.rel.a_t + k4.rel.a_t);
    out.own.gamma_m += w * (k1.own.gamma_m + 2.0 * k2.own.gamma_m + 2.0 * k3.own.gamma_m + k4.own.gamma_m);
    out.own.a_m += w * (k1.own.a_m + 2.0 * k2.own.a_m + 2.0 * k3.own.a_m + k4.own.a_m);
    return out;
}

double measure(const OwnState& own, const RelativeState& rel, double sigma_nu, std::mt19937_64& rng) {
    const double bearing = own.gamma_m - rel.lambda;
    if (sigma_nu == 0.0) return bearing;
    std::normal_distribution<double> noise(0.0, sigma_nu);
    return bearing + noise(rng);
}

// ---------------------------------------------------------------------------
// Truth

namespace {

// x_m, y_m, gamma_m, a_m, x_t, y_t, gamma_t, a_t
using Cartesian = std::array<double, 8>;

Cartesian cartesian_rates(const Cartesian& y, double u_m, double u_t, const ScenarioConfig& c) {
    return {c.v_m * std::cos(y[2]),
            c.v_m * std::sin(y[2]),
            y[3] / c.v_m,
            (u_m - y[3]) / c.tau_m,
            // The target path angle is measured so that its heading is pi - gamma_t.
            -c.v_t * std::cos(y[6]),
            c.v_t * std::sin(y[6]),
            y[7] / c.v_t,
            (u_t - y[7]) / c.tau_t};
}

Cartesian rk4(const Cartesian& y, double u_m, double u_t, double h, const ScenarioConfig& c) {
    auto add = [](const Cartesian& a, double s, const Cartesian& b) {
        Cartesian r;
        for (std::size_t i = 0; i < r.size(); ++i) r[i] = a[i] + s * b[i];
        return r;
    };
    const Cartesian k1 = cartesian_rates(y, u_m, u_t, c);
    const Cartesian k2 = cartesian_rates(add(y, 0.5 * h, k1), u_m, u_t, c);
    const Cartesian k3 = cartesian_rates(add(y, 0.5 * h, k2), u_m, u_t, c);
    const Cartesian k4 = cartesian_rates(add(y, h, k3), u_m, u_t, c);
    Cartesian out;
    for (std::size_t i = 0; i < out.size(); ++i)
        out[i] = y[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    return out;
}

}  // namespace

TruthSim::TruthSim(const ScenarioConfig& config, const TargetProfile& profile)
    : config_(config), profile_(profile), state_(initial_state(config)) {
    config_.validate();
    ranges_.reserve(static_cast<std::size_t>(config_.t_cap * config_.f_hz * config_.substeps) + 8);
    ranges_.push_back({state_.t, state_.rho});
}

EngagementState TruthSim::initial_state(const ScenarioConfig& c) {
    EngagementState s;
    s.x_m = 0.0;
    s.y_m = 0.0;
    s.x_t = 0.0;
    s.y_t = c.rho0;
    s.rho = c.rho0;
    s.lambda = kPi / 2.0;
    s.gamma_m = kPi / 2.0 + c.heading_error;
    s.gamma_t = c.gamma_t0;
    s.a_t = c.a_t0;
    s.a_m = 0.0;
    s.t = 0.0;
    return s;
}

bool TruthSim::closing() const {
    const double dx = state_.x_t - state_.x_m;
    const double dy = state_.y_t - state_.y_m;
    const double vx = -config_.v_t * std::cos(state_.gamma_t) - config_.v_m * std::cos(state_.gamma_m);
    const double vy = config_.v_t * std::sin(state_.gamma_t) - config_.v_m * std::sin(state_.gamma_m);
    return dx * vx + dy * vy < 0.0;
}

void TruthSim::refresh_polar() {
    const double dx = state_.x_t - state_.x_m;
    const double dy = state_.y_t - state_.y_m;
    state_.rho = std::hypot(dx, dy);
    state_.lambda = std::atan2(dy, dx);
}

void TruthSim::advance(double u_m) {
    const double h = config_.dt() / config_.substeps;
    const double t0 = state_.t;
    Cartesian y{state_.x_m, state_.y_m, state_.gamma_m, state_.a_m,
                state_.x_t, state_.y_t, state_.gamma_t, state_.a_t};
    for (int k = 0; k < config_.substeps; ++k) {
        const double t = t0 + k * h;
        y = rk4(y, u_m, target_command(profile_, t), h, config_);
        state_.x_m = y[0];
        state_.y_m = y[1];
        state_.gamma_m = y[2];
        state_.a_m = y[3];
        state_.x_t = y[4];
        state_.y_t = y[5];
        state_.gamma_t = y[6];
        state_.a_t = y[7];
        state_.t = t0 + (k + 1) * h;
        refresh_polar();
        ranges_.push_back({state_.t, state_.rho});
    }
}

double miss_distance(std::span<const RangeSample> tr) {
    if (tr.empty()) throw std::runtime_error("miss_distance: empty trajectory");
    std::size_t i = 0;
    for (std::size_t k = 1; k < tr.size(); ++k)
        if (tr[k].rho < tr[i].rho) i = k;
    if (i + 1 == tr.size() && tr.size() > 1)
        throw std::runtime_error("miss_distance: range still decreasing at t=" + std::to_string(tr[i].t) +
                                 " s (rho=" + std::to_string(tr[i].rho) + " m)");
    if (i == 0 || tr.size() < 3) return tr[i].rho;

    // Parabola through rho^2, exact for unaccelerated relative motion.
    const double t0 = tr[i - 1].t, t1 = tr[i].t, t2 = tr[i + 1].t;
    const double f0 = tr[i - 1].rho * tr[i - 1].rho;
    const double f1 = tr[i].rho * tr[i].rho;
    const double f2 = tr[i + 1].rho * tr[i + 1].rho;
    const double d01 = (f1 - f0) / (t1 - t0);
    const double d12 = (f2 - f1) / (t2 - t1);
    const double a = (d12 - d01) / (t2 - t0);
    if (!(a > 0.0)) return tr[i].rho;
    const double b = d01 - a * (t0 + t1);
    const double ts = std::clamp(-b / (2.0 * a), t0, t2);
    const double f = f1 + (ts - t1) * (d01 + a * (ts - t0));
    return std::min(tr[i].rho, std::sqrt(std::max(0.0, f)));
}

}  // namespace kpm
