#include "kpm/kernels.hpp"

#include <cmath>

#include "kpm/zem_bridge.hpp"

namespace kpm {

namespace {

struct Rates {
    double rho, lambda, gamma_t, a_t, gamma_m, a_m;
};

inline bool rates(double rho, double lambda, double gamma_t, double a_t, double gamma_m, double a_m, double u_m,
                  double u_t, const LagModel& m, Rates& d) {
    if (!(rho > 0.0)) return false;
    const double dm = gamma_m - lambda;
    const double dt = gamma_t + lambda;
    const double sm = std::sin(dm), cm = std::cos(dm);
    const double st = std::sin(dt), ct = std::cos(dt);
    d.rho = -(m.speeds.v_m * cm + m.speeds.v_t * ct);
    d.lambda = (-m.speeds.v_m * sm + m.speeds.v_t * st) / rho;
    d.gamma_t = a_t / m.speeds.v_t;
    d.a_t = (u_t - a_t) / m.tau_t;
    d.gamma_m = a_m / m.speeds.v_m;
    d.a_m = (u_m - a_m) / m.tau_m;
    return true;
}

}  // namespace

bool propagate_particle(RelativeState& s, const OwnState& own, double u_m, double u_t, double h,
                        const LagModel& m) {
    Rates k1, k2, k3, k4;
    const double hh = 0.5 * h;
    if (!rates(s.rho, s.lambda, s.gamma_t, s.a_t, own.gamma_m, own.a_m, u_m, u_t, m, k1)) return false;
    if (!rates(s.rho + hh * k1.rho, s.lambda + hh * k1.lambda, s.gamma_t + hh * k1.gamma_t, s.a_t + hh * k1.a_t,
               own.gamma_m + hh * k1.gamma_m, own.a_m + hh * k1.a_m, u_m, u_t, m, k2))
        return false;
    if (!rates(s.rho + hh * k2.rho, s.lambda + hh * k2.lambda, s.gamma_t + hh * k2.gamma_t, s.a_t + hh * k2.a_t,
               own.gamma_m + hh * k2.gamma_m, own.a_m + hh * k2.a_m, u_m, u_t, m, k3))
        return false;
    if (!rates(s.rho + h * k3.rho, s.lambda + h * k3.lambda, s.gamma_t + h * k3.gamma_t, s.a_t + h * k3.a_t,
               own.gamma_m + h * k3.gamma_m, own.a_m + h * k3.a_m, u_m, u_t, m, k4))
        return false;
    const double w = h / 6.0;
    s.rho += w * (k1.rho + 2.0 * k2.rho + 2.0 * k3.rho + k4.rho);
    s.lambda += w * (k1.lambda + 2.0 * k2.lambda + 2.0 * k3.lambda + k4.lambda);
    s.gamma_t += w * (k1.gamma_t + 2.0 * k2.gamma_t + 2.0 * k3.gamma_t + k4.gamma_t);
    s.a_t += w * (k1.a_t + 2.0 * k2.a_t + 2.0 * k3.a_t + k4.a_t);
    return s.rho > 0.0 && std::isfinite(s.lambda);
}

void propagate_kernel(ConstParticleColumns in, std::span<RelativeState> out, std::span<std::uint8_t> valid,
                      const OwnState& own, double u_m, double u_t, double dt, const LagModel& model, Exec exec) {
    const auto n = static_cast<std::ptrdiff_t>(in.n);
    auto body = [&](std::ptrdiff_t i) {
        RelativeState s{in.rho[i], in.lambda[i], in.gamma_t[i], in.a_t[i]};
        valid[static_cast<std::size_t>(i)] = propagate_particle(s, own, u_m, u_t, dt, model) ? 1 : 0;
        out[static_cast<std::size_t>(i)] = s;
    };
    if (exec == Exec::Parallel) {
#pragma omp parallel for schedule(static)
        for (std::ptrdiff_t i = 0; i < n; ++i) body(i);
    } else {
        for (std::ptrdiff_t i = 0; i < n; ++i) body(i);
    }
}

void bearing_loglik_kernel(const double* lambda, std::size_t n_particles, double y, double gamma_m,
                           double sigma_nu, double* out, Exec exec) {
    const auto n = static_cast<std::ptrdiff_t>(n_particles);
    const double inv_var = 1.0 / (sigma_nu * sigma_nu);
    auto body = [&](std::ptrdiff_t i) {
        const double r = y - (gamma_m - lambda[i]);
        out[i] = -0.5 * r * r * inv_var;
    };
    if (exec == Exec::Parallel) {
#pragma omp parallel for schedule(static)
        for (std::ptrdiff_t i = 0; i < n; ++i) body(i);
    } else {
        for (std::ptrdiff_t i = 0; i < n; ++i) body(i);
    }
}

void game_point_kernel(ConstParticleColumns in, const OwnState& own, const Speeds& speeds, const GameParams& params,
                       std::span<GamePoint> out, Exec exec) {
    const auto n = static_cast<std::ptrdiff_t>(in.n);
    auto body = [&](std::ptrdiff_t i) {
        const RelativeState s{in.rho[i], in.lambda[i], in.gamma_t[i], in.a_t[i]};
        out[static_cast<std::size_t>(i)] = zem_point(s, own, speeds, params);
    };
    if (exec == Exec::Parallel) {
#pragma omp parallel for schedule(static)
        for (std::ptrdiff_t i = 0; i < n; ++i) body(i);
    } else {
        for (std::ptrdiff_t i = 0; i < n; ++i) body(i);
    }
}

void game_point_kernel(std::span<const RelativeState> in, const OwnState& own, const Speeds& speeds,
                       const GameParams& params, std::span<GamePoint> out, Exec exec) {
    const auto n = static_cast<std::ptrdiff_t>(in.size());
    auto body = [&](std::ptrdiff_t i) {
        out[static_cast<std::size_t>(i)] = zem_point(in[static_cast<std::size_t>(i)], own, speeds, params);
    };
    if (exec == Exec::Parallel) {
#pragma omp parallel for schedule(static)
        for (std::ptrdiff_t i = 0; i < n; ++i) body(i);
    } else {
        for (std::ptrdiff_t i = 0; i < n; ++i) body(i);
    }
}

}  // namespace kpm
