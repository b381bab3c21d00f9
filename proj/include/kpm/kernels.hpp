#pragma once

// Per-particle data-parallel kernels. Each kernel has a serial reference loop and
// an OpenMP loop running the identical per-particle arithmetic, so the two agree
// bit for bit.

#include <cstddef>
#include <cstdint>
#include <span>

#include "kpm/dynamics.hpp"
#include "kpm/game_space.hpp"

namespace kpm {

enum class Exec { Serial, Parallel };

struct ParticleColumns {
    double* rho;
    double* lambda;
    double* gamma_t;
    double* a_t;
    int* mode;
    std::size_t n;
};

struct ConstParticleColumns {
    const double* rho;
    const double* lambda;
    const double* gamma_t;
    const double* a_t;
    const int* mode;
    std::size_t n;
};

/// One RK4 step of the polar equations for a single particle. Returns false if the
/// range reached zero anywhere inside the step.
bool propagate_particle(RelativeState& rel, const OwnState& own, double u_m, double u_t, double dt,
                        const LagModel& model);

// Propagates every particle with the same target command u_t.
void propagate_kernel(ConstParticleColumns in, std::span<RelativeState> out, std::span<std::uint8_t> valid,
                      const OwnState& own, double u_m, double u_t, double dt, const LagModel& model, Exec exec);

// Gaussian bearing log-likelihood (up to a constant) of each particle.
void bearing_loglik_kernel(const double* lambda, std::size_t n, double y, double gamma_m, double sigma_nu,
                           double* out, Exec exec);

// Game-space coordinates of each particle.
void game_point_kernel(ConstParticleColumns in, const OwnState& own, const Speeds& speeds, const GameParams& params,
                       std::span<GamePoint> out, Exec exec);

void game_point_kernel(std::span<const RelativeState> in, const OwnState& own, const Speeds& speeds,
                       const GameParams& params, std::span<GamePoint> out, Exec exec);

}  // namespace kpm
