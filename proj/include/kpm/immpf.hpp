#pragma once

#include <array>
#include <cstdint>
#include <random>
#include <vector>

#include "kpm/dynamics.hpp"
#include "kpm/kernels.hpp"

namespace kpm {

// Row-stochastic mode transition matrix.
class Tpm {
public:
    Tpm() = default;
    Tpm(int modes, std::vector<double> row_major);

    static Tpm two_mode(double p_stay);
    static Tpm identity(int modes);

    int modes() const { return modes_; }
    double operator()(int from, int to) const { return p_[static_cast<std::size_t>(from * modes_ + to)]; }
    const std::vector<double>& data() const { return p_; }

private:
    int modes_ = 0;
    std::vector<double> p_;
};

struct Particle {
    RelativeState state;
    int mode = 0;
    double weight = 0.0;
};

/// Mode-tagged weighted particle set, stored column-wise for the kernels.
struct ParticleCloud {
    std::vector<double> rho, lambda, gamma_t, a_t;
    std::vector<int> mode;
    std::vector<double> weight;
    int modes = 2;
    long k = 0;

    std::size_t size() const { return weight.size(); }
    void resize(std::size_t n);
    Particle particle(std::size_t i) const { return {{rho[i], lambda[i], gamma_t[i], a_t[i]}, mode[i], weight[i]}; }
    void set(std::size_t i, const Particle& p);
    void push_back(const Particle& p);

    double weight_sum() const;
    void normalize();
    std::vector<double> mode_probabilities() const;
    std::size_t count_in_mode(int m) const;
    RelativeState weighted_mean() const;

    ParticleColumns columns() { return {rho.data(), lambda.data(), gamma_t.data(), a_t.data(), mode.data(), size()}; }
    ConstParticleColumns columns() const {
        return {rho.data(), lambda.data(), gamma_t.data(), a_t.data(), mode.data(), size()};
    }
};

enum class MixingScheme {
    Interaction,  // per-mode banks of S particles re-drawn each step from the mode-mixed posterior
    MarkovJump,   // each particle jumps mode along its TPM row; whole-cloud ESS resampling
};

enum class JitterScheme { EveryPredict, AfterResample, Off };

struct FilterConfig {
    int particles_per_mode = 1000;
    double sigma_nu = 0.5e-3;  // assumed bearing noise [rad]
    // Prior standard deviations of (rho, lambda, gamma_T, a_T).
    std::array<double, 4> prior_sd{50.0, kPi / 180.0, 3.0 * kPi / 180.0, 10.0};
    MixingScheme mixing = MixingScheme::Interaction;
    JitterScheme jitter = JitterScheme::EveryPredict;
    double jitter_c = 0.03;
    double ess_threshold = 0.5;
    Exec exec = Exec::Serial;

    void validate() const;
    std::array<double, 4> jitter_sd(std::size_t n_particles) const;
};

// +a_T^max for mode 0, -a_T^max for mode 1.
std::vector<double> bang_bang_mode_commands(double a_t_max);

/// Draws R*S particles around the true initial relative state with equal weights and
/// equal mode priors (S per mode). Zero prior deviation places every particle at truth.
ParticleCloud init_cloud(const RelativeState& truth, const FilterConfig& cfg, int modes, std::mt19937_64& rng);

/// Deterministic propagation of every posterior particle under every mode command.
/// Shared by the filter prediction and the decision priors.
struct ModePropagation {
    // states[r] holds the whole cloud propagated with target mode r.
    std::vector<std::vector<RelativeState>> states;
    std::vector<std::uint8_t> valid;  // per mode and particle, row-major [r * n + i]

    std::size_t n() const { return states.empty() ? 0 : states.front().size(); }
};

ModePropagation propagate_all_modes(const ParticleCloud& cloud, const OwnState& own, double u_m, double dt,
                                    const LagModel& model, const std::vector<double>& mode_commands, Exec exec);

/// Filter time update from the previous posterior. Mode transitions follow the
/// configured mixing scheme; jitter and degenerate-particle repair are applied.
ParticleCloud predict(const ParticleCloud& posterior, const ModePropagation& propagated, const Tpm& tpm,
                      const FilterConfig& cfg, std::mt19937_64& rng);

// Convenience: propagate_all_modes + predict.
ParticleCloud predict(const ParticleCloud& posterior, const OwnState& own, double u_m, double dt, const Tpm& tpm,
                      const LagModel& model, const std::vector<double>& mode_commands, const FilterConfig& cfg,
                      std::mt19937_64& rng);

/// Bearing measurement update. Returns false when every likelihood vanished and
/// the weights fell back to uniform.
bool update(ParticleCloud& cloud, double y, double gamma_m, double sigma_nu, Exec exec = Exec::Serial);

double effective_sample_size(const ParticleCloud& cloud);

// Systematic resampling over the whole cloud; modes travel with their particles.
void systematic_resample(ParticleCloud& cloud, std::mt19937_64& rng);

/// Resamples when N_eff < threshold * N_p. Returns whether it did.
bool resample_if_needed(ParticleCloud& cloud, double ess_threshold, std::mt19937_64& rng);

void add_jitter(ParticleCloud& cloud, const std::array<double, 4>& sd, std::mt19937_64& rng);

}  // namespace kpm
