#include "kpm/immpf.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>

#include "kpm/rng.hpp"

namespace kpm {

Tpm::Tpm(int modes, std::vector<double> row_major) : modes_(modes), p_(std::move(row_major)) {
    if (modes_ < 1) throw std::invalid_argument("tpm: need at least one mode");
    if (p_.size() != static_cast<std::size_t>(modes_ * modes_)) throw std::invalid_argument("tpm: size mismatch");
    for (int i = 0; i < modes_; ++i) {
        double row = 0.0;
        for (int j = 0; j < modes_; ++j) {
            const double v = (*this)(i, j);
            if (!(v >= 0.0 && v <= 1.0)) throw std::invalid_argument("tpm: entries must lie in [0, 1]");
            row += v;
        }
        if (std::abs(row - 1.0) > 1e-12) throw std::invalid_argument("tpm: row " + std::to_string(i) + " does not sum to 1");
    }
}

Tpm Tpm::two_mode(double p_stay) { return Tpm(2, {p_stay, 1.0 - p_stay, 1.0 - p_stay, p_stay}); }

Tpm Tpm::identity(int modes) {
    std::vector<double> p(static_cast<std::size_t>(modes * modes), 0.0);
    for (int i = 0; i < modes; ++i) p[static_cast<std::size_t>(i * modes + i)] = 1.0;
    return Tpm(modes, std::move(p));
}

void ParticleCloud::resize(std::size_t n) {
    rho.resize(n);
    lambda.resize(n);
    gamma_t.resize(n);
    a_t.resize(n);
    mode.resize(n);
    weight.resize(n);
}

void ParticleCloud::set(std::size_t i, const Particle& p) {
    rho[i] = p.state.rho;
    lambda[i] = p.state.lambda;
    gamma_t[i] = p.state.gamma_t;
    a_t[i] = p.state.a_t;
    mode[i] = p.mode;
    weight[i] = p.weight;
}

void ParticleCloud::push_back(const Particle& p) {
    resize(size() + 1);
    set(size() - 1, p);
}

double ParticleCloud::weight_sum() const { return std::accumulate(weight.begin(), weight.end(), 0.0); }

void ParticleCloud::normalize() {
    const double s = weight_sum();
    if (!(s > 0.0) || !std::isfinite(s)) {
        std::fill(weight.begin(), weight.end(), 1.0 / static_cast<double>(size()));
        return;
    }
    for (double& w : weight) w /= s;
}

std::vector<double> ParticleCloud::mode_probabilities() const {
    std::vector<double> p(static_cast<std::size_t>(modes), 0.0);
    for (std::size_t i = 0; i < size(); ++i) p[static_cast<std::size_t>(mode[i])] += weight[i];
    return p;
}

std::size_t ParticleCloud::count_in_mode(int m) const {
    return static_cast<std::size_t>(std::count(mode.begin(), mode.end(), m));
}

RelativeState ParticleCloud::weighted_mean() const {
    RelativeState m;
    for (std::size_t i = 0; i < size(); ++i) {
        m.rho += weight[i] * rho[i];
        m.lambda += weight[i] * lambda[i];
        m.gamma_t += weight[i] * gamma_t[i];
        m.a_t += weight[i] * a_t[i];
    }
    return m;
}

void FilterConfig::validate() const {
    if (particles_per_mode < 1) throw std::invalid_argument("filter: particles_per_mode must be >= 1");
    if (!(sigma_nu > 0.0)) throw std::invalid_argument("filter: sigma_nu must be positive");
    for (double sd : prior_sd)
        if (!(sd >= 0.0) || !std::isfinite(sd)) throw std::invalid_argument("filter: prior covariance is not positive semidefinite");
    if (jitter_c < 0.0) throw std::invalid_argument("filter: jitter_c must be nonnegative");
    if (!(ess_threshold >= 0.0 && ess_threshold <= 1.0)) throw std::invalid_argument("filter: ess_threshold must lie in [0, 1]");
}

std::array<double, 4> FilterConfig::jitter_sd(std::size_t n) const {
    const double shrink = jitter_c * std::pow(static_cast<double>(std::max<std::size_t>(n, 1)), -0.25);
    return {shrink * prior_sd[0], shrink * prior_sd[1], shrink * prior_sd[2], shrink * prior_sd[3]};
}

std::vector<double> bang_bang_mode_commands(double a_t_max) { return {a_t_max, -a_t_max}; }

ParticleCloud init_cloud(const RelativeState& truth, const FilterConfig& cfg, int modes, std::mt19937_64& rng) {
    cfg.validate();
    if (modes < 1) throw std::invalid_argument("init_cloud: need at least one mode");
    const auto s = static_cast<std::size_t>(cfg.particles_per_mode);
    ParticleCloud cloud;
    cloud.modes = modes;
    cloud.resize(s * static_cast<std::size_t>(modes));
    std::normal_distribution<double> n01(0.0, 1.0);
    const double w = 1.0 / static_cast<double>(cloud.size());
    std::size_t i = 0;
    for (int r = 0; r < modes; ++r) {
        for (std::size_t k = 0; k < s; ++k, ++i) {
            double rho = truth.rho;
            do {
                rho = truth.rho + cfg.prior_sd[0] * n01(rng);
            } while (!(rho > 0.0));
            cloud.rho[i] = rho;
            cloud.lambda[i] = truth.lambda + cfg.prior_sd[1] * n01(rng);
            cloud.gamma_t[i] = truth.gamma_t + cfg.prior_sd[2] * n01(rng);
            cloud.a_t[i] = truth.a_t + cfg.prior_sd[3] * n01(rng);
            cloud.mode[i] = r;
            cloud.weight[i] = w;
        }
    }
    return cloud;
}

ModePropagation propagate_all_modes(const ParticleCloud& cloud, const OwnState& own, double u_m, double dt,
                                    const LagModel& model, const std::vector<double>& mode_commands, Exec exec) {
    if (mode_commands.size() != static_cast<std::size_t>(cloud.modes))
        throw std::invalid_argument("propagate: one command per mode required");
    ModePropagation out;
    const std::size_t n = cloud.size();
    out.states.assign(mode_commands.size(), std::vector<RelativeState>(n));
    out.valid.assign(mode_commands.size() * n, 0);
    for (std::size_t r = 0; r < mode_commands.size(); ++r) {
        propagate_kernel(cloud.columns(), out.states[r], std::span<std::uint8_t>(out.valid.data() + r * n, n), own,
                         u_m, mode_commands[r], dt, model, exec);
    }
    return out;
}

namespace {

// Replace particles that crossed rho <= 0 by copies of uniformly chosen valid ones.
void repair(ParticleCloud& cloud, std::vector<std::uint8_t>& ok, std::mt19937_64& rng) {
    std::vector<std::size_t> good;
    good.reserve(cloud.size());
    for (std::size_t i = 0; i < cloud.size(); ++i) {
        if (!(cloud.rho[i] > 0.0) || !std::isfinite(cloud.lambda[i])) ok[i] = 0;
        if (ok[i]) good.push_back(i);
    }
    if (good.empty() || good.size() == cloud.size()) return;
    for (std::size_t i = 0; i < cloud.size(); ++i) {
        if (ok[i]) continue;
        const std::size_t src = good[std::min(good.size() - 1, static_cast<std::size_t>(uniform01(rng) * good.size()))];
        const double w = cloud.weight[i];
        cloud.set(i, cloud.particle(src));
        cloud.weight[i] = w;
    }
}

// Systematic selection of m indices proportional to w (sum must be positive).
void systematic_indices(const std::vector<double>& w, double total, std::size_t m, double u0,
                        std::vector<std::size_t>& idx) {
    idx.resize(m);
    const double step = total / static_cast<double>(m);
    double target = u0 * step;
    double cum = w.empty() ? 0.0 : w[0];
    std::size_t j = 0;
    for (std::size_t k = 0; k < m; ++k) {
        while (cum < target && j + 1 < w.size()) cum += w[++j];
        idx[k] = j;
        target += step;
    }
}

}  // namespace

ParticleCloud predict(const ParticleCloud& post, const ModePropagation& prop, const Tpm& tpm,
                      const FilterConfig& cfg, std::mt19937_64& rng) {
    const std::size_t n = post.size();
    const int modes = post.modes;
    if (tpm.modes() != modes) throw std::invalid_argument("predict: TPM size does not match cloud modes");
    if (prop.n() != n) throw std::invalid_argument("predict: propagation does not match cloud");

    ParticleCloud out;
    out.modes = modes;
    out.k = post.k + 1;
    out.resize(n);
    std::vector<std::uint8_t> ok(n, 1);

    if (cfg.mixing == MixingScheme::Interaction) {
        const std::size_t bank = n / static_cast<std::size_t>(modes);
        if (bank * static_cast<std::size_t>(modes) != n)
            throw std::invalid_argument("predict: cloud size is not a multiple of the mode count");
        std::vector<double> mix(n);
        std::vector<std::size_t> idx;
        std::size_t o = 0;
        for (int r = 0; r < modes; ++r) {
            double total = 0.0;
            for (std::size_t j = 0; j < n; ++j) {
                mix[j] = post.weight[j] * tpm(post.mode[j], r);
                total += mix[j];
            }
            const double u0 = uniform01(rng);
            if (total > 0.0) {
                systematic_indices(mix, total, bank, u0, idx);
            } else {
                // Mode unreachable: keep the bank populated with zero mass.
                systematic_indices(post.weight, post.weight_sum(), bank, u0, idx);
            }
            const double w = total / static_cast<double>(bank);
            for (std::size_t k = 0; k < bank; ++k, ++o) {
                const std::size_t j = idx[k];
                const RelativeState& s = prop.states[static_cast<std::size_t>(r)][j];
                out.rho[o] = s.rho;
                out.lambda[o] = s.lambda;
                out.gamma_t[o] = s.gamma_t;
                out.a_t[o] = s.a_t;
                out.mode[o] = r;
                out.weight[o] = w;
                ok[o] = prop.valid[static_cast<std::size_t>(r) * n + j];
            }
        }
    } else {
        for (std::size_t j = 0; j < n; ++j) {
            const double u = uniform01(rng);
            int r = modes - 1;
            double cum = 0.0;
            for (int c = 0; c < modes; ++c) {
                cum += tpm(post.mode[j], c);
                if (u < cum) {
                    r = c;
                    break;
                }
            }
            const RelativeState& s = prop.states[static_cast<std::size_t>(r)][j];
            out.rho[j] = s.rho;
            out.lambda[j] = s.lambda;
            out.gamma_t[j] = s.gamma_t;
            out.a_t[j] = s.a_t;
            out.mode[j] = r;
            out.weight[j] = post.weight[j];
            ok[j] = prop.valid[static_cast<std::size_t>(r) * n + j];
        }
    }

    if (cfg.jitter == JitterScheme::EveryPredict && cfg.jitter_c > 0.0) add_jitter(out, cfg.jitter_sd(n), rng);
    repair(out, ok, rng);
    out.normalize();
    return out;
}

ParticleCloud predict(const ParticleCloud& posterior, const OwnState& own, double u_m, double dt, const Tpm& tpm,
                      const LagModel& model, const std::vector<double>& mode_commands, const FilterConfig& cfg,
                      std::mt19937_64& rng) {
    const ModePropagation prop = propagate_all_modes(posterior, own, u_m, dt, model, mode_commands, cfg.exec);
    return predict(posterior, prop, tpm, cfg, rng);
}

bool update(ParticleCloud& cloud, double y, double gamma_m, double sigma_nu, Exec exec) {
    const std::size_t n = cloud.size();
    std::vector<double> ll(n);
    bearing_loglik_kernel(cloud.lambda.data(), n, y, gamma_m, sigma_nu, ll.data(), exec);
    double best = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n; ++i) {
        ll[i] = cloud.weight[i] > 0.0 ? std::log(cloud.weight[i]) + ll[i] : -std::numeric_limits<double>::infinity();
        best = std::max(best, ll[i]);
    }
    if (!std::isfinite(best)) {
        std::fill(cloud.weight.begin(), cloud.weight.end(), 1.0 / static_cast<double>(n));
        return false;
    }
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        cloud.weight[i] = std::exp(ll[i] - best);
        total += cloud.weight[i];
    }
    for (double& w : cloud.weight) w /= total;
    return true;
}

double effective_sample_size(const ParticleCloud& cloud) {
    double s2 = 0.0;
    for (double w : cloud.weight) s2 += w * w;
    return s2 > 0.0 ? 1.0 / s2 : 0.0;
}

void systematic_resample(ParticleCloud& cloud, std::mt19937_64& rng) {
    const std::size_t n = cloud.size();
    std::vector<std::size_t> idx;
    systematic_indices(cloud.weight, cloud.weight_sum(), n, uniform01(rng), idx);
    ParticleCloud out;
    out.modes = cloud.modes;
    out.k = cloud.k;
    out.resize(n);
    const double w = 1.0 / static_cast<double>(n);
    for (std::size_t k = 0; k < n; ++k) {
        out.set(k, cloud.particle(idx[k]));
        out.weight[k] = w;
    }
    cloud = std::move(out);
}

bool resample_if_needed(ParticleCloud& cloud, double ess_threshold, std::mt19937_64& rng) {
    if (effective_sample_size(cloud) >= ess_threshold * static_cast<double>(cloud.size())) return false;
    systematic_resample(cloud, rng);
    return true;
}

void add_jitter(ParticleCloud& cloud, const std::array<double, 4>& sd, std::mt19937_64& rng) {
    std::normal_distribution<double> n01(0.0, 1.0);
    for (std::size_t i = 0; i < cloud.size(); ++i) {
        cloud.rho[i] += sd[0] * n01(rng);
        cloud.lambda[i] += sd[1] * n01(rng);
        cloud.gamma_t[i] += sd[2] * n01(rng);
        cloud.a_t[i] += sd[3] * n01(rng);
    }
}

}  // namespace kpm
