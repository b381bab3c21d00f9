#pragma once

#include <optional>
#include <string>
#include <vector>

#include "kpm/decision.hpp"

namespace kpm {

struct GuidanceVariant {
    enum class Kind { Regular, EA, KPM };
    enum class RegularPoint { Mean, Map };

    Kind kind = Kind::Regular;
    WarheadModel warhead = WarheadModel::preset("medium");  // cost model, used by KPM only
    double horizon_s = 0.01;
    double k_lin = 0.5;
    RegularPoint regular_point = RegularPoint::Mean;
    std::size_t max_representatives = 0;

    void validate() const;
    std::string name() const;
    CostFunctional cost() const;

    static Kind parse_kind(const std::string& s);
    static std::string kind_name(Kind k);
};

struct GuidanceInputs {
    const ParticleCloud* cloud = nullptr;  // posterior at t_k
    OwnState own;                          // interceptor at t_k
    // Previous posterior and its one-interval propagation under every mode.
    const ParticleCloud* prev = nullptr;
    const ModePropagation* prev_propagated = nullptr;
    // Used when no previous posterior exists yet.
    const std::vector<double>* first_step_priors = nullptr;
};

struct GuidanceOutput {
    double u_m = 0.0;      // [m/s^2]
    double u_bar = 0.0;    // normalized
    bool terminal = false;
    std::optional<RiskReport> report;
};

/// One guidance decision. Regular applies the deterministic law to the filter's
/// mean (or MAP) game point; EA and KPM run the Bayesian decision with miss
/// distance or miss probability cost.
GuidanceOutput guide(const GuidanceVariant& variant, const GuidanceInputs& in, const GameSpace& game, const Tpm& tpm,
                     const Speeds& speeds, Exec exec = Exec::Serial);

// Guidance on a known game-space cloud (used with perfect information and by tools).
GuidanceOutput guide_game_cloud(const GuidanceVariant& variant, const GameCloud& cloud,
                                std::span<const double> priors, const GameSpace& game);

}  // namespace kpm
