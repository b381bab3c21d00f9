#pragma once

#include <span>
#include <string>
#include <vector>

#include "kpm/game_space.hpp"
#include "kpm/immpf.hpp"
#include "kpm/lethality.hpp"

namespace kpm {

// A particle cloud expressed in game-space coordinates.
struct GameCloud {
    std::vector<GamePoint> points;
    std::vector<int> mode;
    std::vector<double> weight;
    int modes = 2;

    std::size_t size() const { return points.size(); }
};

/// Game-space view of a filter cloud seen from the interceptor's own state.
GameCloud to_game_cloud(const ParticleCloud& cloud, const OwnState& own, const Speeds& speeds,
                        const GameParams& params, Exec exec = Exec::Serial);

/// Hypotheses, 0-based: 0 = upper regular, 1..R = singular with target mode r-1,
/// R+1 = lower regular.
struct HypothesisPartition {
    int modes = 2;
    std::vector<int> assignment;
    std::vector<Region> region;
    std::vector<std::vector<std::size_t>> members;

    int count() const { return modes + 2; }
    int upper() const { return 0; }
    int lower() const { return modes + 1; }
    bool singular(int h) const { return h >= 1 && h <= modes; }
};

std::string hypothesis_label(int h, int modes);

HypothesisPartition partition(const GameCloud& cloud, const GameSpace& game);

// P(Y | H_j): weight mass of each hypothesis.
std::vector<double> likelihoods(const HypothesisPartition& part, std::span<const double> weights);

enum class CostKind { MissDistance, MissProbability };

struct CostFunctional {
    CostKind kind = CostKind::MissDistance;
    WarheadModel warhead = WarheadModel::probabilistic(10.0, 0.5);

    static CostFunctional miss_distance() { return {CostKind::MissDistance, WarheadModel::probabilistic(10.0, 0.5)}; }
    static CostFunctional miss_probability(const WarheadModel& w) { return {CostKind::MissProbability, w}; }

    double operator()(double miss) const { return kind == CostKind::MissDistance ? std::abs(miss) : miss_prob(warhead, miss); }
    std::string describe() const;
};

struct PriorBreakdown {
    std::vector<double> priors;
    std::vector<double> given_switch;     // Pr(H_j | Y_{k-1}, SW)
    std::vector<double> given_no_switch;  // Pr(H_j | Y_{k-1}, NSW)
    double p_switch = 0.0;
};

/// Hypothesis priors by total probability over switch / no-switch of the target
/// during the last interval. `propagated` holds the previous posterior pushed one
/// interval under every mode command; it is re-partitioned from `own_now`.
PriorBreakdown priors(const ParticleCloud& prev_posterior, const ModePropagation& propagated, const Tpm& tpm,
                      const OwnState& own_now, const Speeds& speeds, const GameSpace& game, Exec exec = Exec::Serial);

/// Same, propagating the previous posterior itself from its own state over dt.
PriorBreakdown priors(const ParticleCloud& prev_posterior, const OwnState& own_prev, double u_m, double dt,
                      const LagModel& model, const std::vector<double>& mode_commands, const Tpm& tpm,
                      const OwnState& own_now, const GameSpace& game);

// Pr(SW) = sum_r Pr(mode r) (1 - Pi_rr).
double switch_probability(std::span<const double> mode_probabilities, const Tpm& tpm);

struct CostOptions {
    double horizon = 0.05;  // normalized: (1/f) / tau_M
    // Normalized evader command of each target mode.
    std::vector<double> mode_commands{1.0, -1.0};
    // When > 0, the pursuer side of a cross cost keeps at most this many
    // weight-proportional representatives.
    std::size_t max_representatives = 0;
};

using CostMatrix = std::vector<std::vector<double>>;  // C[i][j]: decide H_i while H_j holds

CostMatrix costs(const HypothesisPartition& part, const GameCloud& cloud, const CostFunctional& functional,
                 const GameSpace& game, const CostOptions& options);

// Command applied when a hypothesis with no particles is assumed.
double empty_hypothesis_command(int h, int modes);

/// I_i = sum_{j != i} P_j P(Y|H_j) (C_ij - C_jj).
std::vector<double> risks(std::span<const double> priors, std::span<const double> likelihoods, const CostMatrix& c);

struct RiskReport {
    std::vector<double> priors;
    std::vector<double> likelihoods;
    CostMatrix cost;
    std::vector<double> risks;
    int chosen = -1;   // -1 when the deterministic fallback was used
    bool fallback = false;
    double command = 0.0;  // normalized
    PriorBreakdown prior_detail;
};

inline constexpr double kZeroRisk = 1e-15;

/// Normalized command from the decided hypothesis, or the deterministic law at the
/// weighted-mean game point when every risk is (numerically) zero.
double command(const RiskReport& report, const HypothesisPartition& part, const GameCloud& cloud,
               const GameSpace& game);

// Weighted mean (z_bar, tau) of a game cloud.
GamePoint weighted_mean_point(const GameCloud& cloud);

/// Demonstration cloud on which miss-distance and miss-probability costs pick
/// opposite sides. At tau = 2, most mass sits deep in the singular band with mixed
/// modes. Sixteen lower regular particles miss by 1 to 4.75 m. Four upper regular
/// particles miss by 8 to 10.5 m, straddling the medium warhead's effective radius.
GameCloud example_cloud(const GameSpace& game, int singular = 980);

/// Full decision pipeline on a game-space cloud with given priors.
RiskReport decide(const GameCloud& cloud, std::span<const double> priors, const CostFunctional& functional,
                  const GameSpace& game, const CostOptions& options);

}  // namespace kpm
