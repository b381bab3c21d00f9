#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "kpm/dynamics.hpp"
#include "kpm/guidance.hpp"
#include "kpm/immpf.hpp"
#include "kpm/lethality.hpp"

namespace kpm {

struct McConfig {
    ScenarioConfig scenario;
    FilterConfig filter;
    GuidanceVariant variant;
    double tpm_stay = 0.999;
    // Scoring warheads; SSKP is reported for each.
    std::vector<std::string> scoring = {"medium"};
    int n_runs = 500;
    std::uint64_t base_seed = 1;
    int parallelism = 1;
    // Guidance sees the true state instead of the filter posterior.
    bool perfect_information = false;

    void validate() const;
    Tpm tpm() const { return Tpm::two_mode(tpm_stay); }
};

struct RunRecord {
    int run = 0;
    std::uint64_t seed = 0;  // truth-stream seed of this run
    double t_switch = 0.0;
    int initial_sign = 1;
    double miss = 0.0;                 // [m]
    std::vector<double> kill_prob;     // per scoring warhead
    std::vector<int> kill_draw;        // Bernoulli outcome per scoring warhead
    double t_final = 0.0;
    int steps = 0;
    int decisions = 0;                 // steps decided by the Bayesian rule
    int fallbacks = 0;                 // steps that fell back to the deterministic law
    int degenerate_updates = 0;
    bool flagged = false;              // no closest approach before the time cap
};

struct McSummary {
    std::vector<std::string> scoring;
    std::vector<RunRecord> records;
    std::vector<double> sskp;            // mean kill probability per warhead
    std::vector<double> sskp_bernoulli;  // mean Bernoulli kill per warhead
    std::vector<double> std_error;       // binomial standard error per warhead
    std::vector<CdfPoint> cdf;
    int flagged = 0;
    double wall_seconds = 0.0;
};

/// Per-step trace of a single engagement (for the `run` tool and tests).
struct TraceRow {
    double t, rho, lambda, gamma_m, gamma_t, a_m, a_t, u_m, u_t, y;
};

struct EngagementTrace {
    std::vector<TraceRow> rows;
    std::vector<ParticleCloud> snapshots;  // every `snapshot_every` steps when requested
    std::vector<double> snapshot_times;
};

RunRecord run_engagement(const McConfig& cfg, int run_index, EngagementTrace* trace = nullptr,
                         int snapshot_every = 0);

/// Truth-fed engagement against a given switch time, returning the miss [m].
double run_perfect_information(const ScenarioConfig& scenario, const GuidanceVariant& variant,
                               const TargetProfile& profile);

McSummary run_batch(const McConfig& cfg);

struct SweepCell {
    std::string variant;
    std::string warhead;
    std::string target;
    double sskp = 0.0;
    double std_error = 0.0;
    int n_runs = 0;
};

/// Variants x warhead presets for one target kind. Regular and EA runs do not
/// depend on the warhead, so one batch is scored against every preset; KPM runs
/// one batch per warhead.
std::vector<SweepCell> sweep(const McConfig& base, const std::vector<GuidanceVariant::Kind>& kinds,
                             const std::vector<std::string>& warheads);

std::string target_name(SwitchLaw law);
SwitchLaw parse_target(const std::string& s);

void write_runs_csv(std::ostream& os, const McSummary& s);
void write_cdf_csv(std::ostream& os, const McSummary& s);
void write_sweep_csv(std::ostream& os, const std::vector<SweepCell>& cells, const std::vector<std::string>& warheads);
void write_trace_csv(std::ostream& os, const EngagementTrace& trace);
void write_cloud_csv(std::ostream& os, const ParticleCloud& cloud);

}  // namespace kpm
