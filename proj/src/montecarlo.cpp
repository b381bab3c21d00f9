#include "kpm/montecarlo.hpp"

#include <chrono>
#include <cmath>
#include <iomanip>
#include <map>
#include <ostream>
#include <stdexcept>

#include "kpm/rng.hpp"
#include "kpm/zem_bridge.hpp"

namespace kpm {

void McConfig::validate() const {
    scenario.validate();
    filter.validate();
    variant.validate();
    if (n_runs < 1) throw std::invalid_argument("mc: n_runs must be >= 1");
    if (parallelism < 1) throw std::invalid_argument("mc: parallelism must be >= 1");
    if (!(tpm_stay >= 0.0 && tpm_stay <= 1.0)) throw std::invalid_argument("mc: tpm_stay must lie in [0, 1]");
    if (scoring.empty()) throw std::invalid_argument("mc: at least one scoring warhead is required");
    for (const auto& w : scoring) WarheadModel::preset(w);
}

std::string target_name(SwitchLaw law) { return law == SwitchLaw::Smart ? "smart" : "nominal"; }

SwitchLaw parse_target(const std::string& s) {
    if (s == "nominal") return SwitchLaw::Nominal;
    if (s == "smart") return SwitchLaw::Smart;
    throw std::invalid_argument("unknown target kind '" + s + "' (expected nominal|smart)");
}

namespace {

TargetProfile draw_profile(const ScenarioConfig& sc, std::mt19937_64& rng) {
    const bool smart = sc.switch_law == SwitchLaw::Smart;
    const double lo = smart ? sc.smart_switch_lo : sc.nominal_switch_lo;
    const double hi = smart ? sc.smart_switch_hi : sc.nominal_switch_hi;
    TargetProfile p;
    p.t_switch = lo + (hi - lo) * uniform01(rng);
    p.initial_sign = uniform01(rng) < 0.5 ? 1 : -1;
    p.a_t_max = sc.a_t_max;
    return p;
}

// Delta cloud at the true state, tagged with the target's current maneuver mode.
GameCloud truth_cloud(const EngagementState& s, double u_t, const Speeds& speeds, const GameParams& gp) {
    GameCloud g;
    g.modes = 2;
    g.points = {zem_point(s.relative(), s.own(), speeds, gp)};
    g.mode = {u_t >= 0.0 ? 0 : 1};
    g.weight = {1.0};
    return g;
}

}  // namespace

RunRecord run_engagement(const McConfig& cfg, int run_index, EngagementTrace* trace, int snapshot_every) {
    const ScenarioConfig& sc = cfg.scenario;
    const auto idx = static_cast<std::uint64_t>(run_index);
    std::mt19937_64 truth_rng = make_stream(cfg.base_seed, idx, Stream::Truth);
    std::mt19937_64 filter_rng = make_stream(cfg.base_seed, idx, Stream::Filter);
    std::mt19937_64 score_rng = make_stream(cfg.base_seed, idx, Stream::Scoring);

    RunRecord rec;
    rec.run = run_index;
    rec.seed = stream_seed(cfg.base_seed, idx, Stream::Truth);
    const TargetProfile profile = draw_profile(sc, truth_rng);
    rec.t_switch = profile.t_switch;
    rec.initial_sign = profile.initial_sign;

    const GameSpace game(sc.game_params(cfg.variant.k_lin));
    const Tpm tpm = cfg.tpm();
    const LagModel model = sc.lag_model();
    const Speeds speeds = sc.speeds();
    const std::vector<double> mode_cmds = bang_bang_mode_commands(sc.a_t_max);
    const double dt = sc.dt();

    TruthSim sim(sc, profile);
    ParticleCloud cloud;
    ParticleCloud prev;
    ModePropagation prop;
    std::vector<double> first_priors;
    if (!cfg.perfect_information) {
        cloud = init_cloud(sim.state().relative(), cfg.filter, 2, filter_rng);
        const GameCloud g0 = to_game_cloud(cloud, sim.state().own(), speeds, game.params(), cfg.filter.exec);
        first_priors = likelihoods(partition(g0, game), g0.weight);
    }

    double u_m = 0.0;
    OwnState own_prev = sim.state().own();
    const int max_steps = static_cast<int>(std::ceil(sc.t_cap * sc.f_hz));
    for (int k = 0; k <= max_steps; ++k) {
        const EngagementState& s = sim.state();
        double y = 0.0;
        GuidanceOutput g;
        if (cfg.perfect_information) {
            y = measure(s.own(), s.relative(), 0.0, truth_rng);
            if (sim.closing()) {
                const GameCloud tc = truth_cloud(s, sim.target_command_now(), speeds, game.params());
                const std::vector<double> pri = tc.weight.size() ? likelihoods(partition(tc, game), tc.weight)
                                                                 : std::vector<double>{};
                g = guide_game_cloud(cfg.variant, tc, pri, game);
            } else {
                g.terminal = true;
            }
        } else {
            if (k > 0) {
                prop = propagate_all_modes(prev, own_prev, u_m, dt, model, mode_cmds, cfg.filter.exec);
                cloud = predict(prev, prop, tpm, cfg.filter, filter_rng);
            }
            y = measure(s.own(), s.relative(), sc.sigma_nu, truth_rng);
            if (!update(cloud, y, s.gamma_m, cfg.filter.sigma_nu, cfg.filter.exec)) ++rec.degenerate_updates;
            if (cfg.filter.mixing == MixingScheme::MarkovJump) {
                if (resample_if_needed(cloud, cfg.filter.ess_threshold, filter_rng) &&
                    cfg.filter.jitter == JitterScheme::AfterResample)
                    add_jitter(cloud, cfg.filter.jitter_sd(cloud.size()), filter_rng);
            }
            GuidanceInputs in;
            in.cloud = &cloud;
            in.own = s.own();
            if (k > 0) {
                in.prev = &prev;
                in.prev_propagated = &prop;
            } else {
                in.first_step_priors = &first_priors;
            }
            if (cfg.variant.kind == GuidanceVariant::Kind::Regular) {
                in.prev = nullptr;
                in.prev_propagated = nullptr;
            }
            g = guide(cfg.variant, in, game, tpm, speeds, cfg.filter.exec);
        }
        if (g.report) {
            if (g.report->fallback) ++rec.fallbacks;
            else ++rec.decisions;
        }

        const double u_t = sim.target_command_now();
        if (trace != nullptr) {
            trace->rows.push_back({s.t, s.rho, s.lambda, s.gamma_m, s.gamma_t, s.a_m, s.a_t, g.u_m, u_t, y});
            if (snapshot_every > 0 && !cfg.perfect_information && k % snapshot_every == 0) {
                trace->snapshots.push_back(cloud);
                trace->snapshot_times.push_back(s.t);
            }
        }

        if (!sim.closing()) {
            // One more interval so the closest approach is bracketed by samples.
            sim.advance(u_m);
            break;
        }
        own_prev = s.own();
        if (!cfg.perfect_information) prev = cloud;
        u_m = g.u_m;
        sim.advance(u_m);
        rec.steps = k + 1;
    }

    rec.t_final = sim.state().t;
    const auto& ranges = sim.range_history();
    try {
        rec.miss = miss_distance(ranges);
    } catch (const std::runtime_error&) {
        rec.flagged = true;
        rec.miss = ranges.back().rho;
    }
    for (const auto& name : cfg.scoring) {
        const double pk = kill_prob(WarheadModel::preset(name), rec.miss);
        rec.kill_prob.push_back(pk);
        rec.kill_draw.push_back(uniform01(score_rng) < pk ? 1 : 0);
    }
    return rec;
}

double run_perfect_information(const ScenarioConfig& scenario, const GuidanceVariant& variant,
                               const TargetProfile& profile) {
    const GameSpace game(scenario.game_params(variant.k_lin));
    const Speeds speeds = scenario.speeds();
    TruthSim sim(scenario, profile);
    const int max_steps = static_cast<int>(std::ceil(scenario.t_cap * scenario.f_hz));
    double u_m = 0.0;
    for (int k = 0; k <= max_steps; ++k) {
        if (!sim.closing()) {
            sim.advance(u_m);
            break;
        }
        const EngagementState& s = sim.state();
        const GameCloud tc = truth_cloud(s, sim.target_command_now(), speeds, game.params());
        const std::vector<double> pri = likelihoods(partition(tc, game), tc.weight);
        u_m = guide_game_cloud(variant, tc, pri, game).u_m;
        sim.advance(u_m);
    }
    return miss_distance(sim.range_history());
}

McSummary run_batch(const McConfig& cfg) {
    cfg.validate();
    const auto t0 = std::chrono::steady_clock::now();
    McSummary s;
    s.scoring = cfg.scoring;
    s.records.resize(static_cast<std::size_t>(cfg.n_runs));

    // Index-keyed results: the reduction below never depends on scheduling.
#pragma omp parallel for schedule(dynamic, 1) num_threads(cfg.parallelism)
    for (int i = 0; i < cfg.n_runs; ++i) s.records[static_cast<std::size_t>(i)] = run_engagement(cfg, i);

    const std::size_t nw = cfg.scoring.size();
    s.sskp.assign(nw, 0.0);
    s.sskp_bernoulli.assign(nw, 0.0);
    s.std_error.assign(nw, 0.0);
    std::vector<double> misses;
    misses.reserve(s.records.size());
    for (const auto& r : s.records) {
        for (std::size_t w = 0; w < nw; ++w) {
            s.sskp[w] += r.kill_prob[w];
            s.sskp_bernoulli[w] += r.kill_draw[w];
        }
        misses.push_back(r.miss);
        if (r.flagged) ++s.flagged;
    }
    const double n = static_cast<double>(cfg.n_runs);
    for (std::size_t w = 0; w < nw; ++w) {
        s.sskp[w] /= n;
        s.sskp_bernoulli[w] /= n;
        s.std_error[w] = std::sqrt(std::max(0.0, s.sskp[w] * (1.0 - s.sskp[w])) / n);
    }
    s.cdf = empirical_cdf(misses);
    s.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return s;
}

std::vector<SweepCell> sweep(const McConfig& base, const std::vector<GuidanceVariant::Kind>& kinds,
                             const std::vector<std::string>& warheads) {
    std::vector<SweepCell> cells;
    const std::string target = target_name(base.scenario.switch_law);
    for (const auto kind : kinds) {
        McConfig cfg = base;
        cfg.variant.kind = kind;
        if (kind != GuidanceVariant::Kind::KPM) {
            cfg.scoring = warheads;
            const McSummary s = run_batch(cfg);
            for (std::size_t w = 0; w < warheads.size(); ++w)
                cells.push_back({cfg.variant.name(), warheads[w], target, s.sskp[w], s.std_error[w], cfg.n_runs});
        } else {
            for (const auto& w : warheads) {
                cfg.variant.warhead = WarheadModel::preset(w);
                cfg.scoring = {w};
                const McSummary s = run_batch(cfg);
                cells.push_back({cfg.variant.name(), w, target, s.sskp[0], s.std_error[0], cfg.n_runs});
            }
        }
    }
    return cells;
}

void write_runs_csv(std::ostream& os, const McSummary& s) {
    os << std::setprecision(17);
    os << "run,seed,t_switch_s,initial_sign,miss_m";
    for (const auto& w : s.scoring) os << ",kill_prob_" << w << ",kill_draw_" << w;
    os << ",t_final_s,steps,decisions,fallbacks,degenerate_updates,flagged\n";
    for (const auto& r : s.records) {
        os << r.run << ',' << r.seed << ',' << r.t_switch << ',' << r.initial_sign << ',' << r.miss;
        for (std::size_t w = 0; w < r.kill_prob.size(); ++w) os << ',' << r.kill_prob[w] << ',' << r.kill_draw[w];
        os << ',' << r.t_final << ',' << r.steps << ',' << r.decisions << ',' << r.fallbacks << ','
           << r.degenerate_updates << ',' << (r.flagged ? 1 : 0) << '\n';
    }
}

void write_cdf_csv(std::ostream& os, const McSummary& s) {
    os << std::setprecision(17) << "miss_m,cdf\n";
    for (const auto& p : s.cdf) os << p.miss << ',' << p.cdf << '\n';
}

void write_sweep_csv(std::ostream& os, const std::vector<SweepCell>& cells, const std::vector<std::string>& warheads) {
    std::map<std::string, std::map<std::string, const SweepCell*>> grid;
    std::vector<std::string> order;
    for (const auto& c : cells) {
        if (!grid.count(c.variant)) order.push_back(c.variant);
        grid[c.variant][c.warhead] = &c;
    }
    os << std::setprecision(6) << "variant,target,n_runs";
    for (const auto& w : warheads) os << ",sskp_" << w << ",stderr_" << w;
    os << '\n';
    for (const auto& v : order) {
        const auto& row = grid[v];
        const SweepCell* any = row.begin()->second;
        os << v << ',' << any->target << ',' << any->n_runs;
        for (const auto& w : warheads) {
            const auto it = row.find(w);
            if (it == row.end()) os << ",,";
            else os << ',' << it->second->sskp << ',' << it->second->std_error;
        }
        os << '\n';
    }
}

void write_trace_csv(std::ostream& os, const EngagementTrace& trace) {
    os << std::setprecision(12)
       << "t_s,rho_m,lambda_rad,gamma_m_rad,gamma_t_rad,a_m_mps2,a_t_mps2,u_m_mps2,u_t_mps2,y_rad\n";
    for (const auto& r : trace.rows)
        os << r.t << ',' << r.rho << ',' << r.lambda << ',' << r.gamma_m << ',' << r.gamma_t << ',' << r.a_m << ','
           << r.a_t << ',' << r.u_m << ',' << r.u_t << ',' << r.y << '\n';
}

void write_cloud_csv(std::ostream& os, const ParticleCloud& cloud) {
    os << std::setprecision(17) << "index,mode,weight,rho_m,lambda_rad,gamma_t_rad,a_t_mps2\n";
    for (std::size_t i = 0; i < cloud.size(); ++i)
        os << i << ',' << cloud.mode[i] << ',' << cloud.weight[i] << ',' << cloud.rho[i] << ',' << cloud.lambda[i]
           << ',' << cloud.gamma_t[i] << ',' << cloud.a_t[i] << '\n';
}

}  // namespace kpm
