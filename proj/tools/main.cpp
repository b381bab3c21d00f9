#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "kpm/config.hpp"
#include "kpm/decision.hpp"
#include "kpm/game_space.hpp"
#include "kpm/lethality.hpp"
#include "kpm/montecarlo.hpp"

using namespace kpm;
namespace fs = std::filesystem;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitRuntime = 3;

const std::vector<std::string> kWarheads{"htk", "small", "medium", "large"};

// Flags shared by the simulation subcommands; each overrides the config file.
struct Common {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::optional<int> runs;
    std::optional<int> particles;
    std::optional<int> parallelism;
    std::optional<std::string> variant;
    std::optional<std::string> warhead;
    std::optional<std::string> target;
    std::string out = "out";
};

void add_common(CLI::App* sub, Common& c) {
    sub->add_option("--config", c.config, "JSON config file")->check(CLI::ExistingFile);
    sub->add_option("--seed", c.seed, "base seed");
    sub->add_option("--runs", c.runs, "Monte Carlo runs");
    sub->add_option("--particles", c.particles, "particles per target mode");
    sub->add_option("--parallelism", c.parallelism, "worker threads");
    sub->add_option("--variant", c.variant, "guidance variant: regular|ea|kpm");
    sub->add_option("--warhead", c.warhead, "KPM cost warhead preset: htk|small|medium|large");
    sub->add_option("--target", c.target, "target switch law: nominal|smart");
    sub->add_option("--out", c.out, "output directory");
}

McConfig build_config(const Common& c) {
    McConfig cfg = c.config.empty() ? McConfig{} : load_config(c.config);
    try {
        if (c.seed) cfg.base_seed = *c.seed;
        if (c.runs) cfg.n_runs = *c.runs;
        if (c.particles) cfg.filter.particles_per_mode = *c.particles;
        if (c.parallelism) cfg.parallelism = *c.parallelism;
        if (c.variant) cfg.variant.kind = GuidanceVariant::parse_kind(*c.variant);
        if (c.warhead) cfg.variant.warhead = WarheadModel::preset(*c.warhead);
        if (c.target) cfg.scenario.switch_law = parse_target(*c.target);
        cfg.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
    return cfg;
}

std::string command_line(int argc, char** argv) {
    std::string s;
    for (int i = 0; i < argc; ++i) s += (i ? " " : "") + std::string(argv[i]);
    return s;
}

class Outputs {
public:
    Outputs(const fs::path& dir, const McConfig& cfg, std::string command) : dir_(dir), cfg_(cfg) {
        fs::create_directories(dir_);
        m_.digest = config_digest(cfg);
        m_.tool_version = kToolVersion;
        m_.base_seed = cfg.base_seed;
        m_.started_utc = utc_now();
        m_.command = std::move(command);
    }

    std::ofstream open(const std::string& name) {
        m_.outputs.push_back((dir_ / name).string());
        std::ofstream f(dir_ / name);
        if (!f) throw std::runtime_error("cannot write " + (dir_ / name).string());
        return f;
    }

    void finish() {
        m_.finished_utc = utc_now();
        std::ofstream(dir_ / "manifest.json") << manifest_json(m_, cfg_) << '\n';
    }

private:
    fs::path dir_;
    McConfig cfg_;
    RunManifest m_;
};

int cmd_run(const Common& c, int run_index, int snapshot_every, const std::string& cmd) {
    const McConfig cfg = build_config(c);
    Outputs out(c.out, cfg, cmd);
    EngagementTrace trace;
    const RunRecord r = run_engagement(cfg, run_index, &trace, snapshot_every);
    {
        auto f = out.open("trace.csv");
        write_trace_csv(f, trace);
    }
    for (std::size_t i = 0; i < trace.snapshots.size(); ++i) {
        std::ostringstream name;
        name << "cloud_" << std::setw(4) << std::setfill('0') << i << ".csv";
        auto f = out.open(name.str());
        write_cloud_csv(f, trace.snapshots[i]);
    }
    out.finish();
    std::printf("run %d: t_switch %.3f s, sign %+d, miss %.4f m, Pk[%s] %.4f%s\n", r.run, r.t_switch, r.initial_sign,
                r.miss, cfg.scoring.front().c_str(), r.kill_prob.front(), r.flagged ? " (flagged)" : "");
    return 0;
}

int cmd_mc(const Common& c, const std::string& cmd) {
    const McConfig cfg = build_config(c);
    Outputs out(c.out, cfg, cmd);
    const McSummary s = run_batch(cfg);
    {
        auto f = out.open("runs.csv");
        write_runs_csv(f, s);
    }
    {
        auto f = out.open("cdf.csv");
        write_cdf_csv(f, s);
    }
    out.finish();
    std::printf("%s, %s target, %zu runs, %.1f s\n", cfg.variant.name().c_str(),
                target_name(cfg.scenario.switch_law).c_str(), s.records.size(), s.wall_seconds);
    for (std::size_t w = 0; w < s.scoring.size(); ++w)
        std::printf("  SSKP[%s] = %.4f +- %.4f (Bernoulli %.4f)\n", s.scoring[w].c_str(), s.sskp[w], s.std_error[w],
                    s.sskp_bernoulli[w]);
    if (s.flagged) std::printf("  %d flagged runs\n", s.flagged);
    return 0;
}

int cmd_sweep(const Common& c, const std::string& cmd) {
    const McConfig cfg = build_config(c);
    Outputs out(c.out, cfg, cmd);
    const auto cells =
        sweep(cfg, {GuidanceVariant::Kind::Regular, GuidanceVariant::Kind::EA, GuidanceVariant::Kind::KPM}, kWarheads);
    {
        auto f = out.open("sskp_table.csv");
        write_sweep_csv(f, cells, kWarheads);
    }
    out.finish();
    write_sweep_csv(std::cout, cells, kWarheads);
    return 0;
}

std::vector<double> read_misses(const std::string& path, const std::string& column) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open '" + path + "'");
    std::vector<double> v;
    std::string line;
    std::size_t col = 0;
    bool first = true;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<std::string> cells;
        std::stringstream ss(line);
        for (std::string cell; std::getline(ss, cell, ',');) cells.push_back(cell);
        if (first) {
            first = false;
            const auto it = std::find(cells.begin(), cells.end(), column);
            if (it != cells.end()) {
                col = static_cast<std::size_t>(it - cells.begin());
                continue;
            }
        }
        if (col >= cells.size()) throw ConfigError("'" + path + "': short row: " + line);
        try {
            v.push_back(std::stod(cells[col]));
        } catch (const std::exception&) {
            throw ConfigError("'" + path + "': not a number: " + cells[col]);
        }
    }
    return v;
}

int cmd_design(const std::string& input, const std::string& column, double kappa) {
    std::vector<double> m = read_misses(input, column);
    double r = 0.0;
    try {
        r = design_radius(m, kappa);
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
    std::sort(m.begin(), m.end());
    std::printf("%.10g\n", r);
    std::fprintf(stderr, "%zu samples, F(r) = %.6f\n", m.size(), empirical_cdf_at(m, r));
    return 0;
}

int cmd_gamespace(const Common& c, double tau_max, double tau_step, double z_max, double z_step, const std::string& cmd) {
    McConfig cfg = build_config(c);
    if (!(tau_step > 0.0 && z_step > 0.0 && tau_max > 0.0 && z_max > 0.0))
        throw ConfigError("gamespace: grid extents and steps must be positive");
    const GameSpace game(cfg.scenario.game_params(cfg.variant.k_lin));
    Outputs out(c.out, cfg, cmd);
    auto f = out.open("gamespace.csv");
    f << std::setprecision(10) << "tau,z_bar,region,miss_value_m,miss_prob\n";
    const int nt = static_cast<int>(std::floor(tau_max / tau_step + 1e-9));
    const int nz = static_cast<int>(std::floor(z_max / z_step + 1e-9));
    std::map<Region, long> count;
    for (int i = 0; i <= nt; ++i)
        for (int j = -nz; j <= nz; ++j) {
            const GamePoint p{j * z_step, i * tau_step};
            const Region r = game.classify(p);
            ++count[r];
            const double m = game.miss_value(p, r);
            f << p.tau << ',' << p.z_bar << ',' << to_string(r) << ',' << m << ',' << miss_prob(cfg.variant.warhead, m)
              << '\n';
        }
    f.close();
    out.finish();
    std::printf("tau_s = %.6f, singular miss = %.6f m\n", game.tau_s(), game.singular_miss());
    std::printf("grid points: %s %ld, %s %ld, %s %ld\n", to_string(Region::UpperRegular), count[Region::UpperRegular],
                to_string(Region::Singular), count[Region::Singular], to_string(Region::LowerRegular),
                count[Region::LowerRegular]);
    return 0;
}

GameCloud read_game_cloud(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open '" + path + "'");
    std::string line;
    if (!std::getline(in, line) || line.rfind("z_bar,tau,mode,weight", 0) != 0)
        throw ConfigError("'" + path + "': expected header z_bar,tau,mode,weight");
    GameCloud c;
    c.modes = 2;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::stringstream ss(line);
        double z, tau, w;
        int mode;
        char comma;
        if (!(ss >> z >> comma >> tau >> comma >> mode >> comma >> w))
            throw ConfigError("'" + path + "': bad row: " + line);
        c.points.push_back({z, tau});
        c.mode.push_back(mode);
        c.weight.push_back(w);
    }
    if (c.size() == 0) throw ConfigError("'" + path + "': empty cloud");
    double s = 0.0;
    for (double w : c.weight) s += w;
    if (!(s > 0.0)) throw ConfigError("'" + path + "': weights must have positive sum");
    for (double& w : c.weight) w /= s;
    return c;
}

int cmd_example(const std::string& cloud_path, const std::string& warhead, double horizon_s) {
    const McConfig cfg;
    const GameSpace game(cfg.scenario.game_params(cfg.variant.k_lin));
    WarheadModel w;
    try {
        w = WarheadModel::preset(warhead);
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
    if (!(horizon_s > 0.0)) throw ConfigError("example: horizon must be positive");
    const GameCloud c = cloud_path.empty() ? example_cloud(game) : read_game_cloud(cloud_path);
    const HypothesisPartition part = partition(c, game);
    const auto l = likelihoods(part, c.weight);
    CostOptions opt;
    opt.horizon = horizon_s / game.params().tau_m;

    std::printf("%-30s", "particles");
    for (int h = 0; h < part.count(); ++h) std::printf(" %14s", hypothesis_label(h, part.modes).c_str());
    std::printf("\n%-30s", "");
    for (const auto& m : part.members) std::printf(" %14zu", m.size());
    std::printf("\n");
    for (const CostFunctional& J : {CostFunctional::miss_distance(), CostFunctional::miss_probability(w)}) {
        const RiskReport r = decide(c, l, J, game, opt);
        std::printf("%-30s", J.describe().c_str());
        for (double v : r.risks) std::printf(" %14.4g", v);
        std::printf("   -> %s, u = %+.3f\n", r.fallback ? "fallback" : hypothesis_label(r.chosen, part.modes).c_str(),
                    r.command);
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Bayesian kill-probability-maximizing guidance: simulation and analysis tool"};
    app.require_subcommand(1);
    const std::string cmd = command_line(argc, argv);

    Common common;
    auto* run = app.add_subcommand("run", "single engagement with trajectory and cloud dumps");
    add_common(run, common);
    int run_index = 0, snapshot_every = 0;
    run->add_option("--run-index", run_index, "run index within the seed stream");
    run->add_option("--snapshot-every", snapshot_every, "dump the particle cloud every N steps (0 = never)");

    auto* mc = app.add_subcommand("mc", "Monte Carlo batch: runs.csv and cdf.csv");
    add_common(mc, common);

    auto* sw = app.add_subcommand("sweep", "variants x warheads SSKP table");
    add_common(sw, common);

    auto* design = app.add_subcommand("design", "smallest lethal radius covering a fraction kappa of misses");
    std::string input, column = "miss_m";
    double kappa = 0.9;
    design->add_option("input", input, "CSV of miss samples (a runs.csv works)")->required();
    design->add_option("--column", column, "column holding the misses");
    design->add_option("--kappa", kappa, "required fraction in (0, 1]");

    auto* gs = app.add_subcommand("gamespace", "region, miss value and miss probability over a game-space grid");
    add_common(gs, common);
    double tau_max = 6.0, tau_step = 0.05, z_max = 3.0, z_step = 0.02;
    gs->add_option("--tau-max", tau_max);
    gs->add_option("--tau-step", tau_step);
    gs->add_option("--z-max", z_max);
    gs->add_option("--z-step", z_step);

    auto* ex = app.add_subcommand("example", "risk rows of both cost functionals on a game-space cloud");
    std::string cloud_path, ex_warhead = "medium";
    double horizon = 0.01;
    ex->add_option("--cloud", cloud_path, "CSV z_bar,tau,mode,weight (default: built-in demonstration cloud)");
    ex->add_option("--warhead", ex_warhead, "warhead preset for the miss-probability cost");
    ex->add_option("--horizon", horizon, "prediction horizon [s]");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitConfig;
    }

    try {
        if (*run) return cmd_run(common, run_index, snapshot_every, cmd);
        if (*mc) return cmd_mc(common, cmd);
        if (*sw) return cmd_sweep(common, cmd);
        if (*design) return cmd_design(input, column, kappa);
        if (*gs) return cmd_gamespace(common, tau_max, tau_step, z_max, z_step, cmd);
        if (*ex) return cmd_example(cloud_path, ex_warhead, horizon);
    } catch (const ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return kExitConfig;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitRuntime;
    }
    return 0;
}
