// Serial reference vs OpenMP kernels, plus a small Monte Carlo batch at one and
// several workers.

#include <benchmark/benchmark.h>

#include <random>

#include "kpm/decision.hpp"
#include "kpm/immpf.hpp"
#include "kpm/kernels.hpp"
#include "kpm/montecarlo.hpp"

using namespace kpm;

namespace {

ParticleCloud make_cloud(int per_mode) {
    FilterConfig cfg;
    cfg.particles_per_mode = per_mode;
    std::mt19937_64 rng(7);
    return init_cloud({9000.0, 1.55, -1.6, 80.0}, cfg, 2, rng);
}

Exec exec_of(const benchmark::State& s) { return s.range(1) ? Exec::Parallel : Exec::Serial; }

void BM_PropagateAllModes(benchmark::State& state) {
    const ParticleCloud c = make_cloud(static_cast<int>(state.range(0)));
    const LagModel m;
    const auto cmds = bang_bang_mode_commands(196.133);
    for (auto _ : state)
        benchmark::DoNotOptimize(propagate_all_modes(c, {1.58, 40.0}, 150.0, 0.01, m, cmds, exec_of(state)));
    state.SetItemsProcessed(state.iterations() * static_cast<long>(c.size()));
}

void BM_BearingLogLik(benchmark::State& state) {
    const ParticleCloud c = make_cloud(static_cast<int>(state.range(0)));
    std::vector<double> out(c.size());
    for (auto _ : state) {
        bearing_loglik_kernel(c.lambda.data(), c.size(), 0.02, 1.57, 0.5e-3, out.data(), exec_of(state));
        benchmark::ClobberMemory();
    }
    state.SetItemsProcessed(state.iterations() * static_cast<long>(c.size()));
}

void BM_GamePoints(benchmark::State& state) {
    const ParticleCloud c = make_cloud(static_cast<int>(state.range(0)));
    std::vector<GamePoint> out(c.size());
    for (auto _ : state) {
        game_point_kernel(c.columns(), {1.58, 40.0}, Speeds{}, GameParams{}, out, exec_of(state));
        benchmark::ClobberMemory();
    }
    state.SetItemsProcessed(state.iterations() * static_cast<long>(c.size()));
}

void BM_Predict(benchmark::State& state) {
    const ParticleCloud c = make_cloud(static_cast<int>(state.range(0)));
    FilterConfig cfg;
    cfg.exec = exec_of(state);
    std::mt19937_64 rng(3);
    const LagModel m;
    const auto cmds = bang_bang_mode_commands(196.133);
    for (auto _ : state)
        benchmark::DoNotOptimize(predict(c, {1.58, 40.0}, 150.0, 0.01, Tpm::two_mode(0.999), m, cmds, cfg, rng));
}

void BM_DecisionCosts(benchmark::State& state) {
    const GameSpace game{GameParams{}};
    const GameCloud c = example_cloud(game, static_cast<int>(state.range(0)));
    const auto l = likelihoods(partition(c, game), c.weight);
    const auto J = state.range(1) ? CostFunctional::miss_probability(WarheadModel::preset("medium"))
                                  : CostFunctional::miss_distance();
    for (auto _ : state) benchmark::DoNotOptimize(decide(c, l, J, game, {}));
}

void BM_Batch(benchmark::State& state) {
    McConfig cfg;
    cfg.n_runs = 8;
    cfg.filter.particles_per_mode = 200;
    cfg.variant.kind = GuidanceVariant::Kind::EA;
    cfg.parallelism = static_cast<int>(state.range(0));
    for (auto _ : state) benchmark::DoNotOptimize(run_batch(cfg));
}

}  // namespace

BENCHMARK(BM_PropagateAllModes)->ArgsProduct({{1000, 10000}, {0, 1}})->ArgNames({"per_mode", "omp"});
BENCHMARK(BM_BearingLogLik)->ArgsProduct({{1000, 10000}, {0, 1}})->ArgNames({"per_mode", "omp"});
BENCHMARK(BM_GamePoints)->ArgsProduct({{1000, 10000}, {0, 1}})->ArgNames({"per_mode", "omp"});
BENCHMARK(BM_Predict)->ArgsProduct({{1000}, {0, 1}})->ArgNames({"per_mode", "omp"});
BENCHMARK(BM_DecisionCosts)->ArgsProduct({{980}, {0, 1}})->ArgNames({"singular", "miss_prob"});
BENCHMARK(BM_Batch)->Arg(1)->Arg(4)->ArgName("workers")->Unit(benchmark::kMillisecond)->UseRealTime();

BENCHMARK_MAIN();
