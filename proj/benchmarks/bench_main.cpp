#include <benchmark/benchmark.h>

#include "mfbn/enumeration.hpp"
#include "mfbn/experiment.hpp"
#include "mfbn/legendre.hpp"
#include "mfbn/objective.hpp"
#include "mfbn/solver.hpp"

using namespace mfbn;

namespace {

BeliefNetwork table_net(ActivationKind kind, std::size_t index) {
    ExperimentConfig cfg;
    cfg.activation = Activation(kind);
    if (kind == ActivationKind::NoisyOr) {
        cfg.weight_range = {0.0, 0.25};
        cfg.bias_range = {0.0, 0.25};
    }
    return random_layered(cfg, index);
}

void BM_ObjectiveValue(benchmark::State& state) {
    const auto scheme = static_cast<SchemeId>(state.range(0));
    const BeliefNetwork net = table_net(ActivationKind::Sigmoid, 0);
    ObjectiveEvaluator ev(net, scheme);
    const MeanVector u(net.n_units(), 0.4);
    MeanVector v = u;
    for (auto _ : state) benchmark::DoNotOptimize(ev.value(v));
}
BENCHMARK(BM_ObjectiveValue)->DenseRange(0, 2);

void BM_ObjectiveGradient(benchmark::State& state) {
    const auto scheme = static_cast<SchemeId>(state.range(0));
    const BeliefNetwork net = table_net(ActivationKind::Sigmoid, 0);
    ObjectiveEvaluator ev(net, scheme);
    const MeanVector u(net.n_units(), 0.4);
    ObjectiveGradient g;
    for (auto _ : state) {
        ev.gradient(u, g, state.range(1) != 0);
        benchmark::DoNotOptimize(g.du.data());
    }
}
BENCHMARK(BM_ObjectiveGradient)->ArgsProduct({{0, 1, 2}, {0, 1}});

void BM_SolveTableNet(benchmark::State& state) {
    const auto scheme = static_cast<SchemeId>(state.range(0));
    const ClampContext ctx =
        ClampContext::clamped(table_net(ActivationKind::Sigmoid, 3), std::vector<std::uint8_t>(6, 0));
    for (auto _ : state) benchmark::DoNotOptimize(solve_fixed_point(ctx, scheme, SolverOptions{}).objective);
}
BENCHMARK(BM_SolveTableNet)->DenseRange(0, 2);

void BM_ExactLogPartition(benchmark::State& state) {
    const BeliefNetwork net = table_net(ActivationKind::NoisyOr, 1);
    const ClampContext ctx = ClampContext::unclamped(net);
    for (auto _ : state) benchmark::DoNotOptimize(exact_log_partition(ctx));
}
BENCHMARK(BM_ExactLogPartition);

void BM_LegendreInversion(benchmark::State& state) {
    const BeliefNetwork net = table_net(ActivationKind::Sigmoid, 2);
    const ClampContext ctx = ClampContext::clamped(net, std::vector<std::uint8_t>(6, 1));
    const MeanVector u = ctx.means(0.3);
    for (auto _ : state) benchmark::DoNotOptimize(gibbs_free_energy(ctx, u, 1.0).value);
}
BENCHMARK(BM_LegendreInversion);

}  // namespace
BENCHMARK_MAIN();
