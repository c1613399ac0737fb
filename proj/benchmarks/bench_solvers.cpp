#include <benchmark/benchmark.h>

#include <random>

#include "gridmop/admm.hpp"
#include "gridmop/ce_solver.hpp"
#include "gridmop/local_solver.hpp"

using namespace gridmop;

namespace {

HorizonProblem paper_scale_instance() {
    const int prosumers = 10;
    const int N = 48;
    const NetConsumptionSeries scenario = synth_scenario(1, prosumers, 3 * N);
    std::vector<TubeSegment> segments{{0, 0.2, 0.4}, {72, 0.6, 0.8}};
    const TubeSpec tube = expand_tube_segments(segments, 3 * N);
    std::vector<ProsumerParams> params(prosumers);
    for (auto& p : params) {
        p.capacity = 2.0;
        p.u_min = -0.5;
        p.u_max = 0.5;
    }
    return make_horizon(scenario, params, tube, 0, TimeGrid{0.5, N, 0},
                        Eigen::VectorXd::Constant(prosumers, 0.5), 0.5);
}

}  // namespace

static void BM_ProjectionCold(benchmark::State& state) {
    const int N = static_cast<int>(state.range(0));
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    Eigen::VectorXd w(N), target(N);
    for (int n = 0; n < N; ++n) {
        w[n] = 0.2 + 0.5 * unit(rng);
        target[n] = w[n] - 0.3;
    }
    ProsumerParams params;
    for (auto _ : state) {
        DiProjector projector(w, 1.0, params, TimeGrid{0.5, N, 0});
        benchmark::DoNotOptimize(projector.project(target));
    }
}
BENCHMARK(BM_ProjectionCold)->Arg(12)->Arg(24)->Arg(48);

static void BM_ProjectionWarm(benchmark::State& state) {
    const int N = static_cast<int>(state.range(0));
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    Eigen::VectorXd w(N), target(N);
    for (int n = 0; n < N; ++n) {
        w[n] = 0.2 + 0.5 * unit(rng);
        target[n] = w[n] - 0.3;
    }
    ProsumerParams params;
    DiProjector projector(w, 1.0, params, TimeGrid{0.5, N, 0});
    projector.project(target);
    for (auto _ : state) {
        // Slightly moving target, as seen across consecutive iterations.
        target[0] += 1e-4;
        benchmark::DoNotOptimize(projector.project(target));
    }
}
BENCHMARK(BM_ProjectionWarm)->Arg(12)->Arg(24)->Arg(48);

static void BM_CeUpdate(benchmark::State& state) {
    const int N = static_cast<int>(state.range(0));
    CeSubproblem sub;
    sub.z_bar_new = Eigen::VectorXd::Constant(N, 0.4);
    sub.lambda_bar = Eigen::VectorXd::Constant(N, 0.01);
    sub.rho = 0.2;
    sub.kappa = 0.5;
    sub.prosumers = 10;
    sub.zeta_bar = Eigen::VectorXd::Constant(N, 0.3);
    sub.tube.lower = Eigen::VectorXd::Constant(N, 0.2);
    sub.tube.upper = Eigen::VectorXd::Constant(N, 0.4);
    for (auto _ : state) {
        benchmark::DoNotOptimize(solve_ce(sub));
    }
}
BENCHMARK(BM_CeUpdate)->Arg(48)->Arg(192);

static void BM_AdmmSolvePaperScale(benchmark::State& state) {
    const HorizonProblem horizon = paper_scale_instance();
    AdmmConfig cfg;
    cfg.rho = 0.2;
    cfg.max_iters = 2000;
    cfg.kappa = 0.5;
    for (auto _ : state) {
        benchmark::DoNotOptimize(run_admm(horizon, cfg));
    }
}
BENCHMARK(BM_AdmmSolvePaperScale)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
