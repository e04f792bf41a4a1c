#include <benchmark/benchmark.h>

#include <cmath>
#include <variant>

#include "backbone/backbone_law.hpp"
#include "backbone/bbm_sim.hpp"
#include "backbone/exit_analysis.hpp"
#include "backbone/mechanism.hpp"
#include "backbone/waves.hpp"

using namespace backbone;

namespace {

BranchingMechanism mixed() { return BranchingMechanism(0.9, 0.4, JumpMeasure({{1.3, 0.7}}, {{0.5, 1, 1.2}})); }

const double kAzRho = 5.0 / (2.0 * std::sqrt(3.0));

void BM_EvalPsi(benchmark::State& state) {
  const auto m = mixed();
  double l = 0.0;
  for (auto _ : state) {
    l = l < 2.0 ? l + 1e-3 : 0.0;
    benchmark::DoNotOptimize(m(l));
  }
}
BENCHMARK(BM_EvalPsi);

void BM_LambdaStar(benchmark::State& state) {
  const auto m = mixed();
  for (auto _ : state) benchmark::DoNotOptimize(find_lambda_star(m));
}
BENCHMARK(BM_LambdaStar);

void BM_OffspringPmf(benchmark::State& state) {
  const auto m = mixed();
  const auto ls = find_lambda_star(m);
  for (auto _ : state) benchmark::DoNotOptimize(offspring_pmf(m, ls, static_cast<int>(state.range(0))));
}
BENCHMARK(BM_OffspringPmf)->Arg(64)->Arg(1024);

void BM_SampleBranchEvent(benchmark::State& state) {
  const auto m = mixed();
  const auto law = offspring_pmf(m, find_lambda_star(m), 1024);
  Rng rng(7);
  for (auto _ : state) benchmark::DoNotOptimize(sample_branch_event(law, rng));
}
BENCHMARK(BM_SampleBranchEvent);

void BM_SolvePhi(benchmark::State& state) {
  const BranchingMechanism m(1.0, 1.0);
  const auto ls = find_lambda_star(m);
  const double rho = static_cast<double>(state.range(0)) / 10.0;
  for (auto _ : state) benchmark::DoNotOptimize(solve_phi(m, ls, rho));
}
BENCHMARK(BM_SolvePhi)->Arg(0)->Arg(10)->Unit(benchmark::kMillisecond);

void BM_SolvePsiAndDerive(benchmark::State& state) {
  const BranchingMechanism m(1.0, 1.0);
  const auto ls = find_lambda_star(m);
  for (auto _ : state) benchmark::DoNotOptimize(derive_psi_d(solve_psi_wave(m, ls, kAzRho), m));
}
BENCHMARK(BM_SolvePsiAndDerive)->Unit(benchmark::kMillisecond);

void BM_EvolvePoint(benchmark::State& state) {
  const BranchingMechanism m(1.0, 1.0);
  const auto curve = derive_psi_d(solve_psi_wave(m, find_lambda_star(m), kAzRho), m);
  const auto gen = ExitGenerator::from_curve(curve);
  for (auto _ : state) benchmark::DoNotOptimize(evolve_point(gen, 1.0, 0.5));
}
BENCHMARK(BM_EvolvePoint);

void BM_RunReplica(benchmark::State& state) {
  const BranchingMechanism m(1.0, 1.0);
  SimConfig cfg;
  cfg.law = offspring_pmf(m, find_lambda_star(m), 64);
  cfg.rho = 0.5;
  cfg.barrier = 0.0;
  cfg.x0 = 1.0;
  cfg.t_max = static_cast<double>(state.range(0));
  std::uint64_t i = 0;
  for (auto _ : state) benchmark::DoNotOptimize(run_replica(cfg, stream_seed(3, i++)));
}
BENCHMARK(BM_RunReplica)->Arg(4)->Arg(8)->Unit(benchmark::kMicrosecond);

}  // namespace

BENCHMARK_MAIN();
