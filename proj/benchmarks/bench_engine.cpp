#include <benchmark/benchmark.h>

#include <random>

#include "apc/engine.hpp"
#include "apc/instance_gen.hpp"
#include "apc/spectral.hpp"

namespace {

apc::LinearSystem instance(apc::Index m, apc::Index s) {
  std::mt19937_64 rng(17);
  apc::InstanceSpec spec;
  spec.m = m;
  spec.s = s;
  spec.target_kappa = 2.0;
  spec.noise_power = 1e-4;
  return apc::generate_instance(spec, rng);
}

void BM_RunSequential(benchmark::State& state) {
  const auto sys = instance(state.range(0), state.range(1));
  apc::RunOptions opt;
  opt.rounds = 50;
  for (auto _ : state) benchmark::DoNotOptimize(apc::run_apc(sys, opt).final);
  state.SetItemsProcessed(state.iterations() * 50 * state.range(0));
}
BENCHMARK(BM_RunSequential)->Args({32, 16})->Args({128, 16})->Args({512, 32});

void BM_RunThreaded(benchmark::State& state) {
  const auto sys = instance(state.range(0), state.range(1));
  apc::RunOptions opt;
  opt.rounds = 50;
  opt.mode = apc::ExecutionMode::kThreaded;
  opt.workers = 4;
  for (auto _ : state) benchmark::DoNotOptimize(apc::run_apc(sys, opt).final);
  state.SetItemsProcessed(state.iterations() * 50 * state.range(0));
}
BENCHMARK(BM_RunThreaded)->Args({32, 16})->Args({128, 16})->Args({512, 32});

void BM_VerifySpectrum(benchmark::State& state) {
  const auto sys = instance(state.range(0), state.range(1));
  const auto blocks = apc::partition_rows(sys);
  const auto projections = apc::projections_for(blocks);
  const auto cs = apc::consensus_matrix(blocks);
  const auto params = apc::optimal_params(cs.theta_min, cs.theta_max);
  const auto g = apc::build_gain_matrix(projections, cs.x, params);
  for (auto _ : state) {
    benchmark::DoNotOptimize(apc::verify_spectrum(g, cs.thetas, params).rho_measured);
  }
}
BENCHMARK(BM_VerifySpectrum)->Args({8, 4})->Args({16, 5})->Args({32, 6})->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
